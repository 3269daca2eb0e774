"""Command-line driver: ``leakage-lab {analyze,sweep,krr,extremal,oracle}``.

Mechanisms are read from a JSON document::

    {"prior": [0.5, 0.5],
     "channel": [[0.9, 0.1], [0.2, 0.8]],
     "x_labels": ["a", "b"],          # optional
     "y_labels": ["yes", "no"]}       # optional

Exit codes: 0 success, 2 validation error, 3 budget error, 4 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import Joint, make_joint, pml_max
from .dp import privacy_profile, psi1, psi2, pure_dp_level
from .envelope import (OracleBudget, binary_envelope, envelope_bracket, envelope_upper_terms,
                       maximal_leakage, search_closed_delta, search_envelope)
from .errors import BudgetExceeded, ParseError, ValidationError
from .mechanisms import (KrrParams, four_level_prior, krr_adp_curve, krr_breakpoints,
                         krr_envelope_exact_small_delta, krr_envelope_lower, krr_joint, krr_q1,
                         pml_extremal_joint)
from .quantiles import (failure_probability, leakage_distribution, left_quantile,
                        right_quantile)

CSV_HEADER = ("delta", "upper_min", "upper_ml_term", "upper_pml_term", "lower", "eps_b",
              "bar_eps_y", "eps_dp", "h_delta")
DEFAULT_GRID = 512

EXIT_OK, EXIT_VALIDATION, EXIT_BUDGET, EXIT_IO = 0, 2, 3, 4


# -- mechanism files ---------------------------------------------------------

_KEYS = {"prior", "channel", "x_labels", "y_labels"}


def parse_mechanism(text: str) -> Joint:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(e.msg, e.lineno, e.colno) from None
    if not isinstance(doc, dict):
        raise ValidationError("mechanism file must be a JSON object")
    missing = {"prior", "channel"} - doc.keys()
    if missing:
        raise ValidationError(f"mechanism file lacks {', '.join(sorted(missing))}")
    extra = doc.keys() - _KEYS
    if extra:
        raise ValidationError(f"unknown keys in mechanism file: {', '.join(sorted(extra))}")
    try:
        prior = np.array(doc["prior"], dtype=float)
        channel = np.array(doc["channel"], dtype=float)
    except (TypeError, ValueError) as e:
        raise ValidationError(f"prior and channel must be numeric arrays ({e})") from None
    for key in ("x_labels", "y_labels"):
        labels = doc.get(key)
        if labels is not None and not (isinstance(labels, list)
                                       and all(isinstance(s, str) for s in labels)):
            raise ValidationError(f"{key} must be a list of strings")
    return make_joint(prior, channel, doc.get("x_labels"), doc.get("y_labels"))


def load_mechanism(path: str) -> Joint:
    with open(path, encoding="utf-8") as fh:
        return parse_mechanism(fh.read())


def dump_mechanism(joint: Joint) -> str:
    # json writes floats with repr, so a reload is bit-identical
    doc = {"prior": joint.prior.probs.tolist(),
           "channel": joint.channel.matrix.tolist(),
           "x_labels": list(joint.x_labels),
           "y_labels": list(joint.y_labels)}
    return json.dumps(doc, indent=2) + "\n"


def save_mechanism(joint: Joint, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dump_mechanism(joint))


# -- reports -----------------------------------------------------------------

def _nats(v: float) -> str:
    if math.isinf(v):
        return f"{v} nats"
    return f"{v:.12g} nats (e^value = {math.exp(v):.6g})"


def analyze_payload(joint: Joint, eps: float | None = None,
                    delta: float | None = None) -> dict:
    """Everything ``analyze`` reports, as plain JSON-ready values."""
    ld = leakage_distribution(joint)
    s = joint.support
    out = {
        "n_inputs": joint.n_inputs,
        "n_outputs": joint.n_outputs,
        "support": [joint.y_labels[i] for i in joint.support_indices],
        "marginal": dict(zip(joint.y_labels, joint.marginal.tolist())),
        "pml": {joint.y_labels[i]: float(joint.leakages[i]) for i in np.flatnonzero(s)},
        "pml_max": pml_max(joint),
        "maximal_leakage": maximal_leakage(joint),
        "atoms": [{"value": v, "mass": m} for v, m in ld.atoms()],
        "pure_dp_level": pure_dp_level(joint.channel),
    }
    if eps is not None:
        out["eps"] = {
            "value": eps,
            "failure_probability": failure_probability(ld, eps),
            "psi1": psi1(joint, eps),
            "psi2": psi2(joint, eps),
            "privacy_profile": privacy_profile(joint.channel, eps),
        }
    if delta is not None:
        b = envelope_bracket(joint, delta)
        out["delta"] = {
            "value": delta,
            "left_quantile": left_quantile(ld, delta),
            "right_quantile": right_quantile(ld, delta),
            "binary_envelope": binary_envelope(joint, delta),
            "bracket": [b.lower, b.upper],
            "tight": b.tight,
            "lower_witness": b.lower_witness,
            "upper_source": b.upper_source,
        }
    return out


def format_analysis(p: dict) -> str:
    lines = [f"|X| = {p['n_inputs']}, |Y| = {p['n_outputs']}, support = {{{', '.join(p['support'])}}}",
             "per-outcome leakage:"]
    width = max(len(y) for y in p["pml"])
    for y, v in p["pml"].items():
        lines.append(f"  {y:>{width}}  P_Y = {p['marginal'][y]:.12g}  pml = {_nats(v)}")
    lines += [f"pml_max          = {_nats(p['pml_max'])}",
              f"maximal leakage  = {_nats(p['maximal_leakage'])}",
              f"pure DP level    = {_nats(p['pure_dp_level'])}",
              "leakage atoms (value: mass):"]
    lines += [f"  {a['value']:.12g}: {a['mass']:.12g}" for a in p["atoms"]]
    if "eps" in p:
        e = p["eps"]
        lines += [f"at eps = {e['value']:.12g}:",
                  f"  P(leakage > eps) = {e['failure_probability']:.12g}",
                  f"  psi1             = {e['psi1']:.12g}",
                  f"  psi2             = {e['psi2']:.12g}",
                  f"  privacy profile  = {e['privacy_profile']:.12g}"]
    if "delta" in p:
        d = p["delta"]
        lo, hi = d["bracket"]
        lines += [f"at delta = {d['value']:.12g}:",
                  f"  left quantile    = {_nats(d['left_quantile'])}",
                  f"  right quantile   = {_nats(d['right_quantile'])}",
                  f"  binary envelope  = {_nats(d['binary_envelope'])}",
                  f"  envelope bracket = [{lo:.12g}, {hi:.12g}]" + (" (tight)" if d["tight"] else ""),
                  f"    lower from {d['lower_witness']}",
                  f"    upper from {d['upper_source']}"]
    return "\n".join(lines) + "\n"


# -- sweeps ------------------------------------------------------------------

@dataclass(frozen=True)
class SweepRow:
    delta: float
    upper_min: float
    upper_ml_term: float
    upper_pml_term: float
    lower: float
    eps_b: float
    bar_eps_y: float
    eps_dp: float | None = None
    h_delta: float | None = None

    def cells(self) -> list[str]:
        return ["" if v is None else f"{v:.12g}"
                for v in (self.delta, self.upper_min, self.upper_ml_term, self.upper_pml_term,
                          self.lower, self.eps_b, self.bar_eps_y, self.eps_dp, self.h_delta)]


def delta_grid(n: int = DEFAULT_GRID, extra: Sequence[float] = ()) -> np.ndarray:
    """Midpoint grid ``(2i+1)/(2n)`` plus any extra points in (0, 1), sorted and deduplicated."""
    if n < 1:
        raise ValidationError(f"grid size must be positive, got {n}")
    g = (2 * np.arange(n) + 1) / (2 * n)
    pts = np.concatenate([g, [d for d in extra if 0 < d < 1]])
    return np.unique(pts)


def sweep_row(joint: Joint, delta: float) -> SweepRow:
    ml, pm = envelope_upper_terms(joint, delta)
    rq = right_quantile(leakage_distribution(joint), delta)
    eb = binary_envelope(joint, delta)
    return SweepRow(delta, min(ml, pm), ml, pm, max(rq, eb), eb, rq)


def sweep_rows(joint: Joint, grid: Sequence[float]) -> list[SweepRow]:
    return [sweep_row(joint, float(d)) for d in grid]


def krr_sweep_rows(params: KrrParams, prior, grid: Sequence[float]) -> tuple[list[SweepRow], int]:
    """Sweep rows with the k-RR columns filled in.

    ``h_delta`` holds the exact value ``log(alpha/q_1)`` for ``delta <= q_1``
    and the piecewise lower bound above it.  Also returns how many rows fell
    back because the prior condition failed.
    """
    joint = krr_joint(params, prior)
    q1 = krr_q1(params, prior)
    rows, fallbacks = [], 0
    for d in grid:
        d = float(d)
        r = sweep_row(joint, d)
        if d <= q1:
            h = krr_envelope_exact_small_delta(params, prior, d)
        else:
            lb = krr_envelope_lower(params, prior, d)
            fallbacks += not lb.condition_holds
            h = lb.value
        rows.append(SweepRow(r.delta, r.upper_min, r.upper_ml_term, r.upper_pml_term,
                             max(r.lower, h), r.eps_b, r.bar_eps_y,
                             krr_adp_curve(params, d), h))
    return rows, fallbacks


def format_csv(rows: Sequence[SweepRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in rows:
        w.writerow(r.cells())
    return buf.getvalue()


def _emit(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


# -- prior specs -------------------------------------------------------------

def parse_prior_spec(spec: str, k: int | None = None) -> np.ndarray:
    """``"0.2,0.3,0.5"``, ``"uniform"`` (needs ``k``) or ``"four-level:RHO"`` (needs ``k``)."""
    spec = spec.strip()
    if spec == "uniform":
        if k is None:
            raise ValidationError("a uniform prior needs k")
        return np.full(k, 1.0 / k)
    if spec.startswith("four-level:"):
        if k is None:
            raise ValidationError("a four-level prior needs k")
        try:
            rho = float(spec.split(":", 1)[1])
        except ValueError:
            raise ValidationError(f"bad rho in prior spec {spec!r}") from None
        return four_level_prior(k, rho).probs
    try:
        p = np.array([float(t) for t in spec.split(",")])
    except ValueError:
        raise ValidationError(f"cannot parse prior spec {spec!r}") from None
    if k is not None and p.size != k:
        raise ValidationError(f"prior has {p.size} entries but k = {k}")
    return p


def _eta_grid(text: str) -> tuple[float, ...]:
    try:
        etas = tuple(float(t) for t in text.split(","))
    except ValueError:
        raise ValidationError(f"cannot parse eta grid {text!r}") from None
    if not etas or any(not 0 < e < 1 for e in etas):
        raise ValidationError("eta values must lie in (0, 1)")
    return etas


# -- subcommands -------------------------------------------------------------

def cmd_analyze(args) -> int:
    joint = load_mechanism(args.file)
    payload = analyze_payload(joint, args.eps, args.delta)
    if args.json:
        _emit(json.dumps(payload, indent=2) + "\n", args.out)
    else:
        _emit(format_analysis(payload), args.out)
    return EXIT_OK


def cmd_sweep(args) -> int:
    joint = load_mechanism(args.file)
    _emit(format_csv(sweep_rows(joint, delta_grid(args.grid_size))), args.out)
    return EXIT_OK


def cmd_krr(args) -> int:
    params = KrrParams(args.k, args.eps_r)
    prior = parse_prior_spec(args.prior, args.k)
    grid = delta_grid(args.grid_size, krr_breakpoints(params, prior))
    rows, fallbacks = krr_sweep_rows(params, prior, grid)
    if fallbacks:
        print(f"warning: prior condition fails on {fallbacks} rows; "
              "h_delta there is the fallback log(alpha/q_N)", file=sys.stderr)
    _emit(format_csv(rows), args.out)
    return EXIT_OK


def cmd_extremal(args) -> int:
    prior = parse_prior_spec(args.prior, args.k)
    joint = pml_extremal_joint(prior, args.eps)
    if args.out is not None:
        _emit(format_csv(sweep_rows(joint, delta_grid(args.grid_size))), args.out)
        return EXIT_OK
    lines = [f"PML-extremal mechanism, eps = {args.eps:.12g}"]
    lines += ["  " + " ".join(f"{v:.12g}" for v in row) for row in joint.channel.matrix]
    lines.append(f"pml_max = {_nats(pml_max(joint))}")
    deltas = [args.delta] if args.delta is not None else delta_grid(16)
    for d in deltas:
        b = envelope_bracket(joint, float(d))
        lines.append(f"delta = {float(d):.12g}: bracket [{b.lower:.12g}, {b.upper:.12g}]")
    _emit("\n".join(lines) + "\n", None)
    return EXIT_OK


def cmd_oracle(args) -> int:
    joint = load_mechanism(args.file)
    budget = OracleBudget(max_cells=args.max_cells, eta_grid=_eta_grid(args.eta_grid),
                          max_candidates=args.max_candidates)
    lines = []
    if args.delta is not None:
        res = search_envelope(joint, args.delta, budget, args.quantile)
        b = envelope_bracket(joint, args.delta)
        lines += [f"delta = {args.delta:.12g}",
                  f"oracle lower bound = {_nats(res.value)}",
                  f"analytic bracket   = [{b.lower:.12g}, {b.upper:.12g}]"]
    else:
        res = search_closed_delta(joint, args.eps, budget)
        ld = leakage_distribution(joint)
        lines += [f"eps = {args.eps:.12g}",
                  f"oracle failure probability = {res.value:.12g}",
                  f"unprocessed failure probability = {failure_probability(ld, args.eps):.12g}",
                  f"psi1 = {psi1(joint, args.eps):.12g}, psi2 = {psi2(joint, args.eps):.12g}"]
    lines += [f"best witness: {res.witness}",
              f"candidates searched: {res.candidates} on the {res.alphabet} alphabet"]
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="leakage-lab",
                                 description="Pointwise maximal leakage analysis of finite mechanisms.")
    sub = ap.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="full leakage report for a mechanism file")
    a.add_argument("file")
    a.add_argument("--eps", type=float)
    a.add_argument("--delta", type=float)
    a.add_argument("--json", action="store_true", help="emit the machine-readable payload")
    a.add_argument("--out")
    a.set_defaults(func=cmd_analyze)

    s = sub.add_parser("sweep", help="envelope bounds over a delta grid, as CSV")
    s.add_argument("file")
    s.add_argument("--grid-size", type=int, default=DEFAULT_GRID)
    s.add_argument("--out")
    s.set_defaults(func=cmd_sweep)

    k = sub.add_parser("krr", help="sweep CSV for k-ary randomized response")
    k.add_argument("--k", type=int, required=True)
    k.add_argument("--eps-r", type=float, required=True)
    k.add_argument("--prior", required=True,
                   help='comma list, "uniform" or "four-level:RHO"')
    k.add_argument("--grid-size", type=int, default=DEFAULT_GRID)
    k.add_argument("--out")
    k.set_defaults(func=cmd_krr)

    e = sub.add_parser("extremal", help="PML-extremal mechanism for a prior")
    e.add_argument("--prior", required=True)
    e.add_argument("--k", type=int, help="alphabet size for uniform or four-level priors")
    e.add_argument("--eps", type=float, required=True)
    e.add_argument("--delta", type=float)
    e.add_argument("--grid-size", type=int, default=DEFAULT_GRID)
    e.add_argument("--out", help="write a sweep CSV here instead of the report")
    e.set_defaults(func=cmd_extremal)

    o = sub.add_parser("oracle", help="brute-force search over post-processings")
    o.add_argument("file")
    g = o.add_mutually_exclusive_group(required=True)
    g.add_argument("--delta", type=float)
    g.add_argument("--eps", type=float)
    o.add_argument("--max-cells", type=int)
    o.add_argument("--eta-grid", default="1e-1,1e-2,1e-3,1e-4")
    o.add_argument("--max-candidates", type=int, default=OracleBudget.max_candidates)
    o.add_argument("--quantile", choices=("right", "left"), default="right",
                   help="which quantile scores candidates in --delta mode")
    o.add_argument("--out")
    o.set_defaults(func=cmd_oracle)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except BudgetExceeded as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_BUDGET
    except ValidationError as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
