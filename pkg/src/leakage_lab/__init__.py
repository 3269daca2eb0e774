"""Pointwise maximal leakage (PML) of finite mechanisms, its tail and its envelope."""

from .core import (SIM_TOL, TOL, Channel, Joint, Prior, compose, info_density, make_joint,
                   pml, pml_max, posterior, reduce)
from .dp import (adp_tail_bound, dp_failure_probability, privacy_loss, privacy_profile,
                 privacy_profile_inverse, psi1, psi2, pure_dp_level)
from .envelope import (BinaryEvent, EnvelopeBracket, OracleBudget, OracleResult,
                       binary_envelope, binary_envelope_event, composition_upper,
                       envelope_bracket, envelope_lower, envelope_upper, event_leakage,
                       event_probability, gap_closing_post, lemma4_subset_witness,
                       maximal_leakage, oracle_closed_delta, oracle_envelope,
                       search_closed_delta, search_envelope)
from .errors import *  # noqa: F401,F403
from .mechanisms import (KrrLowerBound, KrrParams, KrrRegime, four_level_prior,
                         krr_adp_curve, krr_binary_envelope, krr_channel,
                         krr_envelope_exact_small_delta, krr_envelope_lower,
                         krr_envelope_upper, krr_joint, krr_regime, pml_extremal_channel,
                         pml_extremal_joint)
from .quantiles import (LeakageDistribution, failure_probability, leakage_distribution,
                        left_quantile, left_quantile_variational, right_quantile,
                        right_quantile_variational)

__version__ = "0.1.0"
