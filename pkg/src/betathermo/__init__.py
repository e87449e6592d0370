"""Beta-shift thermodynamics: digits of the expansion of 1, the beta-shift
language, partition sums and pressure, and weak-Gibbs diagnostics for
equilibrium states."""

from .digits import DigitSeq, ZeroRunSchedule, beta_from_digits, expand_one, validate_admissible
from .errors import (BetaThermoError, DepthExceeded, IntegerBeta, NoRoot, NotEventuallyPeriodic,
                     NotInLanguage, PrecisionExhausted, WindowTooLarge, WindowTooSmall)
from .gibbs import (classify, cylinder_estimate, k_envelope, make_witnesses, mme_oracle,
                    weak_gibbs_defect)
from .language import (build_automaton, count_words, enumerate_words, hat, is_member,
                       suffix_info, zbar, zbar_profile)
from .numbers import CertifiedReal, parse_beta
from .presets import golden, preset, rational, tribonacci, witness
from .thermo import (Potential, check_hat_upper, check_hat_lower, osc_profile, pressure,
                     xi_constrained, xi_full)

__version__ = "0.1.0"

__all__ = [
    "DigitSeq",
    "ZeroRunSchedule",
    "beta_from_digits",
    "expand_one",
    "validate_admissible",
    "BetaThermoError",
    "DepthExceeded",
    "IntegerBeta",
    "NoRoot",
    "NotEventuallyPeriodic",
    "NotInLanguage",
    "PrecisionExhausted",
    "WindowTooLarge",
    "WindowTooSmall",
    "classify",
    "cylinder_estimate",
    "k_envelope",
    "make_witnesses",
    "mme_oracle",
    "weak_gibbs_defect",
    "build_automaton",
    "count_words",
    "enumerate_words",
    "hat",
    "is_member",
    "suffix_info",
    "zbar",
    "zbar_profile",
    "CertifiedReal",
    "parse_beta",
    "golden",
    "preset",
    "rational",
    "tribonacci",
    "witness",
    "Potential",
    "check_hat_upper",
    "check_hat_lower",
    "osc_profile",
    "pressure",
    "xi_constrained",
    "xi_full",
]
