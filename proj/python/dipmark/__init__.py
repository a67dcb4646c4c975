"""Python bindings for the DiPmark watermarking toolkit."""

from ._dipmark import (
    DipmarkError,
    __version__,
    attack,
    certified_radius,
    certified_radius_fixed_length,
    derive_seed_hex,
    detect,
    dip_reweight,
    generate,
    p_value_exact,
    p_value_kl,
    permutation_from_key,
    phi_statistic,
    preserve_exact,
    preserve_mc,
    pw_alpha_reweight,
    soft_reweight,
    threshold_for_fpr,
    top_k_truncate,
    z_test_baseline,
)

__all__ = [
    "DipmarkError",
    "__version__",
    "attack",
    "certified_radius",
    "certified_radius_fixed_length",
    "derive_seed_hex",
    "detect",
    "dip_reweight",
    "generate",
    "p_value_exact",
    "p_value_kl",
    "permutation_from_key",
    "phi_statistic",
    "preserve_exact",
    "preserve_mc",
    "pw_alpha_reweight",
    "soft_reweight",
    "threshold_for_fpr",
    "top_k_truncate",
    "z_test_baseline",
]
