"""Watermark robustness toolkit: image watermark codecs, degrade/restore
attacks, and spectral analysis, backed by the C++ core."""

try:
    # installed layout: the extension lives inside the package
    from ._wmbench import *  # noqa: F401,F403
    from ._wmbench import __doc__ as _core_doc  # noqa: F401
except ImportError:
    # development layout: the extension is on sys.path (e.g. build/bindings)
    from _wmbench import *  # noqa: F401,F403

__all__ = [
    "random_payload",
    "ss_embed",
    "ss_detect",
    "additive_embed",
    "additive_detect",
    "add_noise",
    "gaussian_blur",
    "jpeg_cycle",
    "restore_tv",
    "restore_tikhonov",
    "wiener_deconvolve",
    "run_attack",
    "attack_names",
    "psnr",
    "ssim",
    "noise_energy_check",
    "make_corpus",
    "load_image",
    "save_image",
]

__version__ = "0.1.0"
