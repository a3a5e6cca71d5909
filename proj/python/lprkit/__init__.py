"""Phase retrieval with plug-and-play priors (C++ core)."""

from ._core import (
    ArgumentError,
    ConfigError,
    Model,
    add_wgn,
    align_phase,
    ap_solve,
    cdi_model,
    cdp_model,
    denoise,
    fft2,
    forward,
    fpm_model,
    ifft2,
    lpr_solve,
    phantom,
    psnr,
    run_bench,
    ssim,
    wf_solve,
)

__all__ = [
    "ArgumentError",
    "ConfigError",
    "Model",
    "add_wgn",
    "align_phase",
    "ap_solve",
    "cdi_model",
    "cdp_model",
    "denoise",
    "fft2",
    "forward",
    "fpm_model",
    "ifft2",
    "lpr_solve",
    "phantom",
    "psnr",
    "run_bench",
    "ssim",
    "wf_solve",
]
