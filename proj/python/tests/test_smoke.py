import numpy as np
import pytest

import lprkit


def test_fft_is_unitary():
    rng = np.random.default_rng(0)
    a = rng.normal(size=(8, 12)) + 1j * rng.normal(size=(8, 12))
    f = lprkit.fft2(a)
    np.testing.assert_allclose(f, np.fft.fft2(a) / np.sqrt(a.size), atol=1e-12)
    np.testing.assert_allclose(lprkit.ifft2(f), a, atol=1e-12)


def test_metrics():
    x = np.full((16, 16), 0.3)
    assert lprkit.psnr(x, x + 0.1, 1.0) == pytest.approx(20.0, abs=1e-12)
    img = lprkit.phantom((32, 32))
    assert lprkit.ssim(img, img) == 1.0


def test_cdp_round_trip():
    u = lprkit.phantom((32, 32)).astype(complex)
    model = lprkit.cdp_model((32, 32), masks=5, seed=3)
    assert model.modality == "cdp" and model.planes == 5
    planes = lprkit.forward(u, model)
    assert len(planes) == 5 and planes[0].shape == (32, 32)
    est, rep = lprkit.ap_solve(planes, model, max_iters=200)
    assert rep["residuals"][-1] < 1e-6
    assert lprkit.psnr(np.abs(u), np.abs(lprkit.align_phase(est, u))) > 50


def test_lpr_beats_ap_under_noise():
    u = lprkit.phantom((64, 64)).astype(complex)
    model = lprkit.cdp_model((64, 64), masks=3, seed=1)
    noisy = lprkit.add_wgn(lprkit.forward(u, model), snr_db=10, seed=2)
    ap, _ = lprkit.ap_solve(noisy, model, max_iters=100)
    lpr, rep = lprkit.lpr_solve(noisy, model, outer_max=30)
    assert rep["iterations"] == 30
    assert lprkit.psnr(np.abs(u), np.abs(lpr)) > lprkit.psnr(np.abs(u), np.abs(ap))


def test_errors_map_to_value_error():
    model = lprkit.cdp_model((8, 8), masks=2)
    with pytest.raises(ValueError):
        lprkit.ap_solve([np.ones((8, 8))], model)
    with pytest.raises(ValueError):
        lprkit.run_bench("/nonexistent.json")


def test_denoise_and_other_models():
    img = lprkit.phantom((32, 32))
    out = lprkit.denoise(img, "tv", 0.05)
    assert out.shape == img.shape and np.isfinite(out).all()
    assert lprkit.cdi_model((16, 16)).planes == 1
    assert lprkit.fpm_model((64, 64), grid=3, downsample=4).planes == 9
