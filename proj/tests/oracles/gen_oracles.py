"""Reference values for the C++ tests, computed with numpy / scipy / skimage.

Inputs are closed-form so both sides build them without sharing an RNG.
Run from the repo root:  python tests/oracles/gen_oracles.py
"""
import json
from pathlib import Path

import numpy as np
from scipy import ndimage
from skimage.metrics import structural_similarity


def img_a(h, w):
    r, c = np.mgrid[0:h, 0:w].astype(float)
    return 0.5 + 0.4 * np.sin(0.37 * r + 0.91 * c + 0.013 * r * c)


def img_b(h, w):
    r, c = np.mgrid[0:h, 0:w].astype(float)
    return img_a(h, w) + 0.1 * np.cos(1.3 * r - 0.7 * c)


def field_z(h, w):
    r, c = np.mgrid[0:h, 0:w].astype(float)
    return img_a(h, w) * np.exp(1j * (0.21 * r - 0.17 * c + 0.02 * r * c))


def mask_d(h, w, l):
    r, c = np.mgrid[0:h, 0:w].astype(float)
    g = np.mod(0.1234 * r * r + 0.567 * c + 0.31 * l * (r + 2 * c), 1.0)
    return np.exp(2j * np.pi * g)


def cx(z):
    return [float(z.real), float(z.imag)]


# (row, col) probes used for every plane-valued oracle
PROBES = [(0, 0), (1, 2), (3, 7), (5, 0), (7, 11)]

out = {"probes": PROBES}

# unitary 2-D DFT of a 8x12 field
z = field_z(8, 12)
Z = np.fft.fft2(z, norm="ortho")
out["fft2"] = {"dims": [8, 12], "values": [cx(Z[p]) for p in PROBES],
               "energy": float(np.sum(np.abs(Z) ** 2))}

# SSIM, gaussian window 11, sigma 1.5, population covariance, range 1
a, b = img_a(32, 40), img_b(32, 40)
out["ssim"] = {"dims": [32, 40], "data_range": 1.0,
               "value": float(structural_similarity(
                   a, b, data_range=1.0, gaussian_weights=True, sigma=1.5,
                   use_sample_covariance=False))}
mse = float(np.mean((a - b) ** 2))
out["psnr"] = {"dims": [32, 40], "peak": 1.0, "value": float(10 * np.log10(1.0 / mse))}

# half-sample symmetric boundary == scipy 'reflect'
for s in (1.5, 2.0):
    g = ndimage.gaussian_filter(a, s, mode="reflect", truncate=4.0)
    out[f"gaussian_{s}"] = {"sigma": s, "values": [float(g[p]) for p in PROBES]}
m = ndimage.median_filter(a, size=5, mode="reflect")
out["median_r2"] = {"radius": 2, "values": [float(m[p]) for p in PROBES]}

# CDP, 3 closed-form masks on a 16x16 field
z = field_z(16, 16)
planes = [np.abs(np.fft.fft2(mask_d(16, 16, l) * z, norm="ortho")) ** 2 for l in range(3)]
out["cdp"] = {"dims": [16, 16], "masks": 3,
              "values": [[float(p[q]) for q in PROBES] for p in planes]}

# CDI, 12x10 object centred in a 24x20 frame
z = field_z(12, 10)
pad = np.zeros((24, 20), complex)
pad[6:18, 5:15] = z
I = np.abs(np.fft.fft2(pad, norm="ortho")) ** 2
out["cdi"] = {"dims": [12, 10], "padded": [24, 20], "values": [float(I[p]) for p in PROBES],
              "total": float(I.sum())}

Path(__file__).with_name("oracles.json").write_text(json.dumps(out, indent=1) + "\n")
