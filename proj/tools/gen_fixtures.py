#!/usr/bin/env python3
"""Regenerates the bundled fixtures in data/.

Writes a synthetic 224-band reflectance library with six materials whose
curves mimic common lab spectra (red edge, water/clay/carbonate absorption
features), a 63x63 four-class label map of contiguous regions aligned to
the default 3x downsampling grid, and the default scene config.
Deterministic; rerunning reproduces the committed files byte for byte.
"""

import argparse
import json
import os

import numpy as np


def gauss(x, mu, sigma):
    return np.exp(-0.5 * ((x - mu) / sigma) ** 2)


def sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


def build_library(bands=224):
    lam = np.linspace(0.4, 2.5, bands)
    mats = {}

    veg = 0.05 + 0.04 * gauss(lam, 0.55, 0.03) + 0.43 * sigmoid((lam - 0.72) / 0.015)
    veg *= (1 - 0.45 * gauss(lam, 1.45, 0.05)) * (1 - 0.50 * gauss(lam, 1.94, 0.06))
    veg *= 1 - 0.25 * sigmoid((lam - 2.2) / 0.1)
    mats["vegetation"] = veg

    soil = 0.10 + 0.38 * sigmoid((lam - 1.0) / 0.35)
    soil *= (1 - 0.12 * gauss(lam, 1.41, 0.04)) * (1 - 0.18 * gauss(lam, 1.92, 0.05))
    soil *= 1 - 0.22 * gauss(lam, 2.21, 0.05)
    mats["dry_soil"] = soil

    cal = 0.36 + 0.48 * sigmoid((lam - 0.75) / 0.30)
    cal *= (1 - 0.08 * gauss(lam, 1.88, 0.04)) * (1 - 0.45 * gauss(lam, 2.34, 0.04))
    mats["calcite"] = cal

    bas = 0.14 - 0.085 * (lam - 0.4) / 2.1
    bas *= 1 - 0.22 * gauss(lam, 1.05, 0.25)
    mats["basalt"] = bas

    gyp = 0.78 * np.ones_like(lam)
    gyp *= (1 - 0.35 * gauss(lam, 1.45, 0.05)) * (1 - 0.25 * gauss(lam, 1.75, 0.04))
    gyp *= (1 - 0.50 * gauss(lam, 1.94, 0.06)) * (1 - 0.30 * gauss(lam, 2.22, 0.05))
    mats["gypsum"] = gyp

    oli = 0.32 + 0.10 * sigmoid((lam - 0.7) / 0.2)
    oli *= 1 - 0.40 * gauss(lam, 1.05, 0.18)
    mats["olivine"] = oli

    for k in mats:
        mats[k] = np.clip(mats[k], 0.02, 0.95)
    return lam, mats


def sad_deg(a, b):
    c = np.dot(a, b) / (np.linalg.norm(a) * np.linalg.norm(b))
    return np.degrees(np.arccos(np.clip(c, -1.0, 1.0)))


def sep_blur(img, sigma):
    r = int(3 * sigma)
    x = np.arange(-r, r + 1)
    k = np.exp(-(x * x) / (2.0 * sigma * sigma))
    k /= k.sum()

    def conv(v):
        return np.convolve(np.pad(v, (r, r), mode="reflect"), k, "valid")

    img = np.apply_along_axis(conv, 0, img)
    img = np.apply_along_axis(conv, 1, img)
    return img


def build_label_map(coarse=21, scale=3, classes=4, seed=11, sigma=3.0):
    """Coarse per-class Gaussian fields, argmax, then nearest upsample.

    Aligning region boundaries to the scale-factor grid keeps most
    low-resolution pixels nearly pure, so the spectral kNN graph of the
    default scene gets a clean per-class cluster structure to smooth over.
    """
    while True:
        rng = np.random.default_rng(seed)
        fields = []
        for _ in range(classes):
            f = sep_blur(rng.standard_normal((coarse, coarse)), sigma)
            fields.append((f - f.mean()) / (f.std() + 1e-12))
        labels = np.argmax(np.stack(fields), axis=0)
        counts = np.bincount(labels.ravel(), minlength=classes)
        if counts.min() >= 0.10 * coarse * coarse:
            return np.kron(labels, np.ones((scale, scale), dtype=int))
        seed += 1


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=os.path.join(os.path.dirname(__file__), "..", "data"))
    args = ap.parse_args()
    out = os.path.abspath(args.out)
    os.makedirs(out, exist_ok=True)

    lam, mats = build_library()
    names = list(mats)
    chosen = ["vegetation", "dry_soil", "calcite", "basalt"]
    print("pairwise SAD (deg) among default materials:")
    for i in range(len(chosen)):
        for j in range(i + 1, len(chosen)):
            d = sad_deg(mats[chosen[i]], mats[chosen[j]])
            print(f"  {chosen[i]:>10s} vs {chosen[j]:<10s} {d:6.2f}")
            assert d >= 10.0, "default materials must stay spectrally distinct"

    with open(os.path.join(out, "spectral_library.csv"), "w") as f:
        f.write("wavelength," + ",".join(names) + "\n")
        for b in range(len(lam)):
            row = [f"{lam[b]:.6f}"] + [f"{mats[n][b]:.6f}" for n in names]
            f.write(",".join(row) + "\n")

    labels = build_label_map()
    counts = np.bincount(labels.ravel())
    print("label map class pixel counts:", counts.tolist())
    with open(os.path.join(out, "label_map.csv"), "w") as f:
        for r in range(labels.shape[0]):
            f.write(",".join(str(v) for v in labels[r]) + "\n")

    cfg = {
        "scale_factor": 3,
        "filter_sigma": 0.5,
        "snr_db": 30.0,
        "seed": 1,
        "material_names": chosen,
        "label_map_path": "label_map.csv",
    }
    with open(os.path.join(out, "scene_default.json"), "w") as f:
        json.dump(cfg, f, indent=2)
        f.write("\n")
    print("fixtures written to", out)


if __name__ == "__main__":
    main()
