"""Deterministic thermal-like test frames.

Low-resolution thermal imagery is smooth, low-texture and dominated by
a few warm shapes over a mild ambient gradient.  These generators build
such frames procedurally (seeded, reproducible) for the evaluation
protocols and the test suite: soft-edged elliptical "body" clusters,
rectangular fixtures, and band-limited sensor noise.  The frames are
lightly low-passed so Fourier-domain sub-pixel shifts do not ring.
"""

from __future__ import annotations

import numpy as np

from .image import GrayImage


def _gaussian_lowpass(pixels: np.ndarray, sigma_px: float) -> np.ndarray:
    """Gaussian blur via the frequency domain (periodic boundaries)."""
    if sigma_px <= 0:
        return pixels
    fy = np.fft.fftfreq(pixels.shape[0])[:, None]
    fx = np.fft.fftfreq(pixels.shape[1])[None, :]
    transfer = np.exp(-2.0 * np.pi ** 2 * sigma_px ** 2 * (fx ** 2 + fy ** 2))
    return np.fft.ifft2(np.fft.fft2(pixels) * transfer).real


def _soft_ellipse(xx: np.ndarray, yy: np.ndarray, cx: float, cy: float,
                  rx: float, ry: float, angle: float, softness: float) -> np.ndarray:
    """Plateau of height 1 inside an ellipse, sigmoid edge of ~softness*r."""
    dx, dy = xx - cx, yy - cy
    ca, sa = np.cos(angle), np.sin(angle)
    u = (dx * ca + dy * sa) / rx
    v = (-dx * sa + dy * ca) / ry
    radius = np.hypot(u, v)
    return 1.0 / (1.0 + np.exp((radius - 1.0) / softness))


def _soft_box(xx: np.ndarray, yy: np.ndarray, x0: float, y0: float,
              x1: float, y1: float, edge: float) -> np.ndarray:
    gx = (1.0 / (1.0 + np.exp(-(xx - x0) / edge))
          * 1.0 / (1.0 + np.exp((xx - x1) / edge)))
    gy = (1.0 / (1.0 + np.exp(-(yy - y0) / edge))
          * 1.0 / (1.0 + np.exp((yy - y1) / edge)))
    return gx * gy


def thermal_like(width: int = 80, height: int = 60, seed: int = 17,
                 n_people: int = 2, n_boxes: int = 2,
                 noise: float = 0.045, smooth: float = 0.45) -> GrayImage:
    """A reproducible indoor-scene-like thermal frame in [0, 1]."""
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:height, 0:width].astype(np.float64)
    scale = min(width, height)
    torso = 0.08

    # ambient gradient (walls slightly warmer toward one side)
    img = (0.28 + 0.4 * (0.06 * xx / width + 0.05 * yy / height
                         + 0.03 * np.sin(2 * np.pi * xx / width + 1.3)))

    # warm furniture / radiator boxes, medium contrast
    for _ in range(n_boxes):
        x0 = rng.uniform(0.05, 0.6) * width
        y0 = rng.uniform(0.05, 0.6) * height
        bw = rng.uniform(0.15, 0.35) * width
        bh = rng.uniform(0.15, 0.35) * height
        level = rng.uniform(0.10, 0.22) * rng.choice([-1.0, 1.0])
        img += level * _soft_box(xx, yy, x0, y0, x0 + bw, y0 + bh,
                                 edge=0.012 * scale)

    # people: a head over a torso, strongly warm with soft edges
    for _ in range(n_people):
        cx = rng.uniform(0.2, 0.8) * width
        cy = rng.uniform(0.35, 0.75) * height
        torso_r = rng.uniform(torso * 0.8, torso * 1.2) * scale
        heat = rng.uniform(0.38, 0.5)
        img += heat * _soft_ellipse(xx, yy, cx, cy, torso_r, 1.5 * torso_r,
                                    rng.uniform(-0.2, 0.2), softness=0.05)
        head_cy = cy - 2.1 * torso_r
        img += heat * 0.9 * _soft_ellipse(xx, yy, cx, head_cy, 0.55 * torso_r,
                                          0.62 * torso_r, 0.0, softness=0.06)

    # low-pass the scene (optics), then add sensor noise; the noise must
    # stay broadband so the smallest filter scale sees it and the noise
    # threshold inside phase congruency can calibrate itself on it
    img = _gaussian_lowpass(img, smooth)
    img += _gaussian_lowpass(rng.normal(0.0, noise, img.shape), 0.25)
    return GrayImage(np.clip(img, 0.01, 0.99))
