"""Named scattering potentials and the JSON format for custom ones."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .pbessel import PotentialSpec

#: support radius used for the smooth Gaussian and volcano potentials; the
#: truncation order m = 2 pi k of the reference experiments corresponds to
#: (pi/2) R k with R = 4
SMOOTH_R = 4.0


def _gaussian(r):
    r = np.asarray(r, dtype=float)
    return np.exp(-5.0 * r * r)


def _volcano(r):
    r = np.asarray(r, dtype=float)
    return 14.0 * r * r * np.exp(-5.0 * r * r)


def _discont(r):
    r = np.asarray(r, dtype=float)
    return np.where((r > 0.0) & (r < 1.0), 1.0, np.where((r > 2.0) & (r < 3.0), 2.0, 0.0))


def _square_shell(r):
    r = np.asarray(r, dtype=float)
    return np.where((r >= 1.0) & (r <= 2.0), 3.0, 0.0)


def _rsq(r):
    r = np.asarray(r, dtype=float)
    return r * r - 1.0


def _zero(r):
    return np.zeros(np.shape(r))


_NAMED = {
    "gaussian": (_gaussian, SMOOTH_R, ()),
    "volcano": (_volcano, SMOOTH_R, ()),
    "discont": (_discont, 3.0, (1.0, 2.0)),
    "square_shell": (_square_shell, 2.0, (1.0,)),
    "rsq": (_rsq, 2.0, ()),
    "zero": (_zero, 2.0, ()),
}

NAMES = tuple(sorted(_NAMED))


def canonical_name(name: str) -> str:
    return name.strip().lower().replace("-", "_")


def named_potential(name: str, R: float | None = None) -> PotentialSpec:
    """One of gaussian, volcano, discont, square_shell, rsq (q = r^2 - 1), zero.

    ``R`` overrides the default support radius for the smooth potentials.
    """
    key = canonical_name(name)
    if key not in _NAMED:
        raise ValueError(f"unknown potential {name!r}; choose from {', '.join(NAMES)}")
    q, default_R, sing = _NAMED[key]
    R = default_R if R is None else float(R)
    sing = tuple(c for c in sing if c < R)
    return PotentialSpec(q, R, sing)


def piecewise_polynomial(R, pieces, singular_points=()):
    """q(r) = sum_i c_i r^i on each [a, b]; zero outside every piece."""
    parsed = []
    for p in pieces:
        a, b = float(p["a"]), float(p["b"])
        if not b > a:
            raise ValueError(f"piece needs a < b, got [{a}, {b}]")
        # np.polyval wants the highest power first
        parsed.append((a, b, np.asarray(p["poly_coeffs"], dtype=float)[::-1]))

    def q(r):
        r = np.asarray(r, dtype=float)
        out = np.zeros(r.shape)
        for a, b, c in parsed:
            mask = (r >= a) & (r <= b)
            out[mask] = np.polyval(c, r[mask])
        return out

    ends = {e for a, b, _ in parsed for e in (a, b) if 0.0 < e < R}
    sing = tuple(sorted(set(float(s) for s in singular_points) | ends))
    return PotentialSpec(q, float(R), sing)


def load_potential_file(path) -> PotentialSpec:
    """Read {"R": .., "singular_points": [..], "pieces": [{"a", "b", "poly_coeffs"}]}.

    ``poly_coeffs`` are in ascending powers of r.
    """
    data = json.loads(Path(path).read_text())
    return piecewise_polynomial(data["R"], data["pieces"], data.get("singular_points", ()))
