"""Group penalties on input-column norms and their thresholding operators."""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

FAMILIES = ("group-lasso", "group-mcp", "group-scad")
FAMILY_CODES = {"group-lasso": 0, "group-mcp": 1, "group-scad": 2}
DEFAULT_A = {"group-lasso": 0.0, "group-mcp": 3.0, "group-scad": 3.7}

_ALIASES = {"lasso": "group-lasso", "glasso": "group-lasso", "mcp": "group-mcp",
            "gmcp": "group-mcp", "scad": "group-scad", "gscad": "group-scad"}


@dataclass(frozen=True)
class PenaltySpec:
    family: str = "group-mcp"
    lam: float = 0.0
    a: float | None = None

    def __post_init__(self):
        family = _ALIASES.get(self.family, self.family)
        if family not in FAMILIES:
            raise ValueError(f"unknown penalty family {self.family!r}")
        object.__setattr__(self, "family", family)
        a = DEFAULT_A[family] if self.a is None else float(self.a)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "lam", float(self.lam))
        if not np.isfinite(self.lam) or self.lam < 0:
            raise ValueError(f"lambda must be finite and >= 0, got {self.lam}")
        if family == "group-scad" and not a > 2:
            raise ValueError(f"SCAD needs a > 2, got {a}")
        # the firm-thresholding factor a/(a-1) needs a > 1
        if family == "group-mcp" and not a > 1:
            raise ValueError(f"MCP needs a > 1, got {a}")

    @property
    def code(self) -> int:
        return FAMILY_CODES[self.family]

    def with_lambda(self, lam: float) -> "PenaltySpec":
        return replace(self, lam=lam)


def penalty_value(spec: PenaltySpec, t):
    """rho_lambda(t) for t >= 0; vectorised over array input."""
    t = np.asarray(t, dtype=np.float64)
    if np.any(t < 0):
        raise ValueError("penalty is applied to norms; t must be >= 0")
    lam, a = spec.lam, spec.a
    if spec.family == "group-lasso":
        out = lam * t
    elif spec.family == "group-mcp":
        out = np.where(t <= a * lam, lam * t - t * t / (2.0 * a), 0.5 * a * lam * lam)
    else:
        mid = -(t * t - 2.0 * a * lam * t + lam * lam) / (2.0 * (a - 1.0))
        out = np.where(t <= lam, lam * t,
                       np.where(t <= a * lam, mid, 0.5 * (a + 1.0) * lam * lam))
    return out if out.ndim else float(out)


def group_soft_threshold(z, lam: float) -> np.ndarray:
    """(1 - lam/||z||)_+ z, with the zero vector mapped to itself."""
    z = np.asarray(z, dtype=np.float64)
    r = np.sqrt(np.sum(z * z))
    if r == 0.0 or r <= lam:
        return np.zeros_like(z)
    return (1.0 - lam / r) * z


def shrink_factor(spec: PenaltySpec, r):
    """Scale s with prox(z) = s * z, given r = ||z||_2 (vectorised over r)."""
    r = np.asarray(r, dtype=np.float64)
    lam, a = spec.lam, spec.a
    with np.errstate(divide="ignore", invalid="ignore"):
        soft = np.where(r > lam, 1.0 - lam / r, 0.0)
        if spec.family == "group-lasso":
            s = soft
        elif spec.family == "group-mcp":
            s = np.where(r <= a * lam, a / (a - 1.0) * soft, 1.0)
        else:
            lam2 = a * lam / (a - 1.0)
            soft2 = np.where(r > lam2, 1.0 - lam2 / r, 0.0)
            s = np.where(r <= 2.0 * lam, soft,
                         np.where(r <= a * lam, (a - 1.0) / (a - 2.0) * soft2, 1.0))
    return np.where(r == 0.0, 0.0, s)


def prox(spec: PenaltySpec, z) -> np.ndarray:
    """Minimiser of 0.5||x - z||^2 + rho_lambda(||x||_2), colinear with z."""
    z = np.asarray(z, dtype=np.float64)
    if spec.lam == 0.0:
        return z.copy()
    r = np.sqrt(np.sum(z * z))
    return float(shrink_factor(spec, r)) * z


def prox_columns(spec: PenaltySpec, W: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Apply :func:`prox` to every column of ``W``; also returns the scales."""
    if spec.lam == 0.0:
        return W.copy(), np.ones(W.shape[1])
    r = np.sqrt(np.sum(W * W, axis=0))
    s = shrink_factor(spec, r)
    return W * s, s


def total_penalty(spec: PenaltySpec, W0: np.ndarray) -> float:
    if spec.lam == 0.0:
        return 0.0
    return float(np.sum(penalty_value(spec, np.sqrt(np.sum(W0 * W0, axis=0)))))
