from __future__ import annotations

import math

import numpy as np

from nsdde.errors import InvalidRadiusError


# Points whose norm exceeds r by less than this relative slack are left alone,
# so projected points are fixed points of the projection.
PROJECTION_SLACK = 1e-12


def truncate_point(x: np.ndarray, r: float) -> np.ndarray:
    """Radial projection (|x| ∧ r)·x/|x| along the last axis, with 0 ↦ 0."""
    if not r > 0:
        raise InvalidRadiusError(f"truncation radius must be positive, got {r}")
    x = np.asarray(x, dtype=float)
    if math.isinf(r):
        return x
    norm = np.linalg.norm(x, axis=-1, keepdims=True)
    outside = norm > r * (1.0 + PROJECTION_SLACK)
    safe_norm = np.where(outside, norm, 1.0)
    return np.where(outside, (x * r) / safe_norm, x)
