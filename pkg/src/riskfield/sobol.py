"""Sobol low-discrepancy sequence for up to 8 dimensions.

Gray-code construction over 32-bit direction integers. The direction
numbers are the standard Joe-Kuo initialization (primitive polynomial
degree s, coefficient word a, initial odd integers m_1..m_s) for
dimensions 2..8; dimension 1 is the van der Corput sequence in base 2.
Index 0 (the all-zeros point) is skipped, so the first point of the
one-dimensional sequence is 0.5.
"""

from __future__ import annotations

import numpy as np

from .errors import InvalidParametersError, UnsupportedDimensionError

N_BITS = 32
_SCALE = float(2**N_BITS)

# dimension index (1-based) -> (s, a, (m_1..m_s))
_DIRECTIONS = {
    2: (1, 0, (1,)),
    3: (2, 1, (1, 3)),
    4: (3, 1, (1, 3, 1)),
    5: (3, 2, (1, 1, 1)),
    6: (4, 1, (1, 1, 3, 3)),
    7: (4, 4, (1, 3, 5, 13)),
    8: (5, 2, (1, 1, 5, 5, 17)),
}

MAX_DIMENSION = 8


def _direction_integers(dim_index: int) -> np.ndarray:
    """Direction numbers v_1..v_NBITS as integers scaled by 2^N_BITS."""
    v = np.zeros(N_BITS, dtype=np.uint64)
    if dim_index == 1:
        for j in range(N_BITS):
            v[j] = np.uint64(1) << np.uint64(N_BITS - 1 - j)
        return v
    s, a, m_init = _DIRECTIONS[dim_index]
    m = list(m_init)
    for j in range(s, N_BITS):
        # m_j = 2 a_1 m_{j-1} xor 4 a_2 m_{j-2} ... xor 2^s m_{j-s} xor m_{j-s}
        new = m[j - s] ^ (m[j - s] << s)
        for k in range(1, s):
            if (a >> (s - 1 - k)) & 1:
                new ^= m[j - k] << k
        m.append(new)
    for j in range(N_BITS):
        v[j] = np.uint64(m[j]) << np.uint64(N_BITS - 1 - j)
    return v


def sobol_points(dimension: int, count: int) -> np.ndarray:
    """First ``count`` Sobol points in [0, 1)^dimension, index 0 skipped.

    Deterministic; supports dimensions 1 through 8.
    """
    if not 1 <= dimension <= MAX_DIMENSION:
        raise UnsupportedDimensionError(
            f"direction numbers are shipped for 1..{MAX_DIMENSION} dimensions, "
            f"got {dimension}"
        )
    if count < 1 or count >= 2**N_BITS - 1:
        raise InvalidParametersError(f"count must be in [1, 2^{N_BITS}-1), got {count}")
    directions = np.stack([_direction_integers(d + 1) for d in range(dimension)])
    index = np.arange(1, count + 1, dtype=np.uint64)
    gray = index ^ (index >> np.uint64(1))
    acc = np.zeros((count, dimension), dtype=np.uint64)
    for j in range(N_BITS):
        hit = ((gray >> np.uint64(j)) & np.uint64(1)).astype(bool)
        if hit.any():
            acc[hit] ^= directions[:, j]
    return acc.astype(np.float64) / _SCALE


def scale_to_box(unit_points: np.ndarray, box: np.ndarray) -> np.ndarray:
    """Map points from [0, 1)^D onto the factor box."""
    u = np.atleast_2d(np.asarray(unit_points, dtype=float))
    b = np.atleast_2d(np.asarray(box, dtype=float))
    if u.shape[1] != b.shape[0]:
        raise InvalidParametersError(
            f"points have dimension {u.shape[1]}, box has {b.shape[0]}"
        )
    return b[:, 0] + u * (b[:, 1] - b[:, 0])
