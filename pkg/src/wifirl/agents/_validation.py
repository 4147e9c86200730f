from __future__ import annotations

import numpy as np
from sklearn.utils.validation import check_array

from ..env import N_BACKOFF, N_CW, STATE_SHAPE


def check_states(X) -> np.ndarray:
    """Validate an ``(n, 5)`` array of observation tuples and return state indices.

    Columns are ``(n_t, c_w, b_fs, r_p, b_l)`` with the percentage columns in
    steps of 10. A 1-D array of already-encoded indices is also accepted.
    """
    X = np.asarray(X)
    if X.ndim == 1:
        idx = check_array(X.reshape(-1, 1), dtype=np.int64, ensure_2d=True).ravel()
        if idx.size and (idx.min() < 0 or idx.max() >= int(np.prod(STATE_SHAPE))):
            raise ValueError("state index out of range")
        return idx
    X = check_array(X, dtype=np.int64)
    if X.shape[1] != 5:
        raise ValueError(f"expected 5 state columns, got {X.shape[1]}")
    n_t, c_w, b_fs, r_p, b_l = X.T
    bad = (
        (n_t % 10 != 0) | (n_t < 10) | (n_t > 100)
        | (c_w < 0) | (c_w >= N_CW)
        | (b_fs < 0) | (b_fs >= N_BACKOFF)
        | ((r_p != 0) & (r_p != 1))
        | (b_l % 10 != 0) | (b_l < 10) | (b_l > 100)
    )
    if bad.any():
        raise ValueError(f"invalid state row(s): {np.flatnonzero(bad)[:5].tolist()}")
    digits = np.stack([n_t // 10 - 1, c_w, b_fs, r_p, b_l // 10 - 1], axis=1)
    return np.ravel_multi_index(tuple(digits.T), STATE_SHAPE)
