"""Park–Kim の比による漸化式。

Z_N = ∏ f_n とし、f_N = (Q₁/N) Σ_{l=1}^{N} l^{-3/2} Z_{N-l}/Z_{N-1} を
対数累積和 log_prefix の差の指数として計算する。Z_N そのものは保持しない。
"""

from __future__ import annotations

import logging
import math
import time
from functools import lru_cache

import numpy as np

from errors import DomainError, NumericError
from models import BackendId, RatioRecursionState, ZEval, as_q1

logger = logging.getLogger(__name__)


def park_kim_state(n: int, q1) -> RatioRecursionState:
    q = as_q1(q1)
    if n < 1:
        raise DomainError(f"n は 1 以上が必要です: n={n}")
    log_prefix = np.zeros(n + 1)
    f = np.empty(n)
    inv_l32 = np.arange(1, n + 1, dtype=float) ** -1.5
    buf = np.empty(n)

    t0 = time.time()
    with np.errstate(over="ignore", under="ignore", invalid="ignore"):
        for m in range(1, n + 1):
            window = buf[:m]
            # Z_{m-l}/Z_{m-1} = exp(log_prefix[m-l] - log_prefix[m-1]), l = 1…m
            np.subtract(log_prefix[m - 1 :: -1], log_prefix[m - 1], out=window)
            np.exp(window, out=window)
            fm = q / m * float(np.dot(inv_l32[:m], window))
            if not (math.isfinite(fm) and fm > 0.0):
                raise NumericError(f"Park–Kim: f_{m} が正の有限値ではありません (n={n}, q1={q:.12g})", index=m)
            f[m - 1] = fm
            log_prefix[m] = log_prefix[m - 1] + math.log(fm)
    if n >= 5000:
        logger.debug("Park–Kim: n=%d, q1=%.6g を %.2fs で計算", n, q, time.time() - t0)
    f.setflags(write=False)
    log_prefix.setflags(write=False)
    return RatioRecursionState(f=f, log_prefix=log_prefix)


@lru_cache(maxsize=4)
def _pair_weights(n: int) -> np.ndarray:
    """w_t = Σ_{a+b=t} a^{-5/2} b^{-5/2}（t = 2…n）。Q₁ に依存しないのでキャッシュする。"""
    inv_l52 = np.arange(1, n, dtype=float) ** -2.5
    weights = np.convolve(inv_l52, inv_l52)[: n - 1]
    weights.setflags(write=False)
    return weights


def eval_park_kim(n: int, q1) -> ZEval:
    q = as_q1(q1)
    state = park_kim_state(n, q)
    lp = state.log_prefix
    log_z = float(lp[n])
    inv_l52 = np.arange(1, n + 1, dtype=float) ** -2.5

    with np.errstate(under="ignore"):
        # Z′/Z = Σ_{k=1}^{N} k^{-5/2} Z_{N-k}/Z_N
        ratio1 = float(np.dot(inv_l52, np.exp(lp[n - 1 :: -1] - log_z)))
        if n == 1:
            ratio2 = 0.0
        else:
            # Z″/Z = Σ_{t=2}^{N} w_t Z_{N-t}/Z_N
            ratio2 = float(np.dot(_pair_weights(n), np.exp(lp[n - 2 :: -1] - log_z)))
    return ZEval(n=n, q1=q, log_z=log_z, ratio1=ratio1, ratio2=ratio2, backend_id=BackendId.PARK_KIM)
