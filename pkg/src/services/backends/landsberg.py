"""Landsberg 漸化式。Z, Z′, Z″ をそのまま浮動小数点で積み上げる。

Z_N   = (Q₁/N) Σ_{l=1}^{N} Z_{N-l} / l^{3/2}
Z′_N  = (1/N)  Σ_{l=1}^{N} (Q₁ Z′_{N-l} + Z_{N-l}) / l^{3/2}
Z″_N  = (1/N)  Σ_{l=1}^{N} (Q₁ Z″_{N-l} + 2 Z′_{N-l}) / l^{3/2}
"""

from __future__ import annotations

import logging
import math

import numpy as np

from errors import DomainError, LandsbergOverflowError, NumericError
from models import BackendId, ZEval, as_q1

logger = logging.getLogger(__name__)


def landsberg_arrays(n: int, q1) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Z₀…Z_N, Z′, Z″ の配列。最初に有限でなくなった添字で LandsbergOverflowError。"""
    q = as_q1(q1)
    if n < 0:
        raise DomainError(f"n は 0 以上が必要です: n={n}")
    z = np.zeros(n + 1)
    zp = np.zeros(n + 1)
    zpp = np.zeros(n + 1)
    z[0] = 1.0
    inv_l32 = np.arange(1, n + 1, dtype=float) ** -1.5

    with np.errstate(over="ignore", invalid="ignore"):
        for m in range(1, n + 1):
            w = inv_l32[:m]
            # 添字 m-1, m-2, …, 0 を l = 1…m に対応させる
            z_prev = z[m - 1 :: -1]
            zp_prev = zp[m - 1 :: -1]
            zpp_prev = zpp[m - 1 :: -1]
            z[m] = q / m * np.dot(w, z_prev)
            zp[m] = (q * np.dot(w, zp_prev) + np.dot(w, z_prev)) / m
            zpp[m] = (q * np.dot(w, zpp_prev) + 2.0 * np.dot(w, zp_prev)) / m
            if not (math.isfinite(z[m]) and math.isfinite(zp[m]) and math.isfinite(zpp[m])):
                logger.debug("Landsberg: 添字 %d で非有限値 (n=%d, q1=%.6g)", m, n, q)
                raise LandsbergOverflowError(index=m, n=n, q1=q)
            if z[m] <= 0.0:
                raise NumericError(f"Landsberg: Z_{m} がアンダーフローしました (q1={q:.12g})", index=m)
    return z, zp, zpp


def eval_landsberg(n: int, q1) -> ZEval:
    q = as_q1(q1)
    if n < 1:
        raise DomainError(f"n は 1 以上が必要です: n={n}")
    z, zp, zpp = landsberg_arrays(n, q)
    return ZEval(
        n=n,
        q1=q,
        log_z=math.log(z[n]),
        ratio1=float(zp[n] / z[n]),
        ratio2=float(zpp[n] / z[n]),
        backend_id=BackendId.LANDSBERG,
    )
