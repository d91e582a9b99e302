"""Matsubara 和による Z_N とその Q₁ 微分。

Z_N = Σ_j (c_j/N!) Q₁^{l_j} を対数和（log-sum-exp）で評価する。
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import logsumexp

from errors import DomainError, NumericError
from models import BackendId, ZEval, as_q1
from services.combinatorics import coefficient_table


def eval_matsubara(n: int, q1, cap: int | None = None) -> ZEval:
    q = as_q1(q1)
    if n < 1:
        raise DomainError(f"n は 1 以上が必要です: n={n}")
    logs, cards = coefficient_table(n, cap)
    log_q = math.log(q)
    terms = logs + cards * log_q
    if not np.all(np.isfinite(terms)):
        bad = int(np.flatnonzero(~np.isfinite(terms))[0])
        raise NumericError(f"Matsubara 和の第 {bad} 項が有限ではありません (n={n}, q1={q:.12g})", index=bad)

    log_z = float(logsumexp(terms))
    # Σ c_j l_j Q^{l_j-1} / Z
    ratio1 = math.exp(float(logsumexp(terms, b=cards)) - log_q - log_z)
    if n == 1:
        ratio2 = 0.0
    else:
        # l_j = 1 の項は重み 0
        weights = cards * (cards - 1)
        ratio2 = math.exp(float(logsumexp(terms, b=weights)) - 2.0 * log_q - log_z)
    return ZEval(n=n, q1=q, log_z=log_z, ratio1=ratio1, ratio2=ratio2, backend_id=BackendId.MATSUBARA)
