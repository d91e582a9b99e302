"""バックエンドの選択と呼び出し。"""

from __future__ import annotations

import logging
import math
import sys
from typing import Callable, Dict

from scipy.special import gammaln

from app_settings import env_int
from errors import CapacityError, DomainError
from models import AUTO_POLICY, BackendId, BackendPolicy, ZEval, as_q1, parse_policy
from services import combinatorics
from services.backends.landsberg import eval_landsberg
from services.backends.matsubara import eval_matsubara
from services.backends.park_kim import eval_park_kim

logger = logging.getLogger(__name__)

MATSUBARA_AUTO_MAX = env_int("BEC_MATSUBARA_AUTO_MAX", 60)
LANDSBERG_AUTO_MAX = env_int("BEC_LANDSBERG_AUTO_MAX", 1000)
LOG_FLOAT_MAX = math.log(sys.float_info.max)

_EVALUATORS: Dict[BackendId, Callable[[int, float], ZEval]] = {
    BackendId.MATSUBARA: eval_matsubara,
    BackendId.LANDSBERG: eval_landsberg,
    BackendId.PARK_KIM: eval_park_kim,
}


def landsberg_log_bound(n: int, q1) -> float:
    """max_{i≤n} ln Z_i の上界。

    k^{-3/2} ≤ 1 を落とすと Z_i ≤ Σ_σ Q₁^{cycles(σ)}/i! = Γ(Q₁+i)/(Γ(Q₁) i!) となり、
    この値は i について単調なので i = 0 か i = n で最大になる。
    """
    q = as_q1(q1)
    bound = float(gammaln(q + n) - gammaln(q) - gammaln(n + 1.0))
    return max(bound, 0.0)


def select_backend(n: int, q1, policy: BackendPolicy = AUTO_POLICY, cap: int | None = None) -> BackendId:
    q = as_q1(q1)
    if n < 1:
        raise DomainError(f"n は 1 以上が必要です: n={n}")
    cap = combinatorics.MATSUBARA_CAP if cap is None else cap
    choice = parse_policy(policy)

    if choice != AUTO_POLICY:
        if choice == BackendId.MATSUBARA and n > cap:
            raise CapacityError(f"n={n} は Matsubara の上限 {cap} を超えています", cap=cap)
        return choice

    if n <= min(MATSUBARA_AUTO_MAX, cap):
        return BackendId.MATSUBARA
    if n <= LANDSBERG_AUTO_MAX:
        # Z″ ≈ Z·(N/Q₁)² の分だけ余裕を見る
        headroom = 2.0 * math.log(max(n / q, 1.0)) + 1.0
        if landsberg_log_bound(n, q) + headroom < LOG_FLOAT_MAX:
            return BackendId.LANDSBERG
    return BackendId.PARK_KIM


def evaluate(n: int, q1, policy: BackendPolicy = AUTO_POLICY) -> ZEval:
    """select_backend で選んだ方法で ZEval を返す。thermo と cli の入口。"""
    q = as_q1(q1)
    backend = select_backend(n, q, policy)
    logger.debug("evaluate: n=%d, q1=%.6g -> %s", n, q, backend.value)
    return _EVALUATORS[backend](n, q)
