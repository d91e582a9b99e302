"""整数分割（サイクル型）の列挙と Matsubara 係数。

c_j = N! / ∏_k k^{(5/2)g(k)} g(k)! を、厳密な整数部 N!/∏ k^{g} g! と
実数の半整数べき ∏ k^{-(3/2)g} に分けて保持する。
"""

from __future__ import annotations

import logging
import math
import time
from functools import lru_cache
from typing import Iterator, List, Tuple

import numpy as np
from scipy.special import gammaln

from app_settings import env_int
from errors import CapacityError, DomainError
from models import CycleType, MatsubaraCoefficient

logger = logging.getLogger(__name__)

# P(64) ≈ 174万項。これ以上は環境変数で明示的に引き上げる
MATSUBARA_CAP = env_int("BEC_MATSUBARA_CAP", 64)

Blocks = List[Tuple[int, int]]


def _check_n(n: int, cap: int) -> None:
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)):
        raise DomainError(f"n は整数が必要です: {n!r}")
    if n < 1:
        raise DomainError(f"n は 1 以上が必要です: n={n}")
    if n > cap:
        raise CapacityError(f"n={n} は整数分割の上限 {cap} を超えています (BEC_MATSUBARA_CAP)", cap=cap)


def _iter_blocks(n: int) -> Iterator[Blocks]:
    """降順の部分列を辞書式昇順に生成する（[1,1,1,1], [2,1,1], [2,2], [3,1], [4]）。

    blocks は (値, 重複度) の降順リストで、呼び出し側に渡した後に書き換えられる。
    """
    blocks: Blocks = [(1, n)]
    while True:
        yield blocks
        v, gv = blocks[-1]
        if gv >= 2:
            blocks.pop()
            rest = (gv - 1) * v
            target = v
        else:
            if len(blocks) == 1:
                return
            blocks.pop()
            target, gu = blocks.pop()
            rest = (gu - 1) * target + v
        # 最右の増やせる部分を +1 し、残りは 1 に崩す
        if blocks and blocks[-1][0] == target + 1:
            blocks[-1] = (target + 1, blocks[-1][1] + 1)
        else:
            blocks.append((target + 1, 1))
        if rest > 1:
            blocks.append((1, rest - 1))


def iter_cycle_types(n: int, cap: int | None = None) -> Iterator[CycleType]:
    """enumerate_cycle_types のストリーミング版。順序は同じ。"""
    _check_n(n, MATSUBARA_CAP if cap is None else cap)
    for blocks in _iter_blocks(int(n)):
        yield CycleType._trusted(tuple(blocks), int(n), sum(g for _, g in blocks))


def enumerate_cycle_types(n: int, cap: int | None = None) -> List[CycleType]:
    """n の整数分割をすべてサイクル型として返す。要素数は P(n)。"""
    return list(iter_cycle_types(n, cap))


@lru_cache(maxsize=None)
def _partition_numbers(limit: int) -> Tuple[int, ...]:
    counts = [1] + [0] * limit
    for part in range(1, limit + 1):
        for total in range(part, limit + 1):
            counts[total] += counts[total - part]
    return tuple(counts)


def partition_count(n: int) -> int:
    """P(n)（部分の大きさに関する動的計画法）。"""
    if n < 0:
        raise DomainError(f"n は 0 以上が必要です: n={n}")
    return _partition_numbers(int(n))[int(n)]


def cycle_type_count(ct: CycleType) -> int:
    """サイクル型 ct を持つ置換の個数 N!/∏ k^{g(k)} g(k)!（厳密な整数）。"""
    denominator = 1
    for k, g in ct.parts:
        denominator *= k**g * math.factorial(g)
    count, remainder = divmod(math.factorial(ct.n_total), denominator)
    # 置換の個数なので必ず割り切れる
    assert remainder == 0
    return count


def _log_coefficient(parts) -> float:
    """ln(c_j/N!) = -Σ g·(5/2)·ln k - Σ ln g!。"""
    acc = 0.0
    for k, g in parts:
        acc -= 2.5 * g * math.log(k) + math.lgamma(g + 1)
    return acc


def matsubara_coefficient(ct: CycleType) -> MatsubaraCoefficient:
    half_power = 1.0
    for k, g in ct.parts:
        half_power *= float(k) ** (-1.5 * g)
    return MatsubaraCoefficient(
        cycle_count=cycle_type_count(ct),
        half_power_factor=half_power,
        normalized_log=_log_coefficient(ct.parts),
    )


@lru_cache(maxsize=8)
def coefficient_table(n: int, cap: int | None = None) -> Tuple[np.ndarray, np.ndarray]:
    """列挙順の (ln(c_j/N!), l_j) 配列。eval_matsubara 用にキャッシュする。"""
    _check_n(n, MATSUBARA_CAP if cap is None else cap)
    size = partition_count(n)
    # ln k と ln g! を表で引く
    log_k = 2.5 * np.log(np.arange(1, n + 1, dtype=float))
    log_fact = gammaln(np.arange(1, n + 2, dtype=float))
    log_k_list = [0.0] + log_k.tolist()
    log_fact_list = log_fact.tolist()

    logs = np.empty(size, dtype=float)
    cards = np.empty(size, dtype=np.int64)
    t0 = time.time()
    for j, blocks in enumerate(_iter_blocks(n)):
        acc = 0.0
        card = 0
        for k, g in blocks:
            acc -= g * log_k_list[k] + log_fact_list[g]
            card += g
        logs[j] = acc
        cards[j] = card
    logs.setflags(write=False)
    cards.setflags(write=False)
    logger.debug("係数表を作成しました: n=%d, P(n)=%d, %.3fs", n, size, time.time() - t0)
    return logs, cards
