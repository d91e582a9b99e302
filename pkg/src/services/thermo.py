"""比熱・臨界点・物理単位・凝縮体エントロピー。

独立変数は ρΛ³ = N/Q₁。Q₁ は常に併記する。
"""

from __future__ import annotations

import logging
import math
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Sequence, Tuple

import numpy as np
from scipy.integrate import quad
from scipy.special import gammaln, logsumexp, zeta

from errors import DomainError, NumericError, NumericWarning, SearchError
from models import (
    AUTO_POLICY,
    HBAR,
    PLANCK_H,
    BOLTZMANN_K,
    BackendPolicy,
    CondensateEntropy,
    CriticalPoint,
    GridSpec,
    HeatCurve,
    HeatSample,
    PhysicalParams,
    Q1Value,
    ZEval,
    as_q1,
)
from services.backends import evaluate, select_backend
from services.combinatorics import cycle_type_count, iter_cycle_types
from services.search import golden_section_max

logger = logging.getLogger(__name__)

# N → ∞ の参照値
LIMIT_RHO_LAMBDA3_C = float(zeta(1.5))  # 2.612…
LIMIT_C_MAX_OVER_NKB = 1.926

DEFAULT_BRACKET = (0.5, 3.5)
DEFAULT_COARSE_POINTS = 200
DEFAULT_SEARCH_TOLERANCE = 1e-6
CANCELLATION_REL_TOL = 1e-6


def _check_n(n: int) -> int:
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise DomainError(f"n は正の整数が必要です: {n!r}")
    return int(n)


def _map(fn: Callable, items: Sequence, workers: int) -> List:
    # executor.map は入力順に結果を返す
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(fn, items))


# ---------------------------------------------------------------------------
# 比熱
# ---------------------------------------------------------------------------


def specific_heat_from_eval(z: ZEval) -> float:
    """C_N/(N k_B) = [(9/4) Q₁² (Z″/Z − (Z′/Z)²) + (15/4) Q₁ Z′/Z] / N"""
    q = z.q1
    value = (2.25 * q * q * (z.ratio2 - z.ratio1 * z.ratio1) + 3.75 * q * z.ratio1) / z.n
    if not (math.isfinite(value) and value > 0.0):
        raise NumericError(f"比熱が正の有限値になりません: {value} (n={z.n}, q1={q:.12g}, {z.backend_id.value})")
    return value


def specific_heat(n: int, q1, policy: BackendPolicy = AUTO_POLICY) -> float:
    n = _check_n(n)
    return specific_heat_from_eval(evaluate(n, as_q1(q1), policy))


def specific_heat_beta_oracle(
    n: int,
    q1,
    rel_step: float = 1e-4,
    policy: BackendPolicy = AUTO_POLICY,
) -> float:
    """β 空間の中心差分による C_N/(N k_B) = β² ∂²ln Z_N/∂β² / N。

    A = Q₁β^{3/2} を固定し（質量と体積を固定して温度を動かすのと同じ）、β₀ = 1 で評価する。
    1段の Richardson 外挿を行い、h/4 の差分で収束が単調でなければ NumericWarning を出す。
    """
    n = _check_n(n)
    q = as_q1(q1)
    if not (1e-7 <= rel_step <= 1e-2):
        raise DomainError(f"rel_step は [1e-7, 1e-2] の範囲で指定してください: {rel_step}")
    # 差分の途中でバックエンドが切り替わらないよう固定する
    backend = select_backend(n, q, policy)
    amplitude = q

    def log_z(beta: float) -> float:
        return evaluate(n, amplitude * beta**-1.5, backend).log_z

    f0 = log_z(1.0)

    def second_difference(h: float) -> float:
        return (log_z(1.0 + h) - 2.0 * f0 + log_z(1.0 - h)) / (h * h)

    h = rel_step
    d1 = second_difference(h)
    d2 = second_difference(h / 2.0)
    d4 = second_difference(h / 4.0)
    extrapolated = (4.0 * d2 - d1) / 3.0

    coarse_gap = abs(d1 - d2)
    fine_gap = abs(d2 - d4)
    # 細かい側の差が大きく、かつ 1e-6 の相対精度を脅かす場合だけ警告する
    if fine_gap > coarse_gap and fine_gap > CANCELLATION_REL_TOL * abs(extrapolated):
        warnings.warn(
            f"β 差分が桁落ちしています (n={n}, q1={q:.6g}, rel_step={rel_step:g}): "
            f"|D(h)-D(h/2)|={coarse_gap:.3e}, |D(h/2)-D(h/4)|={fine_gap:.3e}",
            NumericWarning,
            stacklevel=2,
        )
    return extrapolated / n


# ---------------------------------------------------------------------------
# 曲線と臨界点
# ---------------------------------------------------------------------------


def _sample(n: int, rho: float, policy: BackendPolicy) -> HeatSample:
    q = n / rho
    z = evaluate(n, q, policy)
    return HeatSample(q1=q, rho_lambda3=float(rho), c_over_nkb=specific_heat_from_eval(z), backend_id=z.backend_id)


def heat_curve(n: int, grid: GridSpec, policy: BackendPolicy = AUTO_POLICY, workers: int = 1) -> HeatCurve:
    """グリッドの各 ρΛ³ で比熱を計算する。サンプルは ρΛ³ の昇順。"""
    n = _check_n(n)
    rhos = [float(x) for x in grid.values()]
    t0 = time.time()
    samples = _map(lambda rho: _sample(n, rho, policy), rhos, workers)
    logger.debug("heat_curve: n=%d, %d点, %.2fs", n, len(samples), time.time() - t0)
    return HeatCurve(n=n, samples=tuple(samples))


def critical_point(
    n: int,
    tolerance: float = DEFAULT_SEARCH_TOLERANCE,
    bracket: Tuple[float, float] = DEFAULT_BRACKET,
    coarse_points: int = DEFAULT_COARSE_POINTS,
    policy: BackendPolicy = AUTO_POLICY,
    workers: int = 1,
) -> CriticalPoint:
    """比熱曲線の極大（λ 転移の位置）を探す。

    ρΛ³ の粗い走査で極大の近傍を決め、隣接格子点の間を黄金分割法で詰める。
    """
    n = _check_n(n)
    if n == 1:
        raise DomainError("N=1 では比熱が 1.5 で一定のため極大がありません (n ≥ 2 を指定してください)")
    lo, hi = bracket
    if not (0.0 < lo < hi) or coarse_points < 3 or tolerance <= 0.0:
        raise DomainError(f"探索設定が不正です: bracket={bracket}, points={coarse_points}, tol={tolerance}")

    def heat(rho: float) -> float:
        return specific_heat(n, n / rho, policy)

    t0 = time.time()
    grid = np.linspace(lo, hi, coarse_points)
    values = np.array(_map(heat, [float(x) for x in grid], workers))
    best = int(np.argmax(values))
    if best == 0 or best == coarse_points - 1 or float(values.max() - values.min()) <= 1e-12:
        raise SearchError(
            f"n={n}: ρΛ³ ∈ [{lo}, {hi}] に内部極大が見つかりません "
            f"(最大は ρΛ³={grid[best]:.6g})"
        )
    logger.debug("critical_point: n=%d 粗い走査の極大 ρΛ³≈%.6f (%.2fs)", n, grid[best], time.time() - t0)

    rho_c, c_max = golden_section_max(heat, float(grid[best - 1]), float(grid[best + 1]), tolerance)
    point = CriticalPoint(
        n=n,
        rho_lambda3_c=rho_c,
        c_max_over_nkb=c_max,
        q1_c=n / rho_c,
        search_tolerance=tolerance,
    )
    logger.info("critical_point: n=%d, ρΛ_c³=%.6f, C_max/Nk=%.6f (%.2fs)", n, rho_c, c_max, time.time() - t0)
    return point


# ---------------------------------------------------------------------------
# 物理単位
# ---------------------------------------------------------------------------


def thermal_wavelength_at(beta: float, mass: float) -> float:
    """Λ = (2πħ²β/m)^{1/2}"""
    return math.sqrt(2.0 * math.pi * HBAR * HBAR * beta / mass)


def thermal_wavelength(p: PhysicalParams) -> float:
    """熱的ド・ブロイ波長 Λ = h/√(2π m k_B T) [m]"""
    return PLANCK_H / math.sqrt(2.0 * math.pi * p.mass * BOLTZMANN_K * p.temperature)


def q1_from_physical(p: PhysicalParams) -> Q1Value:
    return Q1Value(p.volume / thermal_wavelength(p) ** 3)


def free_propagator(displacement: Sequence[float], beta_contour: float, p: PhysicalParams) -> float:
    """相互作用のない拡散方程式の解 (m/2πħ²β)^{3/2} exp(−m|Δr|²/2ħ²β) [1/m³]"""
    if not (beta_contour > 0.0 and math.isfinite(beta_contour)):
        raise DomainError(f"beta_contour は正の有限値が必要です: {beta_contour}")
    dr = np.asarray(displacement, dtype=float)
    if dr.shape != (3,):
        raise DomainError(f"変位は3成分のベクトルが必要です: shape={dr.shape}")
    r2 = float(np.dot(dr, dr))
    scale = 2.0 * HBAR * HBAR * beta_contour / p.mass
    return (math.pi * scale) ** -1.5 * math.exp(-r2 / scale)


def propagator_normalization(beta_contour: float, p: PhysicalParams) -> float:
    """全空間での伝搬関数の積分（動径方向の数値積分）。1 になるはず。"""
    lam = thermal_wavelength_at(beta_contour, p.mass)

    def radial(u: float) -> float:
        # r = Λu と置換
        return 4.0 * math.pi * u * u * lam**3 * free_propagator((lam * u, 0.0, 0.0), beta_contour, p)

    value, _ = quad(radial, 0.0, np.inf, epsabs=1e-14, epsrel=1e-12, limit=200)
    return value


def ring_merging_log_q(n: int, p: PhysicalParams) -> float:
    """ln Q_N を Σ_j c̃_j ∏_k Q₁(kβ)^{g(k)} の形で計算する。

    Q₁(kβ) は長さ kβ の輪の熱的波長から直接求めるので、k^{-3/2} の代入を使わない。
    Matsubara 形式 ln(N! Z_N) と一致するはず。
    """
    n = _check_n(n)
    beta = p.beta
    log_q1_at = [0.0] + [math.log(p.volume / thermal_wavelength_at(k * beta, p.mass) ** 3) for k in range(1, n + 1)]
    terms = []
    for ct in iter_cycle_types(n):
        acc = math.log(cycle_type_count(ct))
        for k, g in ct.parts:
            acc += g * log_q1_at[k]
        terms.append(acc)
    return float(logsumexp(terms))


# ---------------------------------------------------------------------------
# エントロピー（階乗項は落とす）
# ---------------------------------------------------------------------------


def bec_condensate_entropy(n: int, q1) -> CondensateEntropy:
    """完全凝縮（N 個の輪が1つに結合）の配置エントロピー S_c = −(3/2) ln N + ln Q₁。"""
    n = _check_n(n)
    q = as_q1(q1)
    # Q_N = Q₁(Nβ) = N^{-3/2} Q₁
    perfect = q / n**1.5
    return CondensateEntropy(n=n, q1=q, s_c=math.log(perfect), perfect_bec_q=perfect)


def classical_free_energy(n: int, q1) -> float:
    """βF = −N ln Q₁（交換なし）。"""
    return -_check_n(n) * math.log(as_q1(q1))


def configurational_entropy(n: int, q1, policy: BackendPolicy = AUTO_POLICY) -> float:
    """交換を含む S_c/k_B = N ln Q_N。Q_N = N! Z_N。"""
    n = _check_n(n)
    z = evaluate(n, as_q1(q1), policy)
    return n * (z.log_z + float(gammaln(n + 1.0)))
