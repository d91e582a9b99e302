"""ドメイン型。すべて不変（frozen）な値オブジェクトで、スレッド間で共有してよい。"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Tuple, Union

import numpy as np
import pandas as pd

from errors import DomainError, NumericError

# SI-2019 の定義値
PLANCK_H = 6.62607015e-34  # J·s
BOLTZMANN_K = 1.380649e-23  # J/K
HBAR = PLANCK_H / (2.0 * math.pi)


class BackendId(str, Enum):
    MATSUBARA = "matsubara"
    LANDSBERG = "landsberg"
    PARK_KIM = "park_kim"


AUTO_POLICY = "auto"
BackendPolicy = Union[str, BackendId]


def parse_policy(policy: BackendPolicy) -> Union[str, BackendId]:
    """"auto" かバックエンド名を受け付ける。"""
    if isinstance(policy, BackendId):
        return policy
    key = str(policy).strip().lower().replace("-", "_")
    if key == AUTO_POLICY:
        return AUTO_POLICY
    try:
        return BackendId(key)
    except ValueError:
        choices = ", ".join([AUTO_POLICY] + [b.value for b in BackendId])
        raise DomainError(f"不明なバックエンド指定: {policy} (選択肢: {choices})")


# ---------------------------------------------------------------------------
# combinatorics
# ---------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class CycleType:
    """整数分割1項。parts は (部分の大きさ k, 重複度 g(k)) を k の降順で並べたもの。"""

    parts: Tuple[Tuple[int, int], ...]
    n_total: int
    cardinality: int

    def __post_init__(self):
        if not self.parts:
            raise DomainError("CycleType の parts が空です")
        total = 0
        count = 0
        previous = None
        for k, g in self.parts:
            if k <= 0 or g <= 0:
                raise DomainError(f"部分の大きさと重複度は正の整数が必要です: k={k}, g={g}")
            if previous is not None and k >= previous:
                raise DomainError(f"parts は k の降順で重複なしにしてください: {self.parts}")
            previous = k
            total += k * g
            count += g
        if total != self.n_total:
            raise DomainError(f"Σ k·g(k) = {total} が n_total = {self.n_total} と一致しません")
        if count != self.cardinality:
            raise DomainError(f"Σ g(k) = {count} が cardinality = {self.cardinality} と一致しません")

    @classmethod
    def from_parts(cls, parts: Dict[int, int]) -> "CycleType":
        """{k: g(k)} から作る。"""
        ordered = tuple(sorted(((int(k), int(g)) for k, g in parts.items()), reverse=True))
        return cls(
            parts=ordered,
            n_total=sum(k * g for k, g in ordered),
            cardinality=sum(g for _, g in ordered),
        )

    @classmethod
    def _trusted(cls, parts: Tuple[Tuple[int, int], ...], n_total: int, cardinality: int) -> "CycleType":
        # 列挙器が生成した値は構成上不変条件を満たすので検証を省く
        obj = object.__new__(cls)
        object.__setattr__(obj, "parts", parts)
        object.__setattr__(obj, "n_total", n_total)
        object.__setattr__(obj, "cardinality", cardinality)
        return obj

    def as_dict(self) -> Dict[int, int]:
        return dict(self.parts)

    @property
    def part_sizes(self) -> Tuple[int, ...]:
        return tuple(k for k, _ in self.parts)

    @property
    def degeneracies(self) -> Tuple[int, ...]:
        return tuple(g for _, g in self.parts)


@dataclass(frozen=True, slots=True)
class MatsubaraCoefficient:
    cycle_count: int
    half_power_factor: float
    normalized_log: float

    @property
    def value(self) -> float:
        """c_j = cycle_count × half_power_factor（N ≤ 170 で有限）。"""
        return float(self.cycle_count) * self.half_power_factor


# ---------------------------------------------------------------------------
# backends
# ---------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class Q1Value:
    """無次元の1粒子分配関数 Q₁ = V/Λ³。"""

    value: float

    def __post_init__(self):
        if not (math.isfinite(self.value) and self.value > 0.0):
            raise DomainError(f"Q1 は正の有限値が必要です: {self.value}")


def as_q1(q1: Union[float, Q1Value]) -> float:
    if isinstance(q1, Q1Value):
        return q1.value
    return Q1Value(float(q1)).value


@dataclass(frozen=True, slots=True)
class ZEval:
    """ln Z_N と Q₁ 微分の比 Z′/Z, Z″/Z。3つのバックエンド共通の出力。"""

    n: int
    q1: float
    log_z: float
    ratio1: float
    ratio2: float
    backend_id: BackendId

    def __post_init__(self):
        if self.n < 1:
            raise DomainError(f"ZEval の n は 1 以上が必要です: n={self.n}")
        for name in ("log_z", "ratio1", "ratio2"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise NumericError(f"{self.backend_id.value}: {name} が有限ではありません (n={self.n}, q1={self.q1:.12g})")
        if self.ratio1 < 0.0 or self.ratio2 < 0.0:
            raise NumericError(f"{self.backend_id.value}: 比が負になりました (n={self.n}, q1={self.q1:.12g})")
        # Z″ = 0 となるのは N = 1 のときだけ
        if (self.ratio2 == 0.0) != (self.n == 1):
            raise NumericError(
                f"{self.backend_id.value}: Z″/Z = {self.ratio2!r} は n={self.n} と矛盾します (q1={self.q1:.12g})"
            )


@dataclass(frozen=True)
class RatioRecursionState:
    """Park–Kim 因子 f₁…f_N と対数累積和 log_prefix[i] = Σ_{k≤i} ln f_k。"""

    f: np.ndarray
    log_prefix: np.ndarray

    @property
    def n(self) -> int:
        return int(self.f.shape[0])


# ---------------------------------------------------------------------------
# thermo
# ---------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class PhysicalParams:
    """質量 [kg]、温度 [K]、体積 [m³]。"""

    mass: float
    temperature: float
    volume: float

    def __post_init__(self):
        for name in ("mass", "temperature", "volume"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0.0):
                raise DomainError(f"{name} は正の有限値が必要です: {value}")

    @property
    def beta(self) -> float:
        return 1.0 / (BOLTZMANN_K * self.temperature)


@dataclass(frozen=True, slots=True)
class GridSpec:
    rho_min: float
    rho_max: float
    count: int
    spacing: str = "linear"

    def __post_init__(self):
        if self.spacing not in ("linear", "log"):
            raise DomainError(f"spacing は linear か log です: {self.spacing}")
        if not (self.rho_min > 0.0 and math.isfinite(self.rho_max)):
            raise DomainError(f"ρΛ³ の範囲は正の有限値が必要です: [{self.rho_min}, {self.rho_max}]")
        if self.count == 1:
            if self.rho_min != self.rho_max:
                raise DomainError("1点グリッドは min = max のときだけ指定できます")
        elif self.count < 2 or not self.rho_min < self.rho_max:
            raise DomainError(
                f"グリッドは min < max かつ点数 ≥ 2 が必要です: "
                f"min={self.rho_min}, max={self.rho_max}, points={self.count}"
            )

    def values(self) -> np.ndarray:
        """ρΛ³ の昇順の格子点。"""
        if self.count == 1:
            return np.array([self.rho_min])
        if self.spacing == "log":
            return np.geomspace(self.rho_min, self.rho_max, self.count)
        return np.linspace(self.rho_min, self.rho_max, self.count)


@dataclass(frozen=True, slots=True)
class HeatSample:
    q1: float
    rho_lambda3: float
    c_over_nkb: float
    backend_id: BackendId


@dataclass(frozen=True)
class HeatCurve:
    n: int
    samples: Tuple[HeatSample, ...] = field(default_factory=tuple)

    def __post_init__(self):
        for s in self.samples:
            if not math.isclose(s.rho_lambda3 * s.q1, self.n, rel_tol=1e-12):
                raise DomainError(f"ρΛ³·q1 = n が成り立ちません: {s}")
        q = [s.q1 for s in self.samples]
        if len(q) > 1:
            increasing = all(a < b for a, b in zip(q, q[1:]))
            decreasing = all(a > b for a, b in zip(q, q[1:]))
            if not (increasing or decreasing):
                raise DomainError("サンプルは q1 について狭義単調である必要があります")

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "q1": [s.q1 for s in self.samples],
                "rho_lambda3": [s.rho_lambda3 for s in self.samples],
                "c_over_nkb": [s.c_over_nkb for s in self.samples],
                "backend": [s.backend_id.value for s in self.samples],
            },
            columns=["q1", "rho_lambda3", "c_over_nkb", "backend"],
        )

    def peak(self) -> HeatSample:
        return max(self.samples, key=lambda s: s.c_over_nkb)


@dataclass(frozen=True, slots=True)
class CriticalPoint:
    n: int
    rho_lambda3_c: float
    c_max_over_nkb: float
    q1_c: float
    search_tolerance: float

    def __post_init__(self):
        if not math.isclose(self.rho_lambda3_c * self.q1_c, self.n, rel_tol=1e-12):
            raise DomainError("ρΛ_c³·q1_c = n が成り立ちません")
        if self.c_max_over_nkb < 1.5:
            raise NumericError(f"n={self.n}: 極大値 {self.c_max_over_nkb} が古典値 1.5 を下回りました")


@dataclass(frozen=True, slots=True)
class CondensateEntropy:
    n: int
    q1: float
    s_c: float
    perfect_bec_q: float
