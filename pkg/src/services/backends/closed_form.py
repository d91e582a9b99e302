"""2〜4粒子の閉じた式（Q₁(kβ) = k^{-3/2} Q₁(β) を代入済み）。汎用和の検算用。"""

from __future__ import annotations

from errors import DomainError
from models import as_q1


def _q1_at(k: int, q: float) -> float:
    # 輪の長さ kβ の1粒子分配関数
    return k**-1.5 * q


def closed_form_q(n: int, q1) -> float:
    """Q_N(β)。N! Z_N に等しい。"""
    q = as_q1(q1)
    if n == 2:
        return q**2 + _q1_at(2, q)
    if n == 3:
        return q**3 + 3.0 * q * _q1_at(2, q) + 2.0 * _q1_at(3, q)
    if n == 4:
        return (
            q**4
            + 6.0 * q**2 * _q1_at(2, q)
            + 3.0 * _q1_at(2, q) ** 2
            + 8.0 * q * _q1_at(3, q)
            + 6.0 * _q1_at(4, q)
        )
    raise DomainError(f"閉じた式は n = 2, 3, 4 のみ: n={n}")


def closed_form_z(n: int, q1) -> float:
    factorial = {2: 2.0, 3: 6.0, 4: 24.0}
    if n not in factorial:
        raise DomainError(f"閉じた式は n = 2, 3, 4 のみ: n={n}")
    return closed_form_q(n, q1) / factorial[n]
