"""例外と警告の定義。CLIは例外クラスから終了コードを決める。"""

from __future__ import annotations

from typing import Optional


class BoseGasError(Exception):
    """本パッケージの例外の基底クラス。"""


class DomainError(BoseGasError, ValueError):
    """入力が定義域外（n=0 など）。"""


class CapacityError(DomainError):
    """設定された上限（Matsubara の N 上限など）を超えた。"""

    def __init__(self, message: str, cap: int):
        super().__init__(message)
        self.cap = cap


class NumericError(BoseGasError, ArithmeticError):
    """途中結果が有限でなくなった。index には失敗した添字や項番号が入る。"""

    def __init__(self, message: str, index: Optional[int] = None):
        super().__init__(message)
        self.index = index


class LandsbergOverflowError(NumericError, OverflowError):
    def __init__(self, index: int, n: int, q1: float):
        super().__init__(
            f"Landsberg 漸化式が Z_{index} でオーバーフローしました (n={n}, q1={q1:.12g})。"
            "park_kim バックエンドを使用してください。",
            index=index,
        )
        self.n = n
        self.q1 = q1


class SearchError(BoseGasError):
    """探索区間内に内部極大が見つからない。"""


class NumericWarning(RuntimeWarning):
    """有限差分の桁落ちなど、結果は返すが精度が疑わしい場合。"""
