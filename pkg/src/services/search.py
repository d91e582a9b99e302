from __future__ import annotations

import logging
import math
from typing import Callable, Tuple

logger = logging.getLogger(__name__)

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0  # 1/φ
INV_PHI_SQUARE = (3.0 - math.sqrt(5.0)) / 2.0  # 1/φ²


def golden_section_max(f: Callable[[float], float], a: float, b: float, tol: float = 1e-6) -> Tuple[float, float]:
    """黄金分割法で [a, b] 内の極大を探し (x, f(x)) を返す。

    区間内で f が単峰であることを前提とし、区間幅が tol 未満になるまで縮める。
    """
    a, b = min(a, b), max(a, b)
    h = b - a
    if h <= tol:
        x = 0.5 * (a + b)
        return x, f(x)

    # 必要な反復回数
    steps = int(math.ceil(math.log(tol / h) / math.log(INV_PHI)))

    c = a + INV_PHI_SQUARE * h
    d = a + INV_PHI * h
    yc = f(c)
    yd = f(d)
    for _ in range(steps - 1):
        if yc > yd:
            b = d
            d, yd = c, yc
            h = INV_PHI * h
            c = a + INV_PHI_SQUARE * h
            yc = f(c)
        else:
            a = c
            c, yc = d, yd
            h = INV_PHI * h
            d = a + INV_PHI * h
            yd = f(d)

    if yc > yd:
        b = d
    else:
        a = c
    logger.debug("golden section: %d 回, 区間 [%.9f, %.9f]", steps, a, b)
    x = 0.5 * (a + b)
    return x, f(x)
