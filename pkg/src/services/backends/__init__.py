"""Z_N 評価バックエンド（Matsubara / Landsberg / Park–Kim）。"""

from .closed_form import closed_form_q, closed_form_z
from .landsberg import eval_landsberg, landsberg_arrays
from .matsubara import eval_matsubara
from .park_kim import eval_park_kim, park_kim_state
from .selection import (
    LANDSBERG_AUTO_MAX,
    MATSUBARA_AUTO_MAX,
    evaluate,
    landsberg_log_bound,
    select_backend,
)
