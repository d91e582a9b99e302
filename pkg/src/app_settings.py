import json
import logging
import os
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

from dotenv import load_dotenv

# .envファイルを読み込む
load_dotenv()

logger = logging.getLogger(__name__)


def env_int(name: str, default: int) -> int:
    raw = os.getenv(name, "").strip()
    if not raw:
        return default
    try:
        return max(0, int(raw))
    except ValueError:
        logger.warning("%s が整数ではないため既定値を使用します: %s", name, raw)
        return default


class AppSettings:
    """CLI既定値を管理するクラス（JSON設定ファイル）"""

    def __init__(self, settings_file: str = ".bec_settings.json"):
        self.settings_path = Path(__file__).parent.parent / settings_file
        self.settings = self._load_settings()

    def _load_settings(self) -> Dict[str, Any]:
        """設定ファイルを読み込む"""
        if self.settings_path.exists():
            try:
                with open(self.settings_path, "r", encoding="utf-8") as f:
                    return json.load(f)
            except Exception as e:
                logger.error(f"設定ファイルの読み込みエラー: {e}")
                return {}
        return {}

    def _save_settings(self):
        """設定をファイルに保存"""
        try:
            with open(self.settings_path, "w", encoding="utf-8") as f:
                json.dump(self.settings, f, ensure_ascii=False, indent=2)
            logger.debug(f"設定を保存しました: {self.settings_path}")
        except Exception as e:
            logger.error(f"設定ファイルの保存エラー: {e}")

    def get(self, key: str, default: Any = None) -> Any:
        """設定値を取得"""
        return self.settings.get(key, default)

    def set(self, key: str, value: Any):
        """設定値を保存"""
        self.settings[key] = value
        self._save_settings()

    # --- 曲線（heat curve）の既定グリッド ---
    def get_curve_grid(self) -> Tuple[float, float, int, str]:
        """(min, max, points, spacing) を返す。既定は ρΛ³ ∈ [0.5, 3.5], 300点, 線形。"""
        grid = self.get("curve_grid", {}) or {}
        spacing = str(grid.get("spacing", "linear"))
        if spacing not in ("linear", "log"):
            logger.warning("curve_grid.spacing が不正なため linear を使用します: %s", spacing)
            spacing = "linear"
        return (
            float(grid.get("min", 0.5)),
            float(grid.get("max", 3.5)),
            int(grid.get("points", 300)),
            spacing,
        )

    def get_backend_policy(self) -> str:
        return str(self.get("backend_policy", "auto"))

    def set_backend_policy(self, policy: str):
        self.set("backend_policy", policy)

    def get_workers(self) -> int:
        # 1 = 逐次実行
        return max(1, int(self.get("workers", 1)))

    def set_workers(self, workers: int):
        self.set("workers", int(max(1, workers)))

    def get_equivalence_tolerance(self) -> float:
        return float(self.get("equivalence_tolerance", 1e-9))

    # --- 臨界点探索 ---
    def get_search_tolerance(self) -> float:
        return float(self.get("search_tolerance", 1e-6))

    def get_search_bracket(self) -> Tuple[float, float]:
        lo, hi = self.get("search_bracket", [0.5, 3.5])
        return float(lo), float(hi)

    def get_coarse_points(self) -> int:
        return int(self.get("coarse_points", 200))

    def get_log_to_file(self) -> bool:
        """ログファイル出力の有効/無効を取得"""
        return bool(self.get("log_to_file", False))

    def get_log_dir(self) -> Optional[Path]:
        raw = self.get("log_dir")
        if raw:
            return Path(raw)
        return Path(__file__).parent.parent / "logs"
