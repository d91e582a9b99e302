#!/usr/bin/env python3
"""
理想ボース気体のカノニカル熱力学を計算して CSV を出力する CLI

使用方法:
    python src/cli.py curve --n 100 --min 0.5 --max 3.5 --points 300
    python src/cli.py critical --n 1000
    python src/cli.py compare --n 60 --q1 30
    python src/cli.py physical --mass 1.443e-25 --temperature 1e-7 --volume 1e-15
    python src/cli.py partitions --n 6
    python src/cli.py table [--heavy]

終了コード: 0 成功 / 1 数値・容量・探索の失敗 / 2 使い方の誤り
"""

from __future__ import annotations

import argparse
import itertools
import logging
import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import pandas as pd

from app_settings import AppSettings
from errors import BoseGasError, CapacityError, DomainError, NumericError, SearchError
from models import AUTO_POLICY, BackendId, GridSpec, PhysicalParams, ZEval, parse_policy
from services import combinatorics, thermo
from services.backends import evaluate

logger = logging.getLogger(__name__)

COMMANDS = ("curve", "critical", "compare", "physical", "partitions", "table")
TABLE_SIZES = (10, 100, 1000)
HEAVY_TABLE_SIZES = (10_000, 100_000)

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
_installed_handlers: List[logging.Handler] = []


@dataclass(frozen=True)
class RunConfig:
    """1回の CLI 実行の設定。コマンドごとに必要なフィールドだけを埋める。"""

    command: str
    n: Optional[int] = None
    grid: Optional[GridSpec] = None
    policy: str = AUTO_POLICY
    output: Optional[Path] = None
    tolerance: Optional[float] = None
    workers: int = 1
    q1: Optional[float] = None
    physical: Optional[PhysicalParams] = None
    bracket: Tuple[float, float] = thermo.DEFAULT_BRACKET
    coarse_points: int = thermo.DEFAULT_COARSE_POINTS
    heavy: bool = False

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise DomainError(f"不明なコマンド: {self.command}")
        if self.command in ("curve", "critical", "compare", "partitions"):
            if self.n is None or self.n < 1:
                raise DomainError(f"{self.command}: --n は 1 以上の整数が必要です: {self.n}")
        if (self.grid is not None) != (self.command == "curve"):
            raise DomainError("グリッド指定は curve コマンドでのみ使用します")
        if self.command == "compare" and self.q1 is None:
            raise DomainError("compare: --q1 か --rho-lambda3 が必要です")
        if self.command == "physical" and self.physical is None:
            raise DomainError("physical: --mass, --temperature, --volume が必要です")
        if self.tolerance is not None and not self.tolerance > 0.0:
            raise DomainError(f"許容誤差は正の値が必要です: {self.tolerance}")
        if self.workers < 1:
            raise DomainError(f"--workers は 1 以上が必要です: {self.workers}")
        parse_policy(self.policy)


# ---------------------------------------------------------------------------
# 出力
# ---------------------------------------------------------------------------


def _emit(frame: pd.DataFrame, cfg: RunConfig) -> None:
    """12有効桁・LF改行で CSV を書く。"""
    options = dict(index=False, float_format="%.12g", lineterminator="\n")
    if cfg.output is None:
        frame.to_csv(sys.stdout, **options)
        return
    cfg.output.parent.mkdir(parents=True, exist_ok=True)
    with open(cfg.output, "w", encoding="utf-8", newline="") as f:
        frame.to_csv(f, **options)
    logger.info("CSV を保存しました: %s", cfg.output)


def _diagnostic(message: str) -> None:
    print(message, file=sys.stderr)


# ---------------------------------------------------------------------------
# コマンド
# ---------------------------------------------------------------------------


def cmd_curve(cfg: RunConfig) -> int:
    curve = thermo.heat_curve(cfg.n, cfg.grid, cfg.policy, workers=cfg.workers)
    frame = curve.to_frame().sort_values("rho_lambda3", kind="stable")
    _emit(frame, cfg)
    return 0


def _critical_row(point) -> dict:
    return {
        "n": point.n,
        "rho_lambda3_c": point.rho_lambda3_c,
        "c_max_over_nkb": point.c_max_over_nkb,
        "q1_c": point.q1_c,
        "tolerance": point.search_tolerance,
    }


def _find_critical(n: int, cfg: RunConfig):
    return thermo.critical_point(
        n,
        tolerance=cfg.tolerance if cfg.tolerance is not None else thermo.DEFAULT_SEARCH_TOLERANCE,
        bracket=cfg.bracket,
        coarse_points=cfg.coarse_points,
        policy=cfg.policy,
        workers=cfg.workers,
    )


def cmd_critical(cfg: RunConfig) -> int:
    point = _find_critical(cfg.n, cfg)
    _emit(pd.DataFrame([_critical_row(point)]), cfg)
    return 0


def cmd_table(cfg: RunConfig) -> int:
    """N = 10, 100, 1000（--heavy で 10⁴, 10⁵ も）の臨界点を1行ずつ出す。"""
    sizes = TABLE_SIZES + (HEAVY_TABLE_SIZES if cfg.heavy else ())
    rows = []
    for n in sizes:
        logger.info("table: n=%d の臨界点を探索します", n)
        rows.append(_critical_row(_find_critical(n, cfg)))
    _emit(pd.DataFrame(rows), cfg)
    return 0


def _relative_gap(a: float, b: float) -> float:
    scale = max(abs(a), abs(b))
    if scale == 0.0:
        return 0.0
    return abs(a - b) / scale


def max_pairwise_deviation(evals: Sequence[ZEval]) -> float:
    """log_z は絶対差（Z_N の相対差に等しい）、比は相対差で、全ペアの最大値。"""
    worst = 0.0
    for a, b in itertools.combinations(evals, 2):
        worst = max(
            worst,
            abs(a.log_z - b.log_z),
            _relative_gap(a.ratio1, b.ratio1),
            _relative_gap(a.ratio2, b.ratio2),
        )
    return worst


def cmd_compare(cfg: RunConfig) -> int:
    n, q = cfg.n, cfg.q1
    backends = [BackendId.LANDSBERG, BackendId.PARK_KIM]
    if n <= combinatorics.MATSUBARA_CAP:
        backends.insert(0, BackendId.MATSUBARA)

    evals: List[ZEval] = []
    heats: List[float] = []
    for backend in backends:
        try:
            z = evaluate(n, q, backend)
            heats.append(thermo.specific_heat_from_eval(z))
        except NumericError as e:
            logger.warning("compare: %s を比較から除外します: %s", backend.value, e)
            _diagnostic(f"警告: {backend.value} は評価できませんでした (n={n}, q1={q:.12g}): {e}")
            continue
        evals.append(z)

    if len(evals) < 2:
        raise NumericError(f"比較できるバックエンドが2つ未満です (n={n}, q1={q:.12g})")

    deviation = max_pairwise_deviation(evals)
    tolerance = cfg.tolerance if cfg.tolerance is not None else AppSettings().get_equivalence_tolerance()
    frame = pd.DataFrame(
        {
            "n": [z.n for z in evals],
            "q1": [z.q1 for z in evals],
            "backend": [z.backend_id.value for z in evals],
            "log_z": [z.log_z for z in evals],
            "ratio1": [z.ratio1 for z in evals],
            "ratio2": [z.ratio2 for z in evals],
            "c_over_nkb": heats,
            "max_rel_deviation": [deviation] * len(evals),
        }
    )
    _emit(frame, cfg)
    if deviation > tolerance:
        _diagnostic(f"バックエンド間の差 {deviation:.3e} が許容誤差 {tolerance:.3e} を超えました (n={n}, q1={q:.12g})")
        return 1
    return 0


def cmd_physical(cfg: RunConfig) -> int:
    p = cfg.physical
    frame = pd.DataFrame(
        {"lambda_m": [thermo.thermal_wavelength(p)], "q1": [thermo.q1_from_physical(p).value]},
    )
    _emit(frame, cfg)
    return 0


def cmd_partitions(cfg: RunConfig) -> int:
    rows = []
    for ct in combinatorics.iter_cycle_types(cfg.n):
        coefficient = combinatorics.matsubara_coefficient(ct)
        rows.append(
            {
                "parts": " ".join(str(k) for k in ct.part_sizes),
                "g": " ".join(str(g) for g in ct.degeneracies),
                "count": coefficient.cycle_count,
                "cj_over_nfact": math.exp(coefficient.normalized_log),
            }
        )
    _emit(pd.DataFrame(rows, columns=["parts", "g", "count", "cj_over_nfact"]), cfg)
    return 0


HANDLERS = {
    "curve": cmd_curve,
    "critical": cmd_critical,
    "compare": cmd_compare,
    "physical": cmd_physical,
    "partitions": cmd_partitions,
    "table": cmd_table,
}


# ---------------------------------------------------------------------------
# 引数とログ
# ---------------------------------------------------------------------------


def build_parser(settings: AppSettings) -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output", "-o", type=Path, default=None, help="出力先 CSV（省略時は標準出力）")
    common.add_argument("--verbose", "-v", action="store_true", help="INFO ログを表示")
    common.add_argument("--debug", action="store_true", help="DEBUG ログを表示し logs/bec_cli.log にも保存")

    backend = argparse.ArgumentParser(add_help=False)
    backend.add_argument(
        "--backend",
        default=settings.get_backend_policy(),
        choices=[AUTO_POLICY] + [b.value for b in BackendId],
        help="Z_N の計算方法（既定: auto）",
    )
    backend.add_argument("--workers", type=int, default=settings.get_workers(), help="並列スレッド数")
    backend.add_argument(
        "--save-defaults", action="store_true", help="--backend と --workers を設定ファイルの既定値として保存"
    )

    search = argparse.ArgumentParser(add_help=False)
    lo, hi = settings.get_search_bracket()
    search.add_argument("--tolerance", type=float, default=settings.get_search_tolerance(), help="黄金分割の区間幅")
    search.add_argument("--bracket-min", type=float, default=lo)
    search.add_argument("--bracket-max", type=float, default=hi)
    search.add_argument("--coarse-points", type=int, default=settings.get_coarse_points())

    parser = argparse.ArgumentParser(description="理想ボース気体のカノニカル熱力学（比熱・臨界点）を CSV で出力")
    sub = parser.add_subparsers(dest="command", required=True)

    grid_min, grid_max, grid_points, grid_spacing = settings.get_curve_grid()
    p = sub.add_parser("curve", parents=[common, backend], help="比熱曲線 C/(N k_B) vs ρΛ³")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--min", type=float, default=grid_min, dest="rho_min")
    p.add_argument("--max", type=float, default=grid_max, dest="rho_max")
    p.add_argument("--points", type=int, default=grid_points)
    p.add_argument("--spacing", choices=["linear", "log"], default=grid_spacing)

    p = sub.add_parser("critical", parents=[common, backend, search], help="比熱の極大（臨界点）")
    p.add_argument("--n", type=int, required=True)

    p = sub.add_parser("table", parents=[common, backend, search], help="N = 10, 100, 1000 の臨界点表")
    p.add_argument("--heavy", action="store_true", help="N = 10⁴, 10⁵ も計算する（長時間）")

    p = sub.add_parser("compare", parents=[common], help="バックエンド間の一致を確認")
    p.add_argument("--n", type=int, required=True)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--q1", type=float)
    group.add_argument("--rho-lambda3", type=float)
    p.add_argument("--tolerance", type=float, default=settings.get_equivalence_tolerance())

    p = sub.add_parser("physical", parents=[common], help="SI 単位から Λ と Q₁ を計算")
    p.add_argument("--mass", type=float, required=True, help="粒子の質量 [kg]")
    p.add_argument("--temperature", type=float, required=True, help="温度 [K]")
    p.add_argument("--volume", type=float, required=True, help="体積 [m³]")

    p = sub.add_parser("partitions", parents=[common], help="巡回型と Matsubara 係数の一覧")
    p.add_argument("--n", type=int, required=True)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    command = args.command
    fields = dict(command=command, output=args.output)
    if command in ("curve", "critical", "table"):
        fields.update(policy=args.backend, workers=args.workers)
    if command in ("curve", "critical", "compare", "partitions"):
        fields["n"] = args.n
    if command == "curve":
        fields["grid"] = GridSpec(args.rho_min, args.rho_max, args.points, args.spacing)
    if command in ("critical", "table"):
        fields.update(
            tolerance=args.tolerance,
            bracket=(args.bracket_min, args.bracket_max),
            coarse_points=args.coarse_points,
        )
    if command == "table":
        fields["heavy"] = args.heavy
    if command == "compare":
        if args.q1 is not None:
            fields["q1"] = args.q1
        else:
            if not args.rho_lambda3 > 0.0:
                raise DomainError(f"--rho-lambda3 は正の値が必要です: {args.rho_lambda3}")
            fields["q1"] = args.n / args.rho_lambda3
        fields["tolerance"] = args.tolerance
    if command == "physical":
        fields["physical"] = PhysicalParams(args.mass, args.temperature, args.volume)
    return RunConfig(**fields)


def setup_logging(verbose: bool, debug: bool, settings: AppSettings) -> None:
    """ルートロガーに stderr ハンドラと（必要なら）ファイルハンドラを付ける。再呼び出し時は付け直す。"""
    root = logging.getLogger()
    for handler in _installed_handlers:
        root.removeHandler(handler)
        handler.close()
    _installed_handlers.clear()

    level = logging.DEBUG if debug else logging.INFO if verbose else logging.WARNING
    root.setLevel(logging.DEBUG if debug else level)
    formatter = logging.Formatter(LOG_FORMAT)

    console = logging.StreamHandler(sys.stderr)
    console.setLevel(level)
    console.setFormatter(formatter)
    root.addHandler(console)
    _installed_handlers.append(console)

    if debug or settings.get_log_to_file():
        log_dir = settings.get_log_dir()
        log_dir.mkdir(parents=True, exist_ok=True)
        file_handler = logging.FileHandler(log_dir / "bec_cli.log", encoding="utf-8")
        file_handler.setLevel(logging.DEBUG)
        file_handler.setFormatter(formatter)
        root.addHandler(file_handler)
        _installed_handlers.append(file_handler)


def exit_code_for(error: BaseException) -> int:
    # CapacityError は DomainError の派生なので先に判定する
    if isinstance(error, (CapacityError, NumericError, SearchError)):
        return 1
    if isinstance(error, DomainError):
        return 2
    return 1


def main(argv: Optional[Sequence[str]] = None, settings: Optional[AppSettings] = None) -> int:
    if settings is None:
        settings = AppSettings()
    parser = build_parser(settings)
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    setup_logging(args.verbose, args.debug, settings)
    try:
        cfg = config_from_args(args)
        logger.debug("RunConfig: %s", cfg)
        if getattr(args, "save_defaults", False):
            settings.set_backend_policy(cfg.policy)
            settings.set_workers(cfg.workers)
            logger.info("既定値を保存しました: backend=%s, workers=%d", cfg.policy, cfg.workers)
        return HANDLERS[cfg.command](cfg)
    except BoseGasError as e:
        code = exit_code_for(e)
        kind = "使い方の誤り" if code == 2 else "計算に失敗しました"
        _diagnostic(f"エラー（{kind}）: {e}")
        logger.debug("詳細", exc_info=True)
        return code


if __name__ == "__main__":
    sys.exit(main())
