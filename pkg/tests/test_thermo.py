import math
import random
import warnings

import numpy as np
import pytest

from errors import DomainError, NumericError, NumericWarning, SearchError
from models import BOLTZMANN_K, HBAR, BackendId, CriticalPoint, GridSpec, HeatCurve, PhysicalParams
from services import thermo
from services.backends import closed_form_q, evaluate
from services.thermo import (
    LIMIT_C_MAX_OVER_NKB,
    LIMIT_RHO_LAMBDA3_C,
    bec_condensate_entropy,
    classical_free_energy,
    configurational_entropy,
    critical_point,
    free_propagator,
    heat_curve,
    propagator_normalization,
    q1_from_physical,
    ring_merging_log_q,
    specific_heat,
    specific_heat_beta_oracle,
    thermal_wavelength,
)

RB87_MASS = 1.443e-25

REFERENCE_PEAKS = {
    10: (1.717, 1.624),
    100: (2.200, 1.753),
    1000: (2.423, 1.837),
}


def two_particle_heat(q):
    """Q₂ = Q₁² + 2^{-3/2} Q₁ から手で微分した比熱。"""
    a = 2**-1.5
    z = closed_form_q(2, q)
    zp = 2 * q + a
    zpp = 2.0
    r1, r2 = zp / z, zpp / z
    return (2.25 * q * q * (r2 - r1 * r1) + 3.75 * q * r1) / 2


# ---------------------------------------------------------------------------
# 比熱
# ---------------------------------------------------------------------------


def test_single_particle_is_flat():
    rng = random.Random(20240501)
    for _ in range(10):
        q = 10 ** rng.uniform(-3, 3)
        assert specific_heat(1, q) == pytest.approx(1.5, rel=1e-14)


@pytest.mark.parametrize("n", [2, 10, 100, 1000])
def test_classical_limit(n):
    assert specific_heat(n, n / 1e-3) == pytest.approx(1.5, abs=1e-3)


def test_classical_regime_follows_virial_correction():
    # 第1ビリアル補正: C/Nk ≈ 1.5 (1 + ρΛ³/2^{7/2})
    for rho in (0.01, 0.003, 0.001):
        assert specific_heat(100, 100 / rho) == pytest.approx(1.5 * (1 + rho / 2**3.5), abs=2e-5)


def test_classical_regime_converges_to_equipartition():
    deviations = [specific_heat(100, 100 / rho) - 1.5 for rho in (0.1, 0.03, 0.01, 0.003, 0.001)]
    assert all(d > 0.0 for d in deviations)
    assert all(b < a for a, b in zip(deviations, deviations[1:]))
    assert deviations[-1] < 2e-4


def test_two_particle_closed_form():
    for rho in (1.0, 2.0):
        assert specific_heat(2, 2 / rho) == pytest.approx(two_particle_heat(2 / rho), rel=1e-12)


def test_n10_peak_value():
    assert specific_heat(10, 10 / 1.717) == pytest.approx(1.624, abs=5e-4)


def test_backends_give_same_heat():
    values = [specific_heat(40, 40 / 2.0, backend) for backend in BackendId]
    assert max(values) - min(values) < 1e-9


# ---------------------------------------------------------------------------
# β 空間の差分による検算
# ---------------------------------------------------------------------------


def test_beta_oracle_single_particle():
    assert specific_heat_beta_oracle(1, 3.0) == pytest.approx(1.5, rel=1e-6)


@pytest.mark.parametrize("n, q", [(3, 2.0), (60, 30.0)])
def test_beta_oracle_examples(n, q):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NumericWarning)
        oracle = specific_heat_beta_oracle(n, q)
    assert oracle == pytest.approx(specific_heat(n, q), rel=1e-6)


@pytest.mark.parametrize("n", [1, 2, 3, 10, 60, 200])
@pytest.mark.parametrize("rho", [0.5, 1.5, 2.6, 3.2])
def test_beta_oracle_matrix(n, rho):
    q = n / rho
    oracle = specific_heat_beta_oracle(n, q, rel_step=1e-3)
    assert oracle == pytest.approx(specific_heat(n, q), rel=1e-6)


def test_beta_oracle_quiet_at_moderate_step():
    with warnings.catch_warnings():
        warnings.simplefilter("error", NumericWarning)
        specific_heat_beta_oracle(10, 10 / 1.5, rel_step=1e-3)


def test_beta_oracle_warns_on_cancellation():
    # 丸め誤差の出方は点ごとに違うので複数点のどこかで警告が出ればよい
    with pytest.warns(NumericWarning):
        for rho in (0.8, 1.2, 1.5, 2.0, 2.5, 3.0):
            specific_heat_beta_oracle(200, 200 / rho, rel_step=1e-7)


@pytest.mark.parametrize("step", [1e-8, 0.05, 0.0])
def test_beta_oracle_step_range(step):
    with pytest.raises(DomainError):
        specific_heat_beta_oracle(3, 2.0, rel_step=step)


# ---------------------------------------------------------------------------
# 比熱曲線
# ---------------------------------------------------------------------------


def test_curve_single_particle():
    curve = heat_curve(1, GridSpec(0.5, 3.5, 5))
    assert len(curve.samples) == 5
    for s in curve.samples:
        assert s.c_over_nkb == pytest.approx(1.5, rel=1e-14)
        assert s.rho_lambda3 * s.q1 == pytest.approx(1.0, rel=1e-12)


def test_curve_single_point_two_particles():
    curve = heat_curve(2, GridSpec(1.0, 1.0, 1))
    (sample,) = curve.samples
    assert sample.q1 == 2.0
    assert sample.c_over_nkb == pytest.approx(two_particle_heat(2.0), rel=1e-12)


def test_curve_n100_peak_near_table_value():
    grid = GridSpec(2.0, 2.4, 81)
    curve = heat_curve(100, grid)
    step = 0.4 / 80
    assert abs(curve.peak().rho_lambda3 - 2.200) <= step


@pytest.mark.parametrize("n", [100, 1000])
def test_curve_is_unimodal(n):
    curve = heat_curve(n, GridSpec(0.5, 3.5, 300))
    c = np.array([s.c_over_nkb for s in curve.samples])
    signs = np.sign(np.diff(c))
    assert signs[0] > 0 and signs[-1] < 0
    # 増加から減少への切り替わりがちょうど1回
    assert np.count_nonzero(np.diff(signs) != 0) == 1


def test_curve_is_independent_of_workers():
    grid = GridSpec(0.5, 3.5, 40, "log")
    serial = heat_curve(80, grid, workers=1)
    parallel = heat_curve(80, grid, workers=4)
    assert serial == parallel
    assert serial.to_frame().equals(parallel.to_frame())


def test_curve_frame_columns():
    frame = heat_curve(5, GridSpec(1.0, 2.0, 3)).to_frame()
    assert list(frame.columns) == ["q1", "rho_lambda3", "c_over_nkb", "backend"]
    assert (frame["backend"] == "matsubara").all()
    assert frame["rho_lambda3"].is_monotonic_increasing


@pytest.mark.parametrize(
    "args",
    [(2.0, 1.0, 10), (1.0, 2.0, 1), (0.0, 2.0, 10), (1.0, 2.0, 0)],
)
def test_grid_validation(args):
    with pytest.raises(DomainError):
        GridSpec(*args)


def test_heat_curve_rejects_inconsistent_samples():
    sample = heat_curve(4, GridSpec(1.0, 1.0, 1)).samples[0]
    with pytest.raises(DomainError):
        HeatCurve(n=5, samples=(sample,))


# ---------------------------------------------------------------------------
# 臨界点
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("n", sorted(REFERENCE_PEAKS))
def test_critical_point_table(n):
    rho_c, c_max = REFERENCE_PEAKS[n]
    point = critical_point(n)
    assert point.rho_lambda3_c == pytest.approx(rho_c, abs=5e-4)
    assert point.c_max_over_nkb == pytest.approx(c_max, abs=5e-4)
    assert point.rho_lambda3_c * point.q1_c == pytest.approx(n, rel=1e-12)
    assert point.search_tolerance == 1e-6


@pytest.mark.heavy
def test_critical_point_n10000():
    point = critical_point(10_000, workers=4)
    assert point.rho_lambda3_c == pytest.approx(2.525, abs=5e-4)
    assert point.c_max_over_nkb == pytest.approx(1.882, abs=5e-4)


@pytest.mark.heavy
def test_critical_point_n100000():
    point = critical_point(100_000, workers=8)
    assert point.rho_lambda3_c == pytest.approx(2.572, abs=1e-3)
    assert point.c_max_over_nkb == pytest.approx(1.905, abs=1e-3)


def test_critical_point_two_particles_matches_dense_scan():
    point = critical_point(2)
    rhos = np.linspace(0.5, 3.5, 20001)
    dense = np.array([two_particle_heat(2 / r) for r in rhos])
    best = int(np.argmax(dense))
    assert 0 < best < len(rhos) - 1
    assert point.c_max_over_nkb > 1.5
    assert point.rho_lambda3_c == pytest.approx(rhos[best], abs=2e-4)
    assert point.c_max_over_nkb == pytest.approx(dense[best], rel=1e-8)


def test_peaks_approach_thermodynamic_limit():
    points = [critical_point(n) for n in sorted(REFERENCE_PEAKS)]
    rho = [p.rho_lambda3_c for p in points]
    c = [p.c_max_over_nkb for p in points]
    assert rho == sorted(rho) and len(set(rho)) == len(rho)
    assert c == sorted(c) and len(set(c)) == len(c)
    assert rho[-1] < LIMIT_RHO_LAMBDA3_C
    assert c[-1] < LIMIT_C_MAX_OVER_NKB
    assert LIMIT_RHO_LAMBDA3_C == pytest.approx(2.612, abs=5e-4)


def test_critical_point_is_deterministic_across_workers():
    assert critical_point(30, workers=1) == critical_point(30, workers=3)


def test_critical_point_rejects_single_particle():
    with pytest.raises(DomainError):
        critical_point(1)


def test_critical_point_without_interior_peak():
    # ピークより十分低密度側だけを走査すると端が最大になる
    with pytest.raises(SearchError):
        critical_point(100, bracket=(0.5, 1.0), coarse_points=20)


def test_critical_point_type_rejects_subclassical_peak():
    with pytest.raises(NumericError):
        CriticalPoint(n=10, rho_lambda3_c=2.0, c_max_over_nkb=1.49, q1_c=5.0, search_tolerance=1e-6)
    point = CriticalPoint(n=10, rho_lambda3_c=2.0, c_max_over_nkb=1.5, q1_c=5.0, search_tolerance=1e-6)
    assert point.c_max_over_nkb == 1.5


# ---------------------------------------------------------------------------
# 物理単位と伝搬関数
# ---------------------------------------------------------------------------


def test_thermal_wavelength_identity():
    # T = 1 K で 2πħ²β/m = 1 となる質量
    mass = 2 * math.pi * HBAR**2 / BOLTZMANN_K
    p = PhysicalParams(mass=mass, temperature=1.0, volume=1.0)
    assert thermal_wavelength(p) == pytest.approx(1.0, rel=1e-12)
    assert thermo.thermal_wavelength_at(p.beta, p.mass) == pytest.approx(1.0, rel=1e-12)
    assert q1_from_physical(p).value == pytest.approx(1.0, rel=1e-12)


def test_rubidium_example():
    p = PhysicalParams(mass=RB87_MASS, temperature=100e-9, volume=1e-15)
    lam = thermal_wavelength(p)
    assert lam == pytest.approx(5.9e-7, rel=0.01)
    assert q1_from_physical(p).value == pytest.approx(4.9e3, rel=0.05)
    hotter = PhysicalParams(mass=RB87_MASS, temperature=200e-9, volume=1e-15)
    assert thermal_wavelength(hotter) == pytest.approx(lam / math.sqrt(2), rel=1e-14)


def test_q1_is_linear_in_volume():
    p = PhysicalParams(mass=RB87_MASS, temperature=100e-9, volume=1e-15)
    lam = thermal_wavelength(p)
    unit = PhysicalParams(mass=RB87_MASS, temperature=100e-9, volume=lam**3)
    assert q1_from_physical(unit).value == pytest.approx(1.0, rel=1e-14)
    double = PhysicalParams(mass=RB87_MASS, temperature=100e-9, volume=2 * lam**3)
    assert q1_from_physical(double).value == pytest.approx(2.0, rel=1e-14)


@pytest.mark.parametrize("value", [0.0, -1.0, float("nan"), float("inf")])
def test_physical_params_validation(value):
    with pytest.raises(DomainError):
        PhysicalParams(mass=value, temperature=1.0, volume=1.0)
    with pytest.raises(DomainError):
        PhysicalParams(mass=1.0, temperature=value, volume=1.0)


def test_free_propagator_values():
    p = PhysicalParams(mass=RB87_MASS, temperature=100e-9, volume=1e-15)
    beta = p.beta
    lam = thermo.thermal_wavelength_at(beta, p.mass)
    assert free_propagator((0.0, 0.0, 0.0), beta, p) == pytest.approx(lam**-3, rel=1e-13)
    r = math.sqrt(2 * HBAR**2 * beta / p.mass)
    displacement = (r / math.sqrt(3),) * 3
    assert free_propagator(displacement, beta, p) == pytest.approx(math.exp(-1) / lam**3, rel=1e-12)
    with pytest.raises(DomainError):
        free_propagator((0.0, 0.0), beta, p)
    with pytest.raises(DomainError):
        free_propagator((0.0, 0.0, 0.0), 0.0, p)


@pytest.mark.parametrize(
    "mass, temperature, factor",
    [(RB87_MASS, 100e-9, 1.0), (6.646e-27, 2.17, 3.0), (9.109e-31, 300.0, 0.25)],
)
def test_propagator_normalization(mass, temperature, factor):
    p = PhysicalParams(mass=mass, temperature=temperature, volume=1.0)
    assert propagator_normalization(factor * p.beta, p) == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize("n", [1, 2, 5, 12])
def test_ring_merging_form_matches_matsubara(n):
    p = PhysicalParams(mass=RB87_MASS, temperature=100e-9, volume=2e-19)
    q = q1_from_physical(p).value
    expected = evaluate(n, q, "matsubara").log_z + math.lgamma(n + 1)
    assert ring_merging_log_q(n, p) == pytest.approx(expected, rel=1e-12, abs=1e-12)


# ---------------------------------------------------------------------------
# エントロピー
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("n", [10, 100, 10_000])
def test_condensate_entropy_vanishes_at_n_three_halves(n):
    result = bec_condensate_entropy(n, n**1.5)
    assert result.s_c == 0.0
    assert result.perfect_bec_q == 1.0


def test_condensate_entropy_examples():
    assert bec_condensate_entropy(1, 7.0).s_c == pytest.approx(math.log(7.0), rel=1e-15)
    assert bec_condensate_entropy(100, 1000.0).s_c == 0.0
    assert bec_condensate_entropy(10_000, 1e6).s_c == 0.0
    result = bec_condensate_entropy(8, 3.0)
    assert result.s_c == pytest.approx(-1.5 * math.log(8) + math.log(3.0), rel=1e-14)
    assert result.perfect_bec_q == pytest.approx(3.0 * 8**-1.5, rel=1e-15)


def test_classical_free_energy():
    assert classical_free_energy(10, 5.0) == pytest.approx(-10 * math.log(5.0), rel=1e-15)


def test_configurational_entropy_classical_limit():
    # Q₁ ≫ N では Q_N ≈ Q₁^N なので N ln Q_N ≈ N² ln Q₁
    n, q = 5, 1e8
    assert configurational_entropy(n, q) == pytest.approx(n * n * math.log(q), rel=1e-8)
    # 全置換の和は単一の輪の項より大きい
    assert configurational_entropy(n, 2.0) > n * bec_condensate_entropy(n, 2.0).s_c
