import math

import pytest

from services.search import golden_section_max


def test_parabola():
    x, y = golden_section_max(lambda t: -((t - 1.234) ** 2) + 5.0, 0.0, 3.0, tol=1e-6)
    assert x == pytest.approx(1.234, abs=1e-6)
    assert y == pytest.approx(5.0, abs=1e-12)


def test_reversed_bracket():
    x, _ = golden_section_max(math.sin, 3.0, 0.0, tol=1e-7)
    assert x == pytest.approx(math.pi / 2, abs=1e-7)


def test_tight_bracket_returns_midpoint():
    calls = []

    def f(t):
        calls.append(t)
        return t

    x, y = golden_section_max(f, 1.0, 1.0 + 1e-9, tol=1e-6)
    assert x == pytest.approx(1.0 + 5e-10)
    assert y == x
    assert len(calls) == 1


def test_evaluation_count_is_logarithmic():
    calls = []

    def f(t):
        calls.append(t)
        return -abs(t - 0.3)

    golden_section_max(f, 0.0, 1.0, tol=1e-6)
    # 区間幅 1 → 1e-6 は約 29 回
    assert len(calls) <= 32
