import os
from pathlib import Path

import pytest

import multisym

THEORIES = Path(os.environ.get("MULTISYM_THEORY_DIR", Path(__file__).resolve().parents[2] / "theories"))


def test_parse_and_differentiate():
    e = multisym.parse("1/2*v_0_0^2 + x_0*y_0")
    assert str(e.diff("v_0_0")) == "v_0_0"
    assert e.diff("y_0") == multisym.parse("x_0")
    assert e.evaluate({"v_0_0": 2.0, "x_0": 0.0, "y_0": 1.0}) == pytest.approx(2.0)


def test_arithmetic_normal_form():
    a = multisym.parse("x_0")
    b = multisym.parse("y_0")
    assert (a + b) ** 2 - a**2 - b**2 == multisym.parse("2*x_0*y_0")


def test_chart_dimensions():
    assert multisym.chart_dimension("Pi", 1, 2) == 5
    assert multisym.chart_dimension("MPi", 1, 2) == 6
    assert multisym.chart_dimension("J1E", 3, 3) == 15
    assert multisym.chart_coordinates("MPi", 1, 1) == ["x_0", "y_0", "pe", "p_0_0"]


def test_momenta():
    p = multisym.momenta("1/2*v_0_0^2 - 1/2*v_0_1^2", 2, 1)
    assert [str(x) for x in p] == ["v_0_0", "-v_0_1"]


def test_parse_error_raises():
    with pytest.raises(multisym.MultisymError):
        multisym.parse("x_0 + * y_0")
    with pytest.raises(multisym.MultisymError):
        multisym.parse_on("p_0_0", "J1E", 1, 1)


@pytest.mark.parametrize("name", ["free_particle", "scalar_field", "em", "mechanics_dims"])
def test_verify_fixtures(name):
    result = multisym.run("verify", THEORIES / f"{name}.theory.json", samples=8)
    assert result.ok, result.error
    assert result.report["status"] == "ok"
    assert all(c["verdict"] != "fail" for c in result.report["checks"])


def test_derive_em():
    result = multisym.run("derive", THEORIES / "em.theory.json")
    assert result.ok
    assert result.report["derived"]["regularity"]["exact_rank"] == 3


def test_error_exit_codes(tmp_path):
    missing = multisym.run("verify", tmp_path / "missing.theory.json")
    assert missing.exit_code == 2
    assert missing.report is None
    assert "missing.theory.json" in missing.error
    coarse = multisym.run("solve", THEORIES / "scalar_field.theory.json", grid="20x200")
    assert coarse.exit_code == 3
