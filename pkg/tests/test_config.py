import math

import numpy as np
import pytest

from zenoheom.config import parse_config, serialize_config
from zenoheom.errors import ConfigError
from zenoheom.verify import fixture_path, shipped_configs

MINIMAL = """
[model]
kind = qubit
epsilon = 1
delta = 0.2
initial_state = excited

[bath]
kind = lorentzian
gamma0 = 0.5
lambda = 0.05
beta = zero
"""


def problems_of(text):
    with pytest.raises(ConfigError) as exc:
        parse_config(text)
    return exc.value.problems


def test_defaults():
    cfg = parse_config(MINIMAL)
    assert cfg.bath.omega0 == 0.0 and math.isinf(cfg.bath.beta)
    assert cfg.solver.L_start == 2 and cfg.solver.L_max == 40 and cfg.solver.conv_tol == 1e-4
    assert cfg.scan.frame == "rotating"
    assert np.allclose(cfg.initial_state(), [1, 0])


def test_implicit_tau_min_resolves_fastest_scale():
    cfg = parse_config(MINIMAL)
    assert cfg.effective_tau_min() == pytest.approx(0.02)
    assert cfg.tau_grid()[0] == pytest.approx(0.02)


@pytest.mark.parametrize("path", shipped_configs())
def test_round_trip(path):
    with open(path, encoding="utf-8") as fh:
        cfg = parse_config(fh.read())
    assert parse_config(serialize_config(cfg)) == cfg


def test_small_L_max_pulls_default_start_down():
    cfg = parse_config(MINIMAL + "[solver]\nL_max = 1\n")
    assert cfg.solver.L_start == 1


def test_temperature_pairing_rejected():
    text = MINIMAL.replace("beta = zero", "beta = 2.0")
    assert any("zero temperature" in p for p in problems_of(text))
    drude = "[bath]\nkind = ohmic_drude\nchi = 0.05\nomega_c = 10\nbeta = zero\n"
    assert any("beta = zero" in p for p in problems_of(drude))


def test_tau_min_must_be_positive():
    assert any("tau_min" in p for p in problems_of(MINIMAL + "[scan]\ntau_min = 0\n"))


def test_every_problem_is_listed():
    text = (
        MINIMAL.replace("kind = qubit", "kind = ququart")
        + "[solver]\nL_start = 5\nL_max = 3\nconv_tol = -1\n"
        + "[scan]\npoints = zero\n[sweep]\nparameter = mass\nvalues = 1\n[extra]\nx = 1\n"
    )
    probs = problems_of(text)
    for needle in ("ququart", "L_max", "conv_tol", "points", "mass", "[extra]"):
        assert any(needle in p for p in probs), needle


def test_unknown_key_rejected():
    assert any("colour" in p for p in problems_of(MINIMAL + "[output]\ncolour = red\n"))


def test_physical_rejection_surfaces_as_config_error():
    assert problems_of(MINIMAL.replace("initial_state = excited", "initial_state = 0.6, 0.7"))


def test_sweep_builds_substituted_configs():
    cfg = parse_config(MINIMAL + "[sweep]\nparameter = lambda\nvalues = 0.1, 1\n")
    subs = cfg.sweep_configs()
    assert [v for v, _ in subs] == [0.1, 1.0]
    assert [c.bath.lam for _, c in subs] == [0.1, 1.0]


def test_sweep_value_out_of_domain():
    assert any("lambda" in p for p in problems_of(MINIMAL + "[sweep]\nparameter = lambda\nvalues = 0.1, -1\n"))


def test_fixture_lookup():
    assert fixture_path("dephasing_qubit.ini").endswith("dephasing_qubit.ini")
    assert len(shipped_configs()) >= 10
