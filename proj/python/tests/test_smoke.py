import math

import numpy as np
import pytest

import qsvlp


def test_default_bound():
    assert qsvlp.sqrt_crlb() == pytest.approx(0.05476, rel=1e-3)


def test_fim_is_symmetric_and_reduces_to_fim_qs():
    s = qsvlp.default_scenario()
    s["mode"] = "three_d"
    f = qsvlp.fim(s)
    assert f.shape == (4, 4)
    np.testing.assert_allclose(f, f.T, rtol=1e-12)
    schur = f[:3, :3] - np.outer(f[:3, 3], f[3, :3]) / f[3, 3]
    np.testing.assert_allclose(qsvlp.fim_qs(s), schur, rtol=1e-6)


def test_energy_closed_forms():
    e1, e2, e3 = qsvlp.energy_integrals(2.0, 1e-6, 1e8)
    assert e2 == pytest.approx(1.5 * 4.0 * 1e-6)
    assert e1 == pytest.approx(4.0 / 3.0 * math.pi**2 * 1e16 * e2)
    assert e3 == 0.0


def test_overrides_and_errors():
    s = qsvlp.normalize_scenario(overrides=["pulse.center_frequency=1e7"])
    assert s["pulse"]["center_frequency"] == 1e7
    with pytest.raises(qsvlp.ConfigError, match="noise.psd"):
        qsvlp.normalize_scenario(overrides=["noise.psd=-1"])
    with pytest.raises(ValueError):
        qsvlp.normalize_scenario(overrides=["no.such.field=1"])


def test_noiseless_estimate():
    s = qsvlp.default_scenario()
    s["noise"]["psd"] = 0.0
    for kind in ("direct", "two_step"):
        e = qsvlp.estimate(s, kind)
        assert math.dist(e["position"], s["receiver"]["position"]) < 1e-3


def test_trials_and_validate():
    s = qsvlp.normalize_scenario(overrides=["pulse.amplitude=10"])
    r = qsvlp.run_trials(s, "two_step", trials=4, seed=3)
    assert r["failures"] == 0
    assert r["rmse"] < 0.05
    assert qsvlp.validate()["checks"]


def test_figure_is_reproducible():
    a, meta = qsvlp.run_figure(1, spacing=1.5)
    b, _ = qsvlp.run_figure(1, spacing=1.5)
    assert a == b
    assert meta["figure"] == 1
    assert a.splitlines()[0] == "x_m,y_m,sqrt_crlb_m"
