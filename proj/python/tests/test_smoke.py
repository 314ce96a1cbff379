import math

import pytest

import tbswap


def test_closed_form_limits():
    src = tbswap.SourceParams(1e-5, 1e-5)
    assert tbswap.hom_visibility("HOM2", src) == pytest.approx(1 / 3, abs=1e-4)
    assert tbswap.hom_visibility("HOM4", src) == pytest.approx(1.0, abs=1e-4)
    assert tbswap.closed_form_visibility("HOM4", 1e-5, 1.0, 1.0) == pytest.approx(
        tbswap.hom_visibility("HOM4", src), abs=1e-9)


def test_swap_prediction_and_fidelity():
    v = tbswap.swap_visibility(tbswap.source_preset("table_b"))
    assert v == pytest.approx(0.965, abs=0.002)
    assert tbswap.fidelity_from_visibility(v) == pytest.approx(0.974, abs=0.002)


def test_infer_zeta():
    z = tbswap.infer_zeta(0.831, 0.055, "SWAP", tbswap.source_preset("table_b"))
    assert 0.80 <= z["zeta_sq"] <= 0.92


def test_key_fraction():
    assert tbswap.secret_key_fraction(1.22, 0.011, 0.079) == pytest.approx(0.50, abs=0.01)


def test_tmsv_covariance_is_numpy():
    g = tbswap.tmsv_covariance(0.1)
    assert g.shape == (4, 4)
    assert g[0, 0] == pytest.approx(1.2)


def test_sweep_columns():
    cols = tbswap.run_sweep("SWAP", tbswap.source_preset("table_b"), tbswap.InterferenceParams(),
                            [("zeta_sq", 0.0, 1.0, 3, False)], ["V_swap"])
    assert len(cols["V_swap"]) == 3
    assert cols["V_swap"][-1] == pytest.approx(0.965, abs=0.002)


def test_errors_are_typed():
    with pytest.raises(tbswap.ConfigError):
        tbswap.source_preset("nope")
    with pytest.raises(tbswap.Error):
        tbswap.hom_visibility("HOM2", tbswap.SourceParams(-1.0, 0.1))


def test_pattern_probabilities_and_counts():
    p = tbswap.pattern_probabilities("HOM", tbswap.source_preset("table_a"))
    assert set(p) == {"P21", "P521", "P217", "P5217"}
    assert all(0 <= x <= 1 for x in p.values())
    counts = tbswap.simulate_counts(tbswap.SourceParams(0.05, 0.05, 0.5, 0.5, 0.5, 0.5), 0.05, seed=3)
    assert len(counts) == 8
    assert sum(counts.values()) > 0
    assert not math.isnan(tbswap.binary_entropy(0.1))
