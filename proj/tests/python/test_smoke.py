import math
from pathlib import Path

import numpy as np
import pytest

import jumpconv as jc

CONFIGS = Path(__file__).resolve().parents[2] / "configs"


def scalar_scenario(rate=-0.5, amplitude=1.0):
    return jc.ConvolutionScenario(
        "scalar",
        jc.MarkSpace([2.0]),
        jc.SmoothSpace(1, 2.0, 2.0, 2.0),
        jc.Generator.diagonal([rate]),
        jc.FieldIntegrand.constant([np.array([amplitude])]),
        1.0,
    )


def test_sample_path_is_reproducible():
    ms = jc.MarkSpace([1.0, 0.5])
    a = jc.sample_path(ms, 2.0, 11)
    b = jc.sample_path(ms, 2.0, 11)
    assert a.times == b.times and a.marks == b.marks
    assert all(0.0 < t <= 2.0 for t in a.times)
    assert a.to_csv().splitlines()[0].startswith("t")


def test_scalar_convolution_matches_closed_form():
    scn = scalar_scenario()
    path = jc.sample_path(scn.marks, 1.0, 3)
    t = 1.0
    jumps = sum(math.exp(-0.5 * (t - s)) for s in path.times)
    compensator = 2.0 * (1.0 - math.exp(-0.5 * t)) / 0.5
    assert jc.convolve_at(scn, path, t)[0] == pytest.approx(jumps - compensator, abs=1e-10)
    times, values = jc.convolution_path(scn, path)
    assert values.shape == (len(times), 1)
    assert values[-1, 0] == pytest.approx(jumps - compensator, abs=1e-10)


def test_inequality_ratio_is_scale_invariant():
    scn = scalar_scenario()
    base = jc.inequality_report(scn, "thm4_9", 2.0, n_paths=1000, seed=5)
    big = jc.inequality_report(scn.with_integrand(scn_integrand(8.0)), "thm4_9", 2.0, n_paths=1000, seed=5)
    assert math.isfinite(base["ratio_hat"])
    assert big["ratio_hat"] == pytest.approx(base["ratio_hat"], rel=1e-12)


def scn_integrand(c):
    return jc.FieldIntegrand.constant([np.array([c])])


def test_hypothesis_violation_raises():
    scn = scalar_scenario()
    with pytest.raises(jc.HypothesisError):
        jc.inequality_report(scn, "thm4_6", 1.0)


def test_isometry_in_hilbert_space():
    rep = jc.ito_isometry_report(scalar_scenario(), n_paths=20000, seed=1)
    assert rep["hilbert"] and rep["equality_holds"]


def test_load_scenario_and_cli(tmp_path):
    text = (CONFIGS / "minimal_sample.yaml").read_text()
    scn = jc.load_scenario(text)
    assert scn.horizon > 0
    code, _, err = jc.run_cli(["sample", "--config", str(CONFIGS / "minimal_sample.yaml"), "--out", str(tmp_path)])
    assert code == 0, err
    assert (tmp_path / "path_0.csv").exists()
    code, _, _ = jc.run_cli(["verify", "--config", str(tmp_path / "missing.yaml"), "--out", str(tmp_path)])
    assert code == 3
