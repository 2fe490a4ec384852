import math

import numpy as np
import pytest

from schatte.errors import ConfigurationError, DomainError
from schatte.gp import GaussianSampler, closed_grid, sample_paths, sup_abs
from schatte.harness import (ExperimentConfig, dumps, kolmogorov_median, kolmogorov_sf,
                             ks_two_sample, run_covariance_experiment,
                             run_distribution_experiment, run_rate_experiment)
from schatte.walk import IncrementDistribution

from oracles import brownian_bridge, kolmogorov_sf_series

U01 = IncrementDistribution.uniform(0, 1)
U05 = IncrementDistribution.uniform(0, 0.5)


def test_ks_examples():
    assert ks_two_sample([1, 2, 3], [1, 2, 3]) == (0.0, 1.0)
    assert ks_two_sample([0], [1])[0] == 1.0
    assert ks_two_sample([1, 2, 3], [1.5, 2.5, 3.5])[0] == pytest.approx(1 / 3)
    with pytest.raises(DomainError):
        ks_two_sample([], [1.0])


def test_ks_matches_scipy():
    from scipy import stats
    rng = np.random.default_rng(1)
    a, b = rng.normal(size=300), rng.normal(0.1, 1, size=400)
    D, _ = ks_two_sample(a, b)
    assert D == pytest.approx(stats.ks_2samp(a, b).statistic, abs=1e-15)


def test_kolmogorov_sf():
    from scipy import special
    for x in np.linspace(0.05, 3, 120):
        assert kolmogorov_sf(x) == pytest.approx(special.kolmogorov(x), abs=1e-13)
    for x in (1.0, 1.5, 2.5):
        assert kolmogorov_sf(x) == pytest.approx(kolmogorov_sf_series(x), abs=1e-15)
    assert kolmogorov_sf(0.0) == 1.0
    assert kolmogorov_median() == pytest.approx(0.8275735551899077, abs=1e-12)


def test_null_calibration():
    z = np.arange(17) / 16
    s = GaussianSampler.from_matrix(brownian_bridge(z), z)
    p = [ks_two_sample(sup_abs(sample_paths(s, 500, 2 * i)),
                       sup_abs(sample_paths(s, 500, 2 * i + 1)))[1] for i in range(50)]
    assert np.mean(np.array(p) < 0.05) <= 0.16


def test_config_round_trip_and_errors(tmp_path):
    cfg = ExperimentConfig(dist=U05, n_values=[1024, 2048])
    again = ExperimentConfig.from_dict(cfg.to_dict())
    assert again == cfg
    with pytest.raises(ConfigurationError):
        ExperimentConfig.from_dict({"bogus": 1})
    with pytest.raises(ConfigurationError):
        ExperimentConfig.from_dict({"dist": {"kind": "gauss", "a": 0, "b": 1}})
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigurationError):
        ExperimentConfig.from_json(bad)


def test_two_replicas_inconclusive():
    cfg = ExperimentConfig(dist=U05, replicas=2, grid_step=0.25, n_values=(256,))
    r = run_covariance_experiment(cfg)
    assert r.verdict == "inconclusive"
    assert math.isinf(r.estimates["per_n"][0]["sup_error_se"])
    assert '"sup_error_se": Infinity' in r.to_json()


def test_out_of_regime_is_flagged():
    cfg = ExperimentConfig(dist=U05, epsilon=0.15, replicas=50, grid_step=0.25, n_values=(256,))
    r = run_covariance_experiment(cfg)
    assert r.regime == {"in_regime": False, "violated": ["coupling"]}
    assert r.verdict in ("pass", "fail")


def test_default_exponents_in_regime():
    assert ExperimentConfig().to_dict()["epsilon"] == 0.13
    r = run_covariance_experiment(ExperimentConfig(replicas=10, grid_step=0.5, n_values=(64,)))
    assert r.regime["in_regime"]


def test_covariance_monotone_in_n():
    cfg = ExperimentConfig(dist=U05, replicas=2000, grid_step=1 / 16)
    r = run_covariance_experiment(cfg, threads=4)
    first, last = r.estimates["per_n"][0], r.estimates["per_n"][-1]
    assert (first["n"], last["n"]) == (2**10, 2**14)
    comb = math.hypot(first["sup_error_se"], last["sup_error_se"])
    assert last["sup_error"] <= first["sup_error"] + 2 * comb
    assert r.estimates["monotone"]


def test_report_byte_identical_across_threads():
    cfg = ExperimentConfig(dist=U05, replicas=300, grid_step=1 / 8, n_values=(512, 1024))
    a = run_covariance_experiment(cfg, threads=1)
    b = run_covariance_experiment(cfg, threads=6)
    assert a.to_json() == b.to_json()
    assert a.id == b.id and a.id.startswith("covariance-")
    assert "wall_clock" not in a.to_json()


def test_distribution_negative_control():
    cfg = ExperimentConfig(dist=U01, n=1024, replicas=1000, grid_step=1 / 16, gamma_scale=4.0)
    r = run_distribution_experiment(cfg, threads=4)
    assert r.estimates["p_value"] < 1e-6 and r.verdict == "pass"
    assert r.estimates["median_sup_gaussian"] > 1.5 * r.estimates["median_sup_empirical"]


def test_rate_needs_three_sizes():
    with pytest.raises(ConfigurationError):
        run_rate_experiment(ExperimentConfig(n_values=(1024, 2048)))
    with pytest.raises(ConfigurationError):
        run_rate_experiment(ExperimentConfig())


def test_rate_self_test_constant_discrepancy():
    cfg = ExperimentConfig(dist=U05, replicas=500, grid_step=1 / 8, n_values=(256, 512, 1024, 2048),
                           inject_discrepancy=0.5)
    ci = run_rate_experiment(cfg, threads=4).estimates["slope_ci95"]
    assert ci[0] <= 0.0 <= ci[1]


def test_rate_iid_noise_is_flat_in_n():
    # the replica count is fixed, so the Monte Carlo error of Cov_emp does
    # not shrink with n and the fitted slope sits at 0 rather than -1/2
    cfg = ExperimentConfig(dist=U01, replicas=2000, grid_step=1 / 16,
                           n_values=(1024, 2048, 4096, 8192, 16384))
    r = run_rate_experiment(cfg, threads=4)
    lo, hi = r.estimates["slope_ci95"]
    assert lo <= 0.0 <= hi
    assert not lo <= -0.5 <= hi


def test_dumps_is_canonical():
    assert dumps({"b": np.float64(0.1), "a": [np.int64(1)]}) == \
        '{\n  "a": [\n    1\n  ],\n  "b": 0.1\n}\n'
