import numpy as np
import pytest

from mgsamplers.diagnostics import (
    DiagnosticsReport,
    autocorrelation,
    effective_sample_size,
    mode_crossings,
    summarize,
)
from mgsamplers.samplers import Trace


def ar1(phi, n, seed=0):
    rng = np.random.default_rng(seed)
    x = np.empty(n)
    x[0] = rng.standard_normal()
    noise = rng.standard_normal(n)
    for t in range(1, n):
        x[t] = phi * x[t - 1] + noise[t]
    return x


class TestAutocorrelation:
    def test_alternating_sequence(self):
        x = np.tile([1.0, -1.0], 500)
        assert autocorrelation(x, 1)[0] == pytest.approx(-1.0, abs=1e-2)

    def test_iid_near_zero(self):
        x = np.random.default_rng(0).standard_normal(10 ** 5)
        assert abs(autocorrelation(x, 1)[0]) < 0.01

    def test_ar1_known_acf(self):
        x = ar1(0.5, 10 ** 5)
        rho = autocorrelation(x, 2)
        assert rho[0] == pytest.approx(0.5, abs=0.01)
        assert rho[1] == pytest.approx(0.25, abs=0.01)

    def test_too_few_samples(self):
        with pytest.raises(ValueError):
            autocorrelation(np.arange(5.0), 1)

    def test_zero_variance(self):
        with pytest.raises(ValueError, match="degenerate"):
            autocorrelation(np.ones(100), 1)

    def test_bad_max_lag(self):
        with pytest.raises(ValueError):
            autocorrelation(np.random.default_rng(1).standard_normal(20), 25)

    def test_bounded_by_one(self):
        x = ar1(0.9, 5000, seed=4)
        assert np.all(np.abs(autocorrelation(x, 50)) <= 1.0 + 1e-12)


class TestEffectiveSampleSize:
    def test_iid_close_to_n(self):
        x = np.random.default_rng(2).standard_normal(30000)
        assert 27000 <= effective_sample_size(x) <= 31500

    def test_ar1_geometric_sum(self):
        x = ar1(0.5, 10 ** 5, seed=3)
        assert effective_sample_size(x) / 10 ** 5 == pytest.approx(1.0 / 3.0, rel=0.1)

    @pytest.mark.parametrize("phi", [0.0, 0.3, 0.6, 0.9])
    def test_consistency_across_coefficients(self, phi):
        x = ar1(phi, 10 ** 5, seed=int(phi * 10))
        want = (1 - phi) / (1 + phi)
        assert effective_sample_size(x) / 10 ** 5 == pytest.approx(want, rel=0.15)

    def test_never_negative_and_clipped(self):
        x = np.tile([1.0, -1.0], 5000) + 0.01 * np.random.default_rng(5).standard_normal(10000)
        ess = effective_sample_size(x)
        assert 0 < ess <= 1.05 * 10000

    def test_tightens_with_n(self):
        ratios = {n: [effective_sample_size(ar1(0.6, n, seed=s)) / n for s in range(12)]
                  for n in (2000, 50000)}
        assert np.std(ratios[50000]) < np.std(ratios[2000])


class TestModeCrossings:
    def test_simple_sequence(self):
        assert mode_crossings(np.array([-1.0, -1.0, 1.0, -1.0])) == 2

    def test_with_center(self):
        assert mode_crossings(np.array([1.0, 3.0, 1.0]), center=2.0) == 2

    def test_multidim_uses_row_mean(self):
        samples = np.array([[1.0, 1.0], [-2.0, -2.0], [3.0, 3.0]])
        assert mode_crossings(samples) == 2


class TestSummarize:
    def make_trace(self, samples, accepted=None):
        n = samples.shape[0]
        if accepted is None:
            accepted = np.ones(n, dtype=bool)
        return Trace(samples=samples, accepted=accepted, hamiltonians=np.zeros(n))

    def test_all_accepted(self):
        tr = self.make_trace(np.random.default_rng(0).standard_normal((500, 1)))
        assert summarize(tr).acceptance_rate == 1.0

    def test_multidim_report(self):
        tr = self.make_trace(np.random.default_rng(1).standard_normal((500, 15)))
        rep = summarize(tr)
        assert rep.ess.shape == (15,)
        assert rep.min_ess <= rep.median_ess
        assert rep.acf.shape == (15, 50)

    def test_mode_crossings_only_for_symmetric_targets(self):
        from mgsamplers.targets import bimodal_1d_target, exponential_target
        x = np.abs(np.random.default_rng(2).standard_normal((500, 1)))
        tr = self.make_trace(x)
        assert summarize(tr, exponential_target(1.0)).mode_cross_count is None
        y = np.random.default_rng(3).standard_normal((500, 1))
        assert summarize(self.make_trace(y), bimodal_1d_target()).mode_cross_count > 0

    def test_csv_roundtrip_schema(self):
        tr = self.make_trace(np.random.default_rng(4).standard_normal((500, 2)))
        rep = summarize(tr)
        text = rep.to_csv()
        header, row = text.strip().split("\n")
        assert header == DiagnosticsReport.csv_header()
        assert len(row.split(",")) == len(header.split(","))
        kv = rep.to_key_values()
        assert "min_ess = " in kv and "acf_dim1 = " in kv

    def test_empty_trace_rejected(self):
        with pytest.raises(ValueError):
            summarize(self.make_trace(np.empty((0, 1)), accepted=np.empty(0, dtype=bool)))
