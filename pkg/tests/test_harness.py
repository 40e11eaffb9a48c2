import csv

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from scmdetect.errors import ConfigError
from scmdetect.harness import experiments as ex
from scmdetect.harness.cli import main
from scmdetect.harness.config import ExperimentConfig, config_from_mapping, load_config
from scmdetect.harness.output import write_csv
from scmdetect.rmt import nu_star, whitened_spike_curve
from scmdetect.signal_model import RngStream

SMALL = dict(M=4, N=64, B=16, trials=3, seed=5)


def write_toml(path, text):
    path.write_text(text)
    return path


# configuration

def test_config_rounds_span_even():
    cfg = ExperimentConfig(M=60, N=2048, B=239)
    assert cfg.B == 238
    assert cfg.c == pytest.approx(60 / 239)


@pytest.mark.parametrize("changes", [
    dict(M=20, B=16),            # M >= B + 1
    dict(N=10, B=16),            # B + 1 > N
    dict(K=2),
    dict(c_snr=1.0, gamma=1.0),
    dict(beta=1.0),
    dict(theta=(1.0, 1.0)),      # spectral null
    dict(nu0=0.001),             # off grid
    dict(mode="plot"),
    dict(epsilon=(0.0,)),
    dict(trials=0),
    dict(M=2.5),
])
def test_config_rejects(changes):
    with pytest.raises(ConfigError):
        ExperimentConfig(**{**SMALL, **changes})


def test_gamma_inverts_to_target_spike():
    cfg = ExperimentConfig(**SMALL, gamma=2.0)
    filt = cfg.signal_filter()
    top = whitened_spike_curve(filt, cfg.noise_model(), cfg.grid.frequencies).max()
    assert top == pytest.approx(2.0, rel=1e-10)
    assert nu_star(filt, cfg.noise_model(), cfg.grid) == 0.0
    assert ExperimentConfig(**SMALL).resolved_c_snr() == 0.0


def test_scaling_regime():
    cfg = ExperimentConfig.scaling_regime(2048)
    assert (cfg.M, cfg.B) == (103, 206)
    cfg = ExperimentConfig.scaling_regime(512)
    assert (cfg.M, cfg.B) == (39, 78)


def test_load_config(tmp_path):
    path = write_toml(tmp_path / "c.toml", 'M = 4\nN = 64\nB = 16\ntheta = [1.0, 0.5]\nepsilon = [0.1]\n')
    cfg = load_config(path, seed=9, trials=None)
    assert cfg.seed == 9 and cfg.trials == 50 and cfg.epsilon == (0.1,)


@pytest.mark.parametrize("text", [
    "M = 4\nN = 64\n",                       # missing B
    "M = 4\nN = 64\nB = 16\nbogus = 1\n",     # unknown key
    "M = 4\nN = 64\nB = 16\n[extra]\nx = 1\n",
    "M = = 4\n",
    "M = 4\nN = 64\nB = 16\ntheta = 0.5\n",
])
def test_load_config_errors(tmp_path, text):
    with pytest.raises(ConfigError):
        load_config(write_toml(tmp_path / "c.toml", text))


def test_load_config_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "nope.toml")


def test_config_from_mapping_overrides():
    cfg = config_from_mapping(dict(SMALL), seed=1, trials=None)
    assert cfg.seed == 1 and cfg.trials == 3


# experiments

def test_streams_pair_noise_across_hypotheses():
    cfg = ExperimentConfig(**SMALL, gamma=1.0)
    stream = RngStream(5, 7)
    y0 = ex.observe(cfg, "H0", stream)
    y1 = ex.observe(cfg, "H1", stream)
    from scmdetect.signal_model import generate_signal
    u, _ = generate_signal(cfg.signal_filter(), cfg.N, stream.substream(1))
    np.testing.assert_allclose(y1 - u, y0, atol=1e-14)


def test_simulate_statistics_reproducible_and_independent():
    cfg = ExperimentConfig(**SMALL, gamma=1.0)
    a = ex.simulate_statistics(cfg, "H0")
    assert np.array_equal(a, ex.simulate_statistics(cfg, "H0"))
    assert np.unique(a).size == a.size
    assert not np.array_equal(a, ex.simulate_statistics(cfg.replace(seed=6), "H0"))
    with pytest.raises(ValueError):
        ex.simulate_statistics(cfg, "H2")


def test_workers_bit_identical():
    cfg = ExperimentConfig(**{**SMALL, "trials": 6}, gamma=1.0)
    serial = ex.simulate_statistics(cfg, "H1", workers=1)
    parallel = ex.simulate_statistics(cfg, "H1", workers=3)
    assert serial.tobytes() == parallel.tobytes()


def test_roc_from_statistics_oracle():
    curve = ex.roc_from_statistics([1, 2, 3, 4], [3, 4, 5, 6], [-np.inf, 2.5, 4, np.inf])
    assert [(p.pfa, p.pd) for p in curve] == [(1, 1), (0.5, 1), (0, 0.5), (0, 0)]


@given(st.lists(st.floats(-5, 5), min_size=2, max_size=30),
       st.lists(st.floats(-5, 5), min_size=2, max_size=30))
def test_roc_monotone(h0, h1):
    curve = ex.roc_from_statistics(h0, h1, ex.roc_thresholds(h0, h1, 20))
    pfa = [p.pfa for p in curve]
    pd = [p.pd for p in curve]
    assert pfa[0] == pd[0] == 1.0 and pfa[-1] == pd[-1] == 0.0
    assert np.all(np.diff(pfa) <= 0) and np.all(np.diff(pd) <= 0)


def test_pd_at_pfa_and_error_probability():
    h0 = np.arange(10.0)
    h1 = np.arange(5.0, 15.0)
    # threshold h0[8] = 8 leaves one false alarm in ten
    assert ex.pd_at_pfa(h0, h1, 0.1) == pytest.approx(0.6)
    assert ex.error_probability(h0, h1, 7.5) == pytest.approx(0.3)


def test_roc_curve_requires_trials():
    with pytest.raises(ConfigError):
        ex.roc_curve(ExperimentConfig(**SMALL))


def test_null_distribution_summary():
    cfg = ExperimentConfig(**SMALL)
    s = ex.null_distribution(cfg)
    assert s.eigenvalues.size == cfg.trials * cfg.M
    assert s.statistics.shape == (cfg.trials,)
    assert 0 <= s.ks <= 1
    qs = [v for _, v in s.quantiles]
    assert qs == sorted(qs)


def test_phase_sweep_rows():
    cfg = ExperimentConfig(**SMALL)
    rows = ex.phase_sweep(cfg, gamma_grid=(0.0, 4.0))
    assert [r.gamma for r in rows] == [0.0, 4.0]
    assert rows[1].median_lambda1 > rows[0].median_lambda1
    assert rows[1].phi == pytest.approx((5.0) * (4.0 + cfg.c) / 4.0)


def test_transfer_residual_vanishes_for_memoryless_filter():
    from scmdetect.signal_model import geometric_filter
    filt = geometric_filter(3, 1.0, 0.0)
    assert ex.transfer_residual(filt, 64, 8, 0.25, RngStream(1)) < 1e-12


# output

def test_csv_seventeen_digits(tmp_path):
    path = write_csv(tmp_path / "x.csv", ["a", "b"], [(0.1, 3), (1 / 3, np.int64(2))])
    text = path.read_text()
    assert text == "a,b\n0.10000000000000001,3\n0.33333333333333331,2\n"
    assert float(text.splitlines()[2].split(",")[0]) == 1 / 3


# command line

def run_cli(tmp_path, command, text, *extra):
    cfg = write_toml(tmp_path / "c.toml", text)
    out = tmp_path / "out"
    return main([command, "--config", str(cfg), "--out", str(out), *extra]), out


BASE = "M = 4\nN = 64\nB = 16\ntrials = 4\nseed = 3\n"


def test_cli_null_dist(tmp_path, capsys):
    code, out = run_cli(tmp_path, "null-dist", BASE)
    assert code == 0
    rows = list(csv.reader(open(out / "null.csv")))
    assert rows[0] == ["quantile", "value"]
    assert len(list(csv.reader(open(out / "null_esd.csv")))) == 1 + 4 * 4
    assert "KS distance" in capsys.readouterr().out


def test_cli_roc_and_workers_identical(tmp_path):
    text = BASE + "gamma = 2.0\nepsilon = [0.1]\nroc_points = 20\n"
    code1, out1 = run_cli(tmp_path, "roc", text, "--trials", "100")
    (out1 / "roc.csv").rename(tmp_path / "serial.csv")
    code2, out2 = run_cli(tmp_path, "roc", text, "--trials", "100", "--workers", "2")
    assert code1 == code2 == 0
    assert (tmp_path / "serial.csv").read_bytes() == (out2 / "roc.csv").read_bytes()
    header = (out2 / "roc.csv").read_text().splitlines()[0]
    assert header == "threshold,pfa,pd,trials"


def test_cli_phase_sweep_and_spectrum(tmp_path):
    code, out = run_cli(tmp_path, "phase-sweep", BASE + "gamma_grid = [0.0, 2.0]\n")
    assert code == 0
    assert (out / "phase.csv").read_text().splitlines()[0] == "gamma,median_lambda1,phi,c"
    code, out = run_cli(tmp_path, "spectrum", BASE + "gamma = 3.0\n")
    assert code == 0
    lines = (out / "spectrum.csv").read_text().splitlines()
    assert lines[0] == "nu,lambda1" and len(lines) == 65


def test_cli_config_error_exit_code(tmp_path, capsys):
    code, _ = run_cli(tmp_path, "null-dist", "M = 40\nN = 64\nB = 16\n")
    assert code == 2
    assert "config error" in capsys.readouterr().err
    code, _ = run_cli(tmp_path, "roc", BASE)  # too few trials
    assert code == 2


def test_cli_numerical_exit_code(tmp_path, monkeypatch):
    from scmdetect.errors import NumericalError

    def boom(*args, **kwargs):
        raise NumericalError("forced")

    monkeypatch.setattr(ex, "null_distribution", boom)
    code, _ = run_cli(tmp_path, "null-dist", BASE)
    assert code == 3


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2**63))
def test_seed_determines_spectrum(seed):
    cfg = ExperimentConfig(**{**SMALL, "seed": seed}, gamma=1.0)
    assert ex.spectrum(cfg).trace.tobytes() == ex.spectrum(cfg).trace.tobytes()
