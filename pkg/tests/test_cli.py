import json
import math

import numpy as np
import pytest

from decaylab import cli
from decaylab.oscint import ComplexTimeSeries, QuadratureFailure, SeriesFailure
from decaylab.output import read_csv


def run(*argv):
    return cli.main(list(argv))


def test_survival_row_at_t2(tmp_path):
    out = tmp_path / "a.csv"
    code = run("survival", "--gamma", "1", "--omega0", "0",
               "--t-start", "0", "--t-end", "10", "--n-points", "11",
               "--out", str(out))
    assert code == 0
    params, names, cols = read_csv(str(out))
    assert names == ["t", "re", "im", "abs"]
    assert params["command"] == "survival"
    i = list(cols["t"]).index(2.0)
    assert cols["abs"][i] == pytest.approx(math.exp(-1.0), abs=1e-7)
    assert cols["abs"][i] == pytest.approx(0.3678794, abs=1e-6)


def test_survival_single_point_grid(tmp_path):
    out = tmp_path / "one.csv"
    assert run("survival", "--t-start", "0", "--t-end", "0", "--n-points", "1",
               "--out", str(out)) == 0
    _, _, cols = read_csv(str(out))
    assert cols["t"].tolist() == [0.0]
    assert cols["abs"][0] == pytest.approx(1.0, abs=1e-9)


def test_survival_malformed_density_exits_2(tmp_path):
    out = tmp_path / "x.csv"
    code = run("survival", "--density", '{"kind": "nope"}', "--out", str(out))
    assert code == 2
    assert not out.exists()


def test_survival_unnormalized_table_rejected(tmp_path):
    out = tmp_path / "x.csv"
    spec = json.dumps({"kind": "user-table", "knots": [[0.0, 1.0], [2.0, 1.0]],
                       "support": [0.0, 2.0],
                       "interpolation": "linear"})  # integrates to 2
    code = run("survival", "--density", spec, "--out", str(out))
    assert code == 2
    assert not out.exists()


def test_survival_user_table_requires_support(tmp_path):
    out = tmp_path / "x.csv"
    spec = json.dumps({"kind": "user-table", "knots": [[0.0, 1.0], [2.0, 0.0]],
                       "interpolation": "linear"})
    assert run("survival", "--density", spec, "--out", str(out)) == 2
    assert not out.exists()


def test_survival_user_table_normalized(tmp_path):
    out = tmp_path / "tbl.csv"
    spec = json.dumps({"kind": "user-table", "support": [-1.0, 1.0],
                       "knots": [[-1.0, 0.0], [0.0, 1.0], [1.0, 0.0]],
                       "interpolation": "linear"})
    assert run("survival", "--density", spec, "--t-start", "0", "--t-end", "2",
               "--n-points", "3", "--out", str(out)) == 0
    _, _, cols = read_csv(str(out))
    assert cols["abs"][2] == pytest.approx(2.0 * (1.0 - math.cos(2.0)) / 4.0, abs=1e-12)


def test_survival_exponential_density(tmp_path):
    out = tmp_path / "e.csv"
    assert run("survival", "--density", '{"kind": "exponential", "rate": 1.0}',
               "--t-start", "0", "--t-end", "2", "--n-points", "3",
               "--out", str(out)) == 0
    _, _, cols = read_csv(str(out))
    assert cols["abs"][1] == pytest.approx(abs(1.0 / (1.0 + 1.0j)), abs=1e-9)


def test_reduced_rows_and_header(tmp_path):
    out = tmp_path / "r.csv"
    assert run("reduced", "--gamma", "1", "--omega0", "0",
               "--t-start", "0", "--t-end", "4", "--n-points", "3",
               "--out", str(out)) == 0
    params, names, cols = read_csv(str(out))
    assert names == ["t", "rho00", "rho11", "re_rho01", "im_rho01", "sigma_x"]
    assert params["gamma"] == "1.0"  # header echoes every parameter
    assert cols["sigma_x"][0] == 1.0  # t = 0 reproduces the input state
    assert cols["re_rho01"][0] == 0.5
    i = list(cols["t"]).index(2.0)
    assert cols["sigma_x"][i] == pytest.approx(0.3678794, abs=1e-6)
    assert np.all(cols["rho00"] == 0.5)


def test_reduced_psd_violation_exits_2(tmp_path):
    out = tmp_path / "bad.csv"
    code = run("reduced", "--rho00", "0.7", "--re-rho01", "0.5", "--out", str(out))
    assert code == 2
    assert not out.exists()


def test_gkls_compare_summary(tmp_path):
    out = tmp_path / "g.csv"
    assert run("gkls-compare", "--gamma", "1", "--omega0", "0",
               "--t-start", "0", "--t-end", "2", "--n-points", "3",
               "--out", str(out)) == 0
    params, names, cols = read_csv(str(out))
    assert names == ["t", "distance_matched", "distance_literal"]
    assert float(params["max_distance_matched"]) <= 1e-6
    assert cols["distance_matched"][0] == 0.0
    assert cols["distance_literal"][0] == 0.0
    i = list(cols["t"]).index(1.0)
    assert cols["distance_literal"][i] == pytest.approx(0.2356, abs=1e-4)


def test_pw_dephasing_report(tmp_path):
    out = tmp_path / "pw.txt"
    assert run("pw", "--amplitude", "dephasing", "--gamma", "1", "--out", str(out)) == 0
    text = out.read_text()
    assert "class = logarithmic-divergent" in text
    assert "rate = 0.5" in text
    # truncated integral at T=1000: (1/2) ln(1+T^2)
    assert "6.9077557789818" in text


def test_pw_constant_bounded(tmp_path):
    out = tmp_path / "pwc.txt"
    assert run("pw", "--amplitude", "constant", "--T-values", "1,10,100,1000",
               "--out", str(out)) == 0
    text = out.read_text()
    assert "class = bounded" in text


def test_pw_halfline_exp_bounded(tmp_path):
    out = tmp_path / "pwe.txt"
    assert run("pw", "--amplitude", "halfline-exp", "--rate", "1",
               "--out", str(out)) == 0
    text = out.read_text()
    assert "class = bounded" in text
    # sweep approaches pi ln 2 = 2.1776 from below
    assert "T=1000 = 2.161770584" in text


def test_potential_ramp_matches_reduced_factor(tmp_path):
    prefix = tmp_path / "ramp"
    assert run("potential", "--potential", "ramp", "--gamma", "1",
               "--t-start", "0.5", "--t-end", "4", "--n-points", "8",
               "--out", str(prefix)) == 0
    _, _, fac = read_csv(str(prefix) + "_factor.csv")
    for t, a in zip(fac["t"], fac["abs"]):
        assert a == pytest.approx(math.exp(-t / 2.0), abs=2e-9)


def test_potential_exp_outputs(tmp_path):
    prefix = tmp_path / "pexp"
    assert run("potential", "--potential", "exp", "--gamma", "1", "--out", str(prefix)) == 0
    fit_params, _, _ = read_csv(str(prefix) + "_factor.csv")
    assert float(fit_params["fit_rate"]) == pytest.approx(0.5, abs=1e-5)
    assert float(fit_params["fit_residual"]) < 1e-6
    _, _, dens = read_csv(str(prefix) + "_density.csv")
    i = int(np.argmin(np.abs(dens["x"])))
    assert dens["density"][i] == pytest.approx(4.0 / math.pi, abs=1e-3)
    _, _, rt = read_csv(str(prefix) + "_roundtrip.csv")
    assert rt["roundtrip_residual"].max() <= 1e-9


def test_potential_bounded_exits_2(tmp_path):
    prefix = tmp_path / "bnd"
    code = run("potential", "--potential", "expr:2 - 1/(1+exp(x))", "--out", str(prefix))
    assert code == 2


def test_potential_non_monotone_exits_2(tmp_path):
    prefix = tmp_path / "osc"
    code = run("potential", "--potential", "expr:2 + 0.5*sinh(x) - x", "--out", str(prefix))
    assert code == 2


def test_config_file_precedence(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"gamma": 2.0, "t_start": 0.0, "t_end": 2.0,
                               "n_points": 3, "out": str(tmp_path / "c1.csv")}))
    # config supplies everything
    assert run("survival", "--config", str(cfg)) == 0
    _, _, cols = read_csv(str(tmp_path / "c1.csv"))
    assert cols["abs"][1] == pytest.approx(math.exp(-1.0), abs=1e-7)  # gamma=2, t=1
    # explicit flag overrides the config value
    assert run("survival", "--config", str(cfg), "--gamma", "1",
               "--out", str(tmp_path / "c2.csv")) == 0
    _, _, cols = read_csv(str(tmp_path / "c2.csv"))
    assert cols["abs"][1] == pytest.approx(math.exp(-0.5), abs=1e-7)


def test_config_unknown_key_rejected(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"gamm": 2.0, "out": "x.csv"}))
    assert run("survival", "--config", str(cfg)) == 2


def test_missing_out_rejected():
    assert run("survival", "--gamma", "1") == 2


def test_byte_reproducibility(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["survival", "--gamma", "1.5", "--omega0", "0.5",
            "--t-start", "0", "--t-end", "5", "--n-points", "21"]
    assert run(*args, "--out", str(a)) == 0
    assert run(*args, "--out", str(b)) == 0
    assert a.read_bytes().replace(b"a.csv", b"") == b.read_bytes().replace(b"b.csv", b"")


def test_csv_round_trip_17_digits(tmp_path):
    out = tmp_path / "rt.csv"
    assert run("survival", "--gamma", "1", "--t-start", "0", "--t-end", "7",
               "--n-points", "15", "--out", str(out)) == 0
    _, _, cols = read_csv(str(out))
    from decaylab import (DephasingParams, QuadratureConfig, amplitude_series,
                          lorentzian_density)
    series = amplitude_series(lorentzian_density(DephasingParams(1.0, 0.0)),
                              np.linspace(0, 7, 15), QuadratureConfig())
    # full double-precision round trip through the text format
    assert np.array_equal(cols["re"], series.values.real)
    assert np.array_equal(cols["im"], series.values.imag)


def test_structured_text_format(tmp_path):
    out = tmp_path / "s.txt"
    assert run("survival", "--format", "structured-text", "--t-start", "0",
               "--t-end", "2", "--n-points", "3", "--out", str(out)) == 0
    text = out.read_text()
    assert "[data]" in text and "t = 0,1,2" in text


def test_numerical_failure_writes_partial_and_manifest(tmp_path, monkeypatch):
    out = tmp_path / "f.csv"

    def fake_series(d, times, cfg, meta=None):
        t = np.asarray(list(times), dtype=float)
        series = ComplexTimeSeries(t, np.ones(t.shape, dtype=complex))
        raise SeriesFailure(series, [QuadratureFailure("stub", 0.5 + 0.0j, 1e-3, t=float(t[-1]))])

    monkeypatch.setattr(cli.oscint, "amplitude_series", fake_series)
    code = run("survival", "--t-start", "0", "--t-end", "2", "--n-points", "3",
               "--out", str(out))
    assert code == 3
    assert out.exists()
    manifest = (str(out) + ".failures")
    text = open(manifest).read()
    assert "error_bound" in text and "stub" in text


def test_argparse_usage_error_is_exit_2():
    with pytest.raises(SystemExit) as e:
        run("survival", "--spacing", "cubic", "--out", "x.csv")
    assert e.value.code == 2


def test_log_spacing_grid(tmp_path):
    out = tmp_path / "log.csv"
    assert run("survival", "--t-start", "0.1", "--t-end", "10", "--n-points", "5",
               "--spacing", "log", "--out", str(out)) == 0
    _, _, cols = read_csv(str(out))
    assert cols["t"][0] == pytest.approx(0.1)
    ratios = cols["t"][1:] / cols["t"][:-1]
    assert np.allclose(ratios, ratios[0])
    assert run("survival", "--t-start", "0", "--t-end", "1", "--spacing", "log",
               "--out", str(out)) == 2
