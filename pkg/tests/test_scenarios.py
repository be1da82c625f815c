import json
import math
from pathlib import Path

import numpy as np
import pytest

from nsblab.cli import main
from nsblab.constants import PhysicalConstants
from nsblab.scenarios import (
    ConfigError,
    format_planck_report,
    parse_set_overrides,
    report_planck_numbers,
    resolve_config,
    run_scenario,
    scenario_names,
)


def read_csv(path):
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n").split(",")
        rows = [line.rstrip("\n").split(",") for line in fh]
    return header, rows


# ------------------------------------------------------------ config layer


def test_scenario_catalog():
    assert scenario_names() == ["fig1", "dispersion_scan", "regime_compare",
                                "convergence", "pde_packet"]


def test_resolve_config_defaults_and_merge():
    params = resolve_config("fig1")
    assert params["A"] == 1.0
    assert params["horizon_tau"] == [100.0, 1000.0]
    merged = resolve_config("fig1", {"A": 2}, {"samples_per_period": 16})
    assert merged["A"] == 2.0  # integers accepted where floats expected
    assert merged["samples_per_period"] == 16


def test_unknown_scenario_and_keys_rejected():
    with pytest.raises(ConfigError):
        resolve_config("nope")
    with pytest.raises(ConfigError):
        resolve_config("fig1", {"amplitude": 1.0})
    with pytest.raises(ConfigError):
        resolve_config("fig1", overrides={"n": 16})  # key from another scenario


def test_scenario_key_in_config_must_match():
    assert resolve_config("fig1", {"scenario": "fig1"})["A"] == 1.0
    with pytest.raises(ConfigError):
        resolve_config("fig1", {"scenario": "convergence"})


def test_type_coercion_errors():
    with pytest.raises(ConfigError):
        resolve_config("fig1", {"A": "big"})
    with pytest.raises(ConfigError):
        resolve_config("fig1", {"samples_per_period": 2.5})
    with pytest.raises(ConfigError):
        resolve_config("fig1", {"horizon_tau": [100.0, "x"]})
    with pytest.raises(ConfigError):
        resolve_config("pde_packet", {"allow_unstable": "yes"})


def test_parse_set_overrides():
    got = parse_set_overrides(["A=2.5", "form=schrodinger",
                               "k_values=[0.1,0.2]", "allow_unstable=true"])
    assert got == {"A": 2.5, "form": "schrodinger",
                   "k_values": [0.1, 0.2], "allow_unstable": True}
    with pytest.raises(ConfigError):
        parse_set_overrides(["no_equals_sign"])


# ------------------------------------------------------------- fig1 output


def test_fig1_outputs(tmp_path):
    manifest = run_scenario("fig1", {"horizon_tau": [20.0]}, out_dir=tmp_path)
    header, rows = read_csv(tmp_path / "fig1_horizon20.csv")
    assert header == ["t_over_tau", "re_psi", "im_psi", "abs_psi",
                      "re_psi_analytic", "im_psi_analytic", "abs_psi_analytic"]
    # first row is the zero initial condition
    assert [float(x) for x in rows[0]] == [0.0] * 7
    # numeric vs analytic agreement everywhere
    data = np.array([[float(x) for x in row] for row in rows])
    err = np.hypot(data[:, 1] - data[:, 4], data[:, 2] - data[:, 5])
    assert np.max(err) < 1e-6
    # bounded oscillation
    assert np.min(data[:, 1]) >= -1e-6
    assert np.max(data[:, 1]) <= 2.0 + 1e-6
    assert manifest["outputs"][0]["rows"] == len(rows)


def test_fig1_row_count_follows_sampling_rule():
    import tempfile

    with tempfile.TemporaryDirectory() as d:
        manifest = run_scenario(
            "fig1", {"horizon_tau": [50.0], "samples_per_period": 8},
            out_dir=d)
    expected = math.floor(50.0 / (math.pi / 8.0)) + 1
    assert manifest["outputs"][0]["rows"] == expected


def test_fig1_rejects_zero_amplitude(tmp_path):
    with pytest.raises(ConfigError):
        run_scenario("fig1", {"A": 0.0}, out_dir=tmp_path)


# -------------------------------------------------------------- dispersion


def test_dispersion_scan_stable_rows(tmp_path):
    manifest = run_scenario("dispersion_scan", out_dir=tmp_path)
    header, rows = read_csv(tmp_path / "dispersion_scan_modes.csv")
    assert header == ["k_hat", "omega_minus_analytic", "omega_minus_measured",
                      "rel_err", "resolved", "growth_rate_analytic",
                      "growth_rate_measured"]
    assert len(rows) == 4
    for row in rows:
        assert float(row[3]) < 1e-3  # spectral default
        assert row[4] == "1"
        assert row[5] == "nan" and row[6] == "nan"
    assert manifest["solver"]["window_capped"] is True


def test_dispersion_scan_empty_k_list(tmp_path):
    run_scenario("dispersion_scan", {"k_values": []}, out_dir=tmp_path)
    header, rows = read_csv(tmp_path / "dispersion_scan_modes.csv")
    assert len(header) == 7
    assert rows == []


def test_dispersion_scan_growth_row_needs_override(tmp_path):
    with pytest.raises(ConfigError):
        run_scenario("dispersion_scan", {"k_values": [1.25]}, out_dir=tmp_path)
    run_scenario("dispersion_scan",
                 {"k_values": [1.25], "allow_unstable": True},
                 out_dir=tmp_path)
    _, rows = read_csv(tmp_path / "dispersion_scan_modes.csv")
    row = rows[0]
    assert row[1] == "nan" and row[2] == "nan" and row[3] == "nan"
    growth_analytic = float(row[5])
    growth_measured = float(row[6])
    assert growth_analytic == pytest.approx(math.sqrt(1.25**2 - 1.0), rel=1e-12)
    assert growth_measured == pytest.approx(growth_analytic, rel=0.02)


def test_dispersion_scan_rejects_overcritical_potential(tmp_path):
    with pytest.raises(ConfigError):
        run_scenario("dispersion_scan", {"v": 0.6}, out_dir=tmp_path)


# ---------------------------------------------------------- regime compare


def test_regime_compare_distances(tmp_path):
    run_scenario("regime_compare", out_dir=tmp_path)
    _, rows = read_csv(tmp_path / "regime_compare_distances.csv")
    rs = [float(r[0]) for r in rows]
    uniform = [float(r[1]) for r in rows]
    packet = [float(r[2]) for r in rows]
    assert rs == [0.1, 0.01, 0.001]
    assert all(u < 1e-12 for u in uniform)
    assert packet[0] > packet[1] > packet[2] > 0.0


# ------------------------------------------------------------- convergence


def test_convergence_scenario(tmp_path):
    manifest = run_scenario("convergence", out_dir=tmp_path)
    assert manifest["solver"]["fitted_order"] == pytest.approx(4.0, abs=0.2)
    _, rows = read_csv(tmp_path / "convergence_errors.csv")
    assert len(rows) == 3


def test_convergence_rejects_non_halving(tmp_path):
    with pytest.raises(ConfigError):
        run_scenario("convergence", {"dts": [4e-3, 3e-3, 2e-3]},
                     out_dir=tmp_path)
    with pytest.raises(ConfigError):
        run_scenario("convergence", {"dts": [4e-3, 2e-3]}, out_dir=tmp_path)


# -------------------------------------------------------------- pde packet


def test_pde_packet_width_output(tmp_path):
    manifest = run_scenario("pde_packet", out_dir=tmp_path)
    header, rows = read_csv(tmp_path / "pde_packet_width.csv")
    assert header == ["t_hat", "width_measured", "width_analytic", "rel_err"]
    rels = [float(r[3]) for r in rows]
    assert max(rels) < 1e-3
    final = rows[-1]
    assert float(final[1]) == pytest.approx(4.0, rel=1e-3)  # doubled width
    prof_header, prof_rows = read_csv(tmp_path / "pde_packet_profile.csv")
    assert prof_header == ["xi_hat", "re_psi", "im_psi", "abs_psi"]
    assert len(prof_rows) == 256
    assert manifest["solver"]["form"] == "schrodinger"


def test_pde_packet_full_form_requires_unstable_opt_in(tmp_path):
    # the default grid resolves wavenumbers above critical, so the full
    # form refuses to run without the override
    with pytest.raises(ConfigError):
        run_scenario("pde_packet", {"form": "full", "horizon_tau": 1.0},
                     out_dir=tmp_path)


def test_pde_packet_full_form_on_coarse_grid(tmp_path):
    # a grid whose largest wavenumber is below critical runs cleanly
    run_scenario("pde_packet",
                 {"form": "full", "n": 32, "L": 128.0, "sigma0": 8.0,
                  "horizon_tau": 10.0},
                 out_dir=tmp_path)
    _, rows = read_csv(tmp_path / "pde_packet_width.csv")
    assert all(r[2] == "nan" for r in rows)  # no analytic law for this form


def test_pde_packet_rejects_unresolved_packet(tmp_path):
    with pytest.raises(ConfigError):
        run_scenario("pde_packet", {"sigma0": 0.1}, out_dir=tmp_path)


# ----------------------------------------------------- manifest & formats


def test_manifest_contents(tmp_path):
    manifest = run_scenario("convergence", out_dir=tmp_path)
    on_disk = json.loads((tmp_path / "manifest.json").read_text())
    assert on_disk["scenario"] == "convergence"
    assert on_disk["config"]["dts"] == [4e-3, 2e-3, 1e-3]
    assert on_disk["constants"]["hbar"] == 1.054571817e-34
    assert on_disk["derived_scales"]["tau_p"] == pytest.approx(5.391247293957071e-44)
    assert "wall_clock_seconds" in on_disk
    assert on_disk["version"] == manifest["version"]
    listed = {entry["path"] for entry in on_disk["outputs"]}
    csvs = {p.name for p in Path(tmp_path).iterdir() if p.suffix == ".csv"}
    assert csvs == listed


def test_csv_float_format_is_full_precision(tmp_path):
    run_scenario("convergence", out_dir=tmp_path)
    _, rows = read_csv(tmp_path / "convergence_errors.csv")
    for row in rows:
        for cell in row:
            assert "e" in cell  # scientific notation
            mantissa = cell.split("e")[0]
            assert len(mantissa.replace("-", "").replace(".", "")) == 17
            assert float(cell) == float(repr(float(cell)))  # round-trips


def test_reruns_are_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        run_scenario("dispersion_scan", {"k_values": [0.25, 0.5]}, out_dir=out)
    assert (a / "dispersion_scan_modes.csv").read_bytes() == \
        (b / "dispersion_scan_modes.csv").read_bytes()
    ma = json.loads((a / "manifest.json").read_text())
    mb = json.loads((b / "manifest.json").read_text())
    for m in (ma, mb):
        m.pop("wall_clock_seconds")
        m.pop("output_dir")
    assert ma == mb


def test_plotscript_emission(tmp_path):
    manifest = run_scenario("fig1", {"horizon_tau": [10.0]}, out_dir=tmp_path,
                            plotscript=True)
    script = (tmp_path / "plot_fig1.gp").read_text()
    assert "set datafile separator ','" in script
    assert "fig1_horizon10.csv" in script
    assert any(e["path"] == "plot_fig1.gp" for e in manifest["outputs"])


# ----------------------------------------------------------- planck report


def test_report_planck_numbers_values():
    numbers = report_planck_numbers()
    assert numbers["tau_p_seconds"] == pytest.approx(5.391e-44, rel=5e-3)
    assert numbers["energy_p_gev"] == pytest.approx(1.2209e19, rel=5e-3)
    assert numbers["oscillation_angular_frequency_per_second"] == pytest.approx(
        2.0 / numbers["tau_p_seconds"], rel=1e-12)
    assert numbers["oscillation_period_seconds"] == pytest.approx(
        math.pi * numbers["tau_p_seconds"], rel=1e-12)
    assert numbers["period_over_attosecond"] == pytest.approx(
        numbers["oscillation_period_seconds"] / 1e-18, rel=1e-12)
    text = format_planck_report(numbers)
    assert "tau_p" in text and "GeV" in text


def test_report_planck_numbers_natural_units():
    numbers = report_planck_numbers(PhysicalConstants.natural_units())
    assert numbers["tau_p_seconds"] == 1.0
    assert numbers["energy_p_joules"] == 1.0


# -------------------------------------------------------------------- CLI


def test_cli_run_and_list(tmp_path, capsys):
    rc = main(["run", "convergence", "--out", str(tmp_path),
               "--set", "horizon_tau=5.0"])
    assert rc == 0
    out = capsys.readouterr().out
    assert "manifest.json" in out
    assert "fitted_order" in out
    assert (tmp_path / "convergence_errors.csv").exists()

    rc = main(["list"])
    assert rc == 0
    out = capsys.readouterr().out
    for name in scenario_names():
        assert name in out


def test_cli_report_planck_json(capsys):
    rc = main(["report", "planck", "--json"])
    assert rc == 0
    data = json.loads(capsys.readouterr().out)
    assert data["energy_p_gev"] == pytest.approx(1.2209e19, rel=5e-3)
    rc = main(["report", "planck"])
    assert rc == 0
    assert "GeV" in capsys.readouterr().out


def test_cli_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"scenario": "fig1", "horizon_tau": [10.0],
                               "samples_per_period": 8}))
    rc = main(["run", "fig1", "--config", str(cfg), "--out",
               str(tmp_path / "out"), "--set", "A=2.0"])
    assert rc == 0
    capsys.readouterr()
    manifest = json.loads((tmp_path / "out" / "manifest.json").read_text())
    assert manifest["config"]["A"] == 2.0
    assert manifest["config"]["samples_per_period"] == 8


def test_cli_exit_code_on_config_error(tmp_path, capsys):
    assert main(["run", "fig1", "--set", "A=0", "--out", str(tmp_path)]) == 2
    assert "error" in capsys.readouterr().err
    assert main(["run", "unknown_scenario", "--out", str(tmp_path)]) == 2
    capsys.readouterr()
    assert main(["run", "fig1", "--set", "bogus=1", "--out", str(tmp_path)]) == 2
    capsys.readouterr()
    cfg = tmp_path / "broken.json"
    cfg.write_text("{not json")
    assert main(["run", "fig1", "--config", str(cfg), "--out", str(tmp_path)]) == 2
    capsys.readouterr()


def test_cli_exit_code_on_blow_up(tmp_path, capsys):
    rc = main(["run", "pde_packet", "--out", str(tmp_path),
               "--set", "allow_unstable=true", "--set", "dt=2.0",
               "--set", "horizon_tau=1000.0"])
    assert rc == 3
    assert "blew up" in capsys.readouterr().err
