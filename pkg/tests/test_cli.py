"""Command-line behaviour: CSV emission, overrides, exit codes, and
byte-identical reruns."""

import pytest

from opprelay.cli import EXIT_CONFIG, EXIT_NUMERICAL, EXIT_OK, main

CURVE_HEADER = (
    "snr_db,scheme,combiner,outage_analytic,outage_asymptotic,"
    "outage_mc,mc_ci_low,mc_ci_high,trials,failures"
)


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestBasics:
    def test_analytic_preset_to_stdout(self, capsys):
        code, out, _ = run_cli(capsys, "analytic", "--scenario", "fig4_K1")
        assert code == EXIT_OK
        lines = out.splitlines()
        assert lines[0] == CURVE_HEADER
        assert len(lines) == 1 + 11  # header + 0..50 dB step 5

    def test_presets_list(self, capsys):
        code, out, _ = run_cli(capsys, "presets", "list")
        assert code == EXIT_OK
        assert "fig8_alpha_sweep" in out
        assert "fig2_rayleigh_K3" in out

    def test_scenario_file_input(self, capsys):
        code, out, _ = run_cli(
            capsys, "analytic", "--scenario", "scenarios/fig4_K2.yaml"
        )
        assert code == EXIT_OK
        assert out.startswith(CURVE_HEADER)

    @pytest.mark.filterwarnings("ignore:only .* failures")
    def test_simulate_with_overrides(self, capsys):
        code, out, _ = run_cli(
            capsys,
            "simulate", "--scenario", "fig2_rayleigh_K1",
            "--trials", "20000", "--seed", "9",
        )
        assert code == EXIT_OK
        assert "20000" in out

    def test_fit_diversity(self, capsys):
        code, out, _ = run_cli(
            capsys, "fit-diversity", "--scenario", "fig4_K3",
            "--window-db", "35", "45",
        )
        assert code == EXIT_OK
        row = out.splitlines()[1].split(",")
        assert abs(float(row[4]) - 3.8) < 0.15

    def test_sweep_alpha(self, capsys):
        code, out, _ = run_cli(
            capsys,
            "sweep-alpha", "--scenario", "fig8_alpha_sweep",
            "--trials", "5000",
        )
        assert code == EXIT_OK
        assert out.splitlines()[0].startswith("alpha,scheme,combiner,outage_mc")
        assert len(out.splitlines()) == 1 + 27  # 9 alphas x 3 schemes


class TestFiles:
    def test_out_writes_file(self, capsys, tmp_path):
        target = tmp_path / "curve.csv"
        code, out, err = run_cli(
            capsys, "analytic", "--scenario", "fig4_K1", "--out", str(target)
        )
        assert code == EXIT_OK
        assert out == ""
        assert target.read_text().startswith(CURVE_HEADER)

    def test_multi_scenario_suffixes(self, capsys, tmp_path):
        target = tmp_path / "fig4.csv"
        code, _, _ = run_cli(
            capsys, "analytic", "--scenario", "fig4_varyK", "--out", str(target)
        )
        assert code == EXIT_OK
        for k in (1, 2, 3):
            assert (tmp_path / f"fig4_fig4_K{k}.csv").exists()

    @pytest.mark.filterwarnings("ignore:only .* failures")
    def test_rerun_byte_identical(self, capsys, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        for target in (a, b):
            code, _, _ = run_cli(
                capsys,
                "compare", "--scenario", "fig2_rayleigh_K1",
                "--trials", "20000", "--out", str(target),
            )
            assert code == EXIT_OK
        assert a.read_bytes() == b.read_bytes()

    @pytest.mark.filterwarnings("ignore:only .* failures")
    def test_worker_count_byte_identical(self, capsys, tmp_path):
        a, b = tmp_path / "w1.csv", tmp_path / "w2.csv"
        for target, workers in ((a, "1"), (b, "2")):
            code, _, _ = run_cli(
                capsys,
                "simulate", "--scenario", "fig7_mrc_compare",
                "--trials", "30000", "--workers", workers, "--out", str(target),
            )
            assert code == EXIT_OK
        assert a.read_bytes() == b.read_bytes()

    def test_bounds_companion_file(self, capsys, tmp_path):
        import yaml

        cfg = yaml.safe_load(open("scenarios/fig2_rayleigh_K2.yaml"))
        cfg["outputs"] = ["analytic", "bounds"]
        cfg["schemes"] = ["af"]
        path = tmp_path / "bounds_scenario.yaml"
        path.write_text(yaml.safe_dump(cfg))
        target = tmp_path / "curve.csv"
        code, _, _ = run_cli(capsys, "compare", "--scenario", str(path), "--out", str(target))
        assert code == EXIT_OK
        side = tmp_path / "curve.bounds.csv"
        assert side.exists()
        assert side.read_text().startswith("snr_db,relay_index,m_min,bound_low")


class TestExitCodes:
    def test_unknown_preset_is_config_error(self, capsys):
        code, _, err = run_cli(capsys, "analytic", "--scenario", "fig99")
        assert code == EXIT_CONFIG
        assert "configuration error" in err

    def test_mrc_analytic_is_config_error(self, capsys):
        code, _, err = run_cli(capsys, "analytic", "--scenario", "fig7_mrc_compare")
        assert code == EXIT_CONFIG
        assert "selection-combining only" in err

    def test_alpha_sweep_via_curve_command_is_config_error(self, capsys):
        code, _, _ = run_cli(capsys, "simulate", "--scenario", "fig8_alpha_sweep")
        assert code == EXIT_CONFIG

    def test_underflowed_curve_is_numerical_error(self, capsys):
        # beyond ~1600 dB the closed form underflows to exactly zero, which
        # the slope fit must refuse rather than silently drop
        code, _, err = run_cli(
            capsys,
            "fit-diversity", "--scenario", "fig4_K3",
            "--window-db", "1600", "1610",
        )
        assert code == EXIT_NUMERICAL
        assert "numerical error" in err
