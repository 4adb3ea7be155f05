import json
import os
import subprocess
import sys

import pytest

from shellentropy.cli import EXIT_DOMAIN, EXIT_USAGE, UsageError, main, parse_config
from shellentropy.report import read_csv


def _run(tmp_path, *args):
    return main([*args, "--out", str(tmp_path / "out"), "--cache-dir", str(tmp_path / "cache")])


def test_parse_flags_with_defaults():
    command, cfg = parse_config(["entropy", "--n", "12", "--l1", "4", "--delta2", "0.5", "--seed", "7"])
    assert command == "entropy"
    assert (cfg.n, cfg.cut, cfg.delta2, cfg.seed) == (12, 4, (0.5,), 7)
    assert (cfg.edge_trim, cfg.samples, cfg.shell, cfg.window_count) == (0.02, 500, "peak", None)


def test_l1_must_be_below_n():
    with pytest.raises(UsageError, match="l1"):
        parse_config(["entropy", "--n", "12", "--l1", "12", "--seed", "1"])


def test_seed_is_mandatory():
    with pytest.raises(UsageError, match="seed"):
        parse_config(["spectrum", "--n", "6"])


def test_paper_preset():
    _, cfg = parse_config(["fit", "--preset", "paper-n16", "--seed", "1"])
    assert (cfg.n, cfg.l1, cfg.delta2) == (16, 6, (0.0, 0.2, 0.5))


def test_config_file_and_flag_override(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("# experiment\nn = 10\nl1 = 3  # cut\ndelta2 = 0.0, 0.5\nseed = 4\nwindow-count = 12\n")
    _, cfg = parse_config(["entropy", "--config", str(path), "--l1", "5"])
    assert (cfg.n, cfg.l1, cfg.delta2, cfg.seed, cfg.window_count) == (10, 5, (0.0, 0.5), 4, 12)


def test_l1_range_syntax():
    _, cfg = parse_config(["volume", "--n", "10", "--l1-range", "1-3,5", "--seed", "1"])
    assert cfg.l1_range == (1, 2, 3, 5)
    _, cfg = parse_config(["volume", "--n", "10", "--seed", "1"])
    assert cfg.cuts == (1, 2, 3, 4, 5)


@pytest.mark.parametrize("argv", [
    ["spectrum", "--n", "12", "--seed", "1", "--edge-trim", "0.7"],
    ["spectrum", "--n", "1", "--seed", "1"],
    ["spectrum", "--n", "30", "--seed", "1"],
    ["spectrum", "--n", "8", "--seed", "1", "--window-count", "1"],
    ["shells", "--n", "8", "--seed", "1", "--samples", "0"],
    ["shells", "--n", "8", "--seed", "1", "--shell", "middle"],
    ["shells", "--n", "8", "--seed", "1", "--shell", "center:x:1"],
    ["volume", "--n", "8", "--seed", "1", "--l1-range", "2"],
    ["volume", "--n", "8", "--seed", "1", "--l1-range", "1-6"],
    ["volume", "--n", "8", "--seed", "1", "--shell", "all"],
    ["spectrum", "--n", "8", "--seed", "1", "--delta2", "nan"],
    ["spectrum", "--n", "eight", "--seed", "1"],
    ["spectrum", "--n", "8", "--seed", "1", "--delta2", "a,b"],
    ["frobnicate", "--n", "8"],
    ["spectrum", "--config", "/nonexistent/file.cfg", "--seed", "1"],
    ["spectrum", "--preset", "nope", "--seed", "1"],
    ["page", "--d1", "0", "--d2", "3"],
    [],
])
def test_malformed_configs_exit_with_usage_code(argv, capsys):
    assert main(argv) == EXIT_USAGE
    assert capsys.readouterr().err


@pytest.mark.parametrize("text", ["n 12\n", "bogus = 3\n", "n = twelve\n", "seed = 1.5\n"])
def test_malformed_config_files(tmp_path, text):
    path = tmp_path / "bad.cfg"
    path.write_text(text)
    assert main(["spectrum", "--config", str(path), "--seed", "1", "--n", "6"]) == EXIT_USAGE


def test_page_command(capsys):
    assert main(["page", "--d1", "2", "--d2", "4"]) == 0
    out = capsys.readouterr().out
    assert "0.509524" in out and "0.693147" in out


def test_spectrum_n4(tmp_path):
    assert _run(tmp_path, "spectrum", "--n", "4", "--seed", "1") == 0
    meta, rows = read_csv(tmp_path / "out" / "delta2=0.5" / "spectrum.csv")
    assert len(rows) == 16
    assert list(rows[0]) == ["energy", "n_up", "sector_index"]
    assert meta["N"] == "4" and meta["seed"] == "1"
    _, dos_rows = read_csv(tmp_path / "out" / "delta2=0.5" / "dos.csv")
    assert list(dos_rows[0]) == ["center", "width", "count", "dos", "ln_dos"]
    manifest = json.loads((tmp_path / "out" / "manifest.json").read_text())
    assert set(manifest["files"]) == {"delta2=0.5/spectrum.csv", "delta2=0.5/dos.csv"}


def test_every_command_emits_its_schema(tmp_path):
    base = ["--n", "8", "--l1", "3", "--delta2", "0.0,0.5", "--seed", "5", "--samples", "20",
            "--window-count", "8"]
    expected = {
        "entropy": {"eigenstate_entropy.csv": ["energy", "n_up", "sector_index", "S1_nats"]},
        "shells": {"shell_average.csv": ["center", "width", "d_E", "method", "samples", "seed",
                                         "S1_mean", "S1_std", "exp_S1_mean"],
                   "product_shell.csv": ["center", "width", "d_E", "pairs", "d1", "d2",
                                         "ln_d1d2_over_ln_dE"]},
        "fit": {"fit_lndos.csv": ["half", "slope", "intercept", "r2", "n_points", "l1", "N",
                                  "delta2", "predicted_slope"],
                "gamma.csv": ["center", "d_E", "gamma_measured", "gamma_predicted", "eta_measured"]},
        "volume": {"volume_law.csv": ["l1", "S1_mean", "S1_std"]},
    }
    for command, files in expected.items():
        assert _run(tmp_path, command, *base) == 0, command
        for d2 in ("0.0", "0.5"):
            for name, columns in files.items():
                _, rows = read_csv(tmp_path / "out" / f"delta2={d2}" / name)
                assert rows and list(rows[0]) == columns, name
    _, rows = read_csv(tmp_path / "out" / "delta2=0.5" / "shell_average.csv")
    assert [r["method"] for r in rows] == ["eigenstate", "haar", "product"]
    _, rows = read_csv(tmp_path / "out" / "delta2=0.5" / "volume_law.csv")
    assert [r["l1"] for r in rows] == ["1", "2", "3", "4"]


def test_shell_policies_on_cli(tmp_path):
    base = ["shells", "--n", "8", "--seed", "5", "--samples", "5", "--window-count", "8"]
    assert _run(tmp_path, *base, "--shell", "all") == 0
    _, rows = read_csv(tmp_path / "out" / "delta2=0.5" / "product_shell.csv")
    assert len(rows) == 8
    assert _run(tmp_path, *base, "--shell", "center:0.0:0.5") == 0
    assert _run(tmp_path, *base, "--shell", "window:3") == 0


def test_domain_errors_exit_4(tmp_path, capsys):
    base = ["shells", "--n", "8", "--seed", "5", "--samples", "5"]
    assert _run(tmp_path, *base, "--shell", "center:100:0.1") == EXIT_DOMAIN
    assert "shells" in capsys.readouterr().err
    assert _run(tmp_path, *base, "--shell", "window:99") == EXIT_DOMAIN
    # 256 states cannot fill 200 windows
    assert _run(tmp_path, "spectrum", "--n", "8", "--seed", "1", "--window-count", "200") == EXIT_DOMAIN


def test_degenerate_window_exit_4(tmp_path, capsys):
    # N=4, delta2=0 has highly degenerate multiplets
    assert _run(tmp_path, "spectrum", "--n", "4", "--delta2", "0", "--seed", "1",
                "--window-count", "8", "--edge-trim", "0") == EXIT_DOMAIN
    assert "degenerate" in capsys.readouterr().err


def test_cache_round_trip_and_bypass(tmp_path):
    args = ["entropy", "--n", "8", "--l1", "3", "--seed", "2"]
    assert _run(tmp_path, *args) == 0
    first = json.loads((tmp_path / "out" / "manifest.json").read_text())["files"]
    assert any((tmp_path / "cache").rglob("evecs_4.npy"))
    assert _run(tmp_path, *args) == 0
    second = json.loads((tmp_path / "out" / "manifest.json").read_text())["files"]
    assert main([*args, "--out", str(tmp_path / "nocache"), "--no-cache"]) == 0
    third = json.loads((tmp_path / "nocache" / "manifest.json").read_text())["files"]
    assert first == second == third


def _cli_manifest(tmp_path, name, threads):
    env = dict(os.environ, OMP_NUM_THREADS=str(threads), OPENBLAS_NUM_THREADS=str(threads),
               MKL_NUM_THREADS=str(threads), SHELLENTROPY_CACHE=str(tmp_path / f"cache-{name}"))
    out = tmp_path / name
    cmd = [sys.executable, "-m", "shellentropy.cli", "shells", "--n", "9", "--l1", "4",
           "--seed", "13", "--samples", "40", "--out", str(out)]
    subprocess.run(cmd, check=True, env=env)
    manifest = json.loads((out / "manifest.json").read_text())
    manifest.pop("timings_s")
    manifest["config"].pop("out")
    return manifest


def test_determinism_across_thread_counts(tmp_path):
    one = _cli_manifest(tmp_path, "a", 1)
    again = _cli_manifest(tmp_path, "b", 1)
    many = _cli_manifest(tmp_path, "c", 4)
    assert one == again == many
    assert len(one["files"]) == 2
