import os

import pytest

from pymfd import cli
from pymfd import errors
from pymfd import params

SMALL_RUN = [
    "--set",
    "synthetic_gas=200",
    "--set",
    "synthetic_dm=200",
    "--set",
    "synthetic_star=20",
    "--grid-sizes",
    "8",
    "--map-size",
    "8",
    "--tracers",
    "20",
    "--neighbours",
    "8",
]


def test_generate_prints_manifest_path(tmp_path, capsys):
    output = str(tmp_path / "run")
    assert cli.main(["generate", "--output", output, "--fields", "Mgas", *SMALL_RUN]) == 0
    assert capsys.readouterr().out.strip() == os.path.join(output, "manifest.json")
    assert os.path.exists(os.path.join(output, "maps_Mgas.cmdgrid"))


def test_missing_property_exits_with_data_error(tmp_path):
    argv = ["generate", "--output", str(tmp_path), "--fields", "B", "--set", "synthetic_magnetic=false", *SMALL_RUN]
    assert cli.main(argv) == errors.DataError.exit_code == 2


def test_bad_arguments_exit_with_usage_error(capsys):
    assert cli.main(["generate", "--map-size"]) == 1
    assert cli.main(["no-such-command"]) == 1
    assert "pymfd" in capsys.readouterr().err


def test_bad_config_value_exits_with_usage_error(tmp_path):
    assert cli.main(["generate", "--output", str(tmp_path), "--set", "kernel2d=gaussian"]) == 1


def test_unknown_log_level_exits_with_usage_error():
    assert cli.main(["--log-level", "chatty", "check-arch"]) == 1


def test_check_arch_prints_every_layer(capsys):
    assert cli.main(["check-arch", "--width", "2"]) == 0
    out = capsys.readouterr().out
    assert out.splitlines()[-1].endswith("-> 12")
    assert "-> 256x1x1" in out


def test_check_arch_reports_underflow():
    assert cli.main(["check-arch", "--input", "1,64,64"]) == 2


def test_split_counts(capsys):
    assert cli.main(["split", "--groups", "1000"]) == 0
    out = capsys.readouterr().out
    assert "train: 13500 items" in out
    assert "validation: 750 items" in out
    assert "test: 750 items" in out


def test_split_without_groups_is_a_usage_error():
    assert cli.main(["split"]) == 1


def test_loss_eval(tmp_path, capsys):
    path = tmp_path / "predictions.txt"
    path.write_text("1.0 1.5 0.7071067811865476\n2.0 1.5 0.7071067811865476\n")
    assert cli.main(["loss-eval", str(path)]) == 0
    out = capsys.readouterr().out
    assert "batch: 2 x 1" in out
    assert float(out.split("loss (sum): ")[1].split()[0]) == pytest.approx(0.625)


def test_sample_params_writes_labels(tmp_path):
    out = str(tmp_path / "labels.txt")
    assert cli.main(["sample-params", "--n", "10", "--seed", "4", "--out", out]) == 0
    assert params.read_labels(out) == params.sample_lhs(10, 4, params.Suite.ILLUSTRIS_TNG)


def test_synth_then_radii_then_info(tmp_path, capsys):
    snap = str(tmp_path / "snap.cmdsnap")
    assert cli.main(["synth", "--out", snap, "--gas", "100", "--dm", "100", "--star", "5", "--clumps", "2"]) == 0
    radii = str(tmp_path / "radii.txt")
    assert cli.main(["radii", snap, "--species", "gas", "-k", "8", "--out", radii]) == 0
    lines = (tmp_path / "radii.txt").read_text().splitlines()
    assert lines[0] == "# species index radius"
    assert len(lines) == 101
    assert lines[1].startswith("gas 0 ")

    output = str(tmp_path / "run")
    argv = ["generate", "--snapshot", snap, "--output", output, "--fields", "Mgas", "--grid-sizes", "8"]
    assert cli.main([*argv, "--map-size", "8", "--tracers", "20", "--neighbours", "8"]) == 0
    capsys.readouterr()
    assert cli.main(["info", os.path.join(output, "maps_Mgas.cmdgrid")]) == 0
    assert "records: 15" in capsys.readouterr().out


def test_render_command(tmp_path, capsys):
    output = str(tmp_path / "run")
    assert cli.main(["generate", "--output", output, "--fields", "Mgas", *SMALL_RUN]) == 0
    image = str(tmp_path / "map.pgm")
    assert cli.main(["render", os.path.join(output, "maps_Mgas.cmdgrid"), "--record", "3", "--out", image]) == 0
    assert capsys.readouterr().out.strip().endswith(": 8x8")
    assert (tmp_path / "map.pgm").read_bytes().startswith(b"P5 8 8 255\n")


def test_bad_synthetic_counts_exit_with_usage_error(tmp_path):
    assert cli.main(["synth", "--out", str(tmp_path / "snap.cmdsnap"), "--clumps", "0"]) == 1
    assert cli.main(["synth", "--out", str(tmp_path / "snap.cmdsnap"), "--gas", "-5"]) == 1
    assert not (tmp_path / "snap.cmdsnap").exists()


def test_bad_sample_params_arguments_exit_with_usage_error(tmp_path):
    out = str(tmp_path / "labels.txt")
    assert cli.main(["sample-params", "--n", "0", "--out", out]) == 1
    assert cli.main(["sample-params", "--n", "4", "--suite", "bogus", "--out", out]) == 1


def test_unknown_species_exits_with_usage_error(tmp_path):
    snap = str(tmp_path / "snap.cmdsnap")
    assert cli.main(["synth", "--out", snap, "--gas", "20", "--dm", "20", "--star", "2", "--clumps", "1"]) == 0
    assert cli.main(["radii", snap, "--species", "bogus"]) == 1
