import json
import os

import numpy as np
import pytest

from pymfd import config
from pymfd import deposit
from pymfd import errors
from pymfd import fields
from pymfd import grids
from pymfd import params
from pymfd import pipeline
from pymfd import snapshot

LABELS = (0.3, 0.8, 1.0, 1.0, 1.0, 1.0)


def _config(output, **overrides):
    settings = dict(
        synthetic_seed=3,
        synthetic_gas=400,
        synthetic_dm=400,
        synthetic_star=40,
        synthetic_clumps=4,
        fields=("Mgas", "T"),
        output=str(output),
        grid_sizes=(8,),
        map_size=16,
        tracers=50,
        neighbours=8,
        params=LABELS,
    )
    settings.update(overrides)
    return config.RunConfig(**settings)


def test_generate_writes_grids_maps_labels_and_manifest(tmp_path):
    manifest = pipeline.cmd_generate(_config(tmp_path / "run"))
    entries = {entry.path: entry for entry in manifest.entries}
    assert sorted(entries) == [
        "grid_Mgas_8.cmdgrid",
        "grid_T_8.cmdgrid",
        "labels.txt",
        "maps_Mgas.cmdgrid",
        "maps_T.cmdgrid",
    ]
    assert entries["grid_T_8.cmdgrid"].records == 1
    assert entries["maps_Mgas.cmdgrid"].records == 15
    assert entries["maps_Mgas.cmdgrid"].size == 16

    document = json.loads((tmp_path / "run" / pipeline.MANIFEST_NAME).read_text())
    assert len(document["files"]) == 5
    assert document["snapshot"]["species"]["gas"] == 400
    assert document["params"]["values"] == list(LABELS)


def test_generated_files_carry_the_labels(tmp_path):
    pipeline.cmd_generate(_config(tmp_path))
    record = grids.read_grid_record(str(tmp_path / "maps_T.cmdgrid"), 14)
    assert record.field_id is fields.FieldId.T
    assert record.values.shape == (16, 16)
    np.testing.assert_allclose(record.params.values, LABELS)

    labels = params.read_labels(str(tmp_path / pipeline.LABELS_NAME))
    np.testing.assert_allclose(labels[0].values, LABELS)


def test_generated_mass_grid_holds_all_gas(tmp_path):
    run = _config(tmp_path)
    snap = pipeline.load_snapshot(run)
    pipeline.cmd_generate(run)
    grid = grids.read_grid_record(str(tmp_path / "grid_Mgas_8.cmdgrid"), 0)
    assert grid.total() == pytest.approx(snap.get(snapshot.Kind.GAS).masses.sum(), rel=1e-5)


def test_generate_is_deterministic(tmp_path):
    first = pipeline.cmd_generate(_config(tmp_path / "a", threads=1))
    second = pipeline.cmd_generate(_config(tmp_path / "b", threads=3))
    assert [(e.path, e.sha256) for e in first.entries] == [(e.path, e.sha256) for e in second.entries]


def test_bulk_velocity_grids_are_written_on_request(tmp_path):
    manifest = pipeline.cmd_generate(_config(tmp_path, fields=("Mgas",), bulk_velocity=True))
    kinds = [entry.kind for entry in manifest.entries]
    assert kinds == ["grid", "maps", "bulk_velocity", "labels"]


def test_missing_magnetic_field_fails_before_writing(tmp_path):
    with pytest.raises(errors.MissingProperty, match="Field B"):
        pipeline.cmd_generate(_config(tmp_path / "run", fields=("B",), synthetic_magnetic=False))
    assert not os.path.exists(tmp_path / "run")


def test_labels_are_drawn_from_seed_when_not_given(tmp_path):
    run = _config(tmp_path, params=(), seed=11)
    vector = pipeline.resolve_params(run)
    assert vector == params.sample_lhs(1, 11, params.Suite.ILLUSTRIS_TNG)[0]


def test_slab_thicker_than_box_raises_UsageError(tmp_path):
    run = _config(tmp_path, slices=(deposit.SlicePlan("z", 0.0, 30.0),))
    with pytest.raises(errors.UsageError):
        pipeline.cmd_generate(run)


def test_pgm_of_full_size_map():
    image = pipeline.render_pgm(np.arange(1, 65_537, dtype=np.float64).reshape(256, 256))
    header = b"P5 256 256 255\n"
    assert image.startswith(header)
    pixels = np.frombuffer(image[len(header) :], dtype=np.uint8)
    assert pixels.size == 65_536
    assert (pixels.min(), pixels.max()) == (0, 255)


def test_pgm_header_lists_width_first():
    assert pipeline.render_pgm(np.ones((2, 3))).startswith(b"P5 3 2 255\n")


def test_constant_map_renders_black():
    image = pipeline.render_pgm(np.full((4, 4), 7.0))
    assert image[len(b"P5 4 4 255\n") :] == bytes(16)


def test_rendering_a_cube_raises_ShapeMismatch():
    with pytest.raises(errors.ShapeMismatch):
        pipeline.render_pgm(np.ones((2, 2, 2)))


def _write_cube(path):
    values = np.arange(512, dtype=np.float64).reshape(8, 8, 8) + 1.0
    grids.write_grid_file(str(path), [grids.ScalarGrid(values, 10.0, 0.0, fields.FieldId.MGAS)])


def test_render_averages_a_slab(tmp_path):
    _write_cube(tmp_path / "cube.cmdgrid")
    out = tmp_path / "slab.pgm"
    shape = pipeline.cmd_render(str(tmp_path / "cube.cmdgrid"), str(out), axis="z", voxel_start=6, voxel_count=4)
    assert shape == (8, 8)
    assert out.read_bytes().startswith(b"P5 8 8 255\n")
    assert len(out.read_bytes()) == len(b"P5 8 8 255\n") + 64


def test_render_of_a_cube_without_slab_raises_UsageError(tmp_path):
    _write_cube(tmp_path / "cube.cmdgrid")
    with pytest.raises(errors.UsageError):
        pipeline.cmd_render(str(tmp_path / "cube.cmdgrid"), str(tmp_path / "out.pgm"))


def test_render_of_a_missing_record_raises_RecordOutOfRange(tmp_path):
    _write_cube(tmp_path / "cube.cmdgrid")
    with pytest.raises(errors.RecordOutOfRange):
        pipeline.cmd_render(str(tmp_path / "cube.cmdgrid"), str(tmp_path / "out.pgm"), record=5, voxel_start=0)


def test_info_reports_map_storage(tmp_path):
    path = str(tmp_path / "maps.cmdgrid")
    grids.write_grid_file(path, [grids.ScalarGrid(np.zeros((256, 256)), 25.0, 0.0, fields.FieldId.HI)])
    text = pipeline.cmd_info(path)
    assert "payload per record: 262,144 bytes" in text
    assert "3,932,160,000 bytes" in text
    assert "records: 1" in text


def test_info_reports_grid_storage(tmp_path):
    path = str(tmp_path / "grid.cmdgrid")
    grids.write_grid_file(path, [grids.ScalarGrid(np.zeros((128, 128, 128)), 25.0, 0.0, fields.FieldId.MTOT)])
    text = pipeline.cmd_info(path)
    assert "payload per record: 8,388,608 bytes (8.00 MB)" in text
    assert "8,388,608,000 bytes" in text


def test_simba_run_reads_back_as_simba(tmp_path):
    pipeline.cmd_generate(_config(tmp_path, suite="SIMBA"))
    record = grids.read_grid_record(str(tmp_path / "maps_T.cmdgrid"), 0)
    assert record.params.suite is params.Suite.SIMBA
    np.testing.assert_allclose(record.params.values, LABELS)
