"""End-to-end tests of the mfe command line."""

import csv
import json
import os
from unittest.mock import patch

import pytest

from src.errors import DivergenceError
from src.fields import ExpSum
from src.formats import load_checkpoint, load_encoded, read_pgm, save_manifold
from src.geometry import ManifoldFunction
from src.main import main
from src.meshes import disk, polygonal_circle


@pytest.fixture(autouse=True)
def environment(tmp_path):
    env = {"MFE_CACHE_DIR": str(tmp_path / "cache"), "MFE_VERBOSE": "0"}
    with patch.dict(os.environ, env):
        yield


@pytest.fixture
def disk_path(tmp_path):
    mf = ManifoldFunction.from_field(disk((0.5, 0.5), 0.3, segments=16), ExpSum())
    return str(save_manifold(mf, tmp_path / "disk.json"))


@pytest.fixture
def circle_path(tmp_path):
    mf = ManifoldFunction.from_field(polygonal_circle(radius=0.3, segments=64), ExpSum())
    return str(save_manifold(mf, tmp_path / "circle.json"))


def read_rows(path):
    with open(path, newline="") as f:
        return list(csv.DictReader(f))


def test_encode_and_reconstruct(tmp_path, disk_path, capsys):
    out = tmp_path / "disk.bin"
    assert main(["encode", "--mesh", disk_path, "--n", "4", "--out", str(out)]) == 0
    assert "✓ Encoded disk.json" in capsys.readouterr().out
    encoded = load_encoded(out)
    assert list(encoded.blocks) == ["shape", "function"]
    assert encoded.basis.n == 4

    grid = tmp_path / "grid.pgm"
    args = ["reconstruct", "--encoded", str(out), "--grid", "16", "--out", str(grid)]
    assert main(args + ["--premultiply", "--log-transform"]) == 0
    assert read_pgm(grid).shape == (16, 16)
    assert (tmp_path / "grid.csv").exists()
    assert (tmp_path / "cache" / "gram" / "legendre_n4_d2_s2.bin").exists()

    assert main(args[:-2] + ["--block", "all", "--out", str(tmp_path / "all.pgm")]) == 0
    assert (tmp_path / "all_shape.pgm").exists()
    assert (tmp_path / "all_function.pgm").exists()


@pytest.mark.parametrize(
    "extra,blocks",
    [
        (["--measured"], ["shape", "measure", "function"]),
        (["--samples", "200", "--seed", "3"], ["measure", "function"]),
        (["--coordinate-blocks"], ["shape", "function", "coord_1", "coord_2"]),
    ],
    ids=["measured", "sampled", "coordinates"],
)
def test_encode_variants(tmp_path, disk_path, extra, blocks):
    out = tmp_path / "enc.bin"
    assert main(["encode", "--mesh", disk_path, "--n", "3", "--out", str(out), *extra]) == 0
    assert list(load_encoded(out).blocks) == blocks


def test_encode_joint_and_pointcloud(tmp_path, disk_path, circle_path):
    out = tmp_path / "joint.bin"
    assert main(["encode", "--mesh", disk_path, "--joint", circle_path, "--n", "3", "--out", str(out)]) == 0
    assert load_encoded(out).normalization.value == "measure_normalized"

    cloud = tmp_path / "cloud.csv"
    cloud.write_text("x,y,value\n0.2,0.3,1.0\n0.6,0.7,2.0\n")
    out = tmp_path / "cloud.bin"
    assert main(["encode", "--pointcloud", str(cloud), "--n", "3", "--out", str(out)]) == 0
    assert load_encoded(out).provenance.shape_omitted
    assert load_encoded(out).basis.d == 2


def test_headerless_pointcloud_uses_dim(tmp_path, capsys):
    cloud = tmp_path / "coords.csv"
    cloud.write_text("0.2,0.3\n0.6,0.7\n0.4,0.1\n")
    out = tmp_path / "coords.bin"
    assert main(["encode", "--pointcloud", str(cloud), "--dim", "2", "--n", "3", "--out", str(out)]) == 0
    assert "✓ Encoded coords.csv" in capsys.readouterr().out
    encoded = load_encoded(out)
    assert encoded.basis.d == 2
    assert encoded.block("measure")[0] == pytest.approx(1.0)
    assert not encoded.block("function").any()
    guessed = tmp_path / "guessed.bin"
    assert main(["encode", "--pointcloud", str(cloud), "--n", "3", "--out", str(guessed)]) == 0
    assert load_encoded(guessed).basis.d == 1
    assert main(["validate", "--mesh", str(cloud), "--dim", "2"]) == 0
    assert main(["encode", "--pointcloud", str(cloud), "--dim", "3", "--n", "3", "--out", str(out)]) == 3


def test_encode_needs_exactly_one_source(tmp_path, disk_path):
    cloud = tmp_path / "cloud.csv"
    cloud.write_text("x,y,value\n0.2,0.3,1.0\n")
    out = str(tmp_path / "x.bin")
    for extra in ([], ["--mesh", disk_path, "--pointcloud", str(cloud)]):
        with pytest.raises(SystemExit) as excinfo:
            main(["encode", "--n", "3", "--out", out, *extra])
        assert excinfo.value.code == 2


def test_fourier_encoding_is_reproducible(tmp_path, disk_path):
    first, second = tmp_path / "a.bin", tmp_path / "b.bin"
    for out in (first, second):
        assert main(["encode", "--mesh", disk_path, "--family", "fourier", "--n", "3", "--out", str(out)]) == 0
    assert first.read_bytes() == second.read_bytes()


def test_study_writes_table_and_summary(tmp_path, circle_path):
    out = tmp_path / "rates.csv"
    args = ["study", "--mesh", circle_path, "--s", "0", "--n-list", "2,3,4", "--test-fn", "expsum,runge"]
    assert main(args + ["--out", str(out)]) == 0
    rows = read_rows(out)
    assert list(rows[0]) == ["n", "N", "block", "test_fn", "error", "at_floor"]
    assert len(rows) == 3 * 2 * 2
    summary = json.loads((tmp_path / "rates_summary.json").read_text())
    assert set(summary["slopes"]) == {"expsum/shape", "expsum/function", "runge/shape", "runge/function"}
    assert "dual norm" in summary["note"]


def test_study_in_span_reports_floor(tmp_path, circle_path, capsys):
    out = tmp_path / "floor.csv"
    args = ["study", "--mesh", circle_path, "--s", "0", "--n-list", "2,3,4", "--test-fn", "basis:1"]
    assert main(args + ["--out", str(out)]) == 0
    assert "all errors at floor" in capsys.readouterr().out


def test_consistency_command(tmp_path, capsys):
    out = tmp_path / "consistency.csv"
    args = ["consistency", "--point", "0.5,0.5", "--radii", "0.2,0.1,0.05", "--n", "3"]
    assert main(args + ["--test-fn", "expsum", "--out", str(out)]) == 0
    rows = read_rows(out)
    assert [float(r["radius"]) for r in rows] == [0.2, 0.1, 0.05]
    assert "ratio" in capsys.readouterr().out


def test_mc_study_command(tmp_path, disk_path):
    out = tmp_path / "mc.csv"
    args = ["mc-study", "--mesh", disk_path, "--n", "2", "--N-list", "50,200,800", "--seeds", "4"]
    assert main(args + ["--out", str(out)]) == 0
    rows = read_rows(out)
    assert [int(r["N"]) for r in rows] == [50, 200, 800]
    assert {"rms_error", "rms_measure", "rms_function"} <= set(rows[0])


def test_locality_command(tmp_path):
    out_dir = tmp_path / "locality"
    args = ["locality", "--n-list", "4,6", "--s", "0", "--grid", "16", "--out-dir", str(out_dir)]
    assert main(args) == 0
    assert len(read_rows(out_dir / "locality.csv")) == 4
    assert read_pgm(out_dir / "n6_function.pgm").shape == (16, 16)


def test_dataset_training_and_evaluation(tmp_path, capsys):
    data = tmp_path / "train.bin"
    model = tmp_path / "model.bin"
    assert main(["gen-data", "--count", "20", "--n", "4", "--seed", "1", "--out", str(data)]) == 0
    assert main(["train", "--data", str(data), "--seed", "0", "--iterations", "5", "--out", str(model)]) == 0
    assert main(["evaluate", "--model", str(model), "--data", str(data)]) == 0
    out = capsys.readouterr().out
    assert "✓ Trained model" in out
    assert "Mean relative L2 error" in out


def test_train_with_paper_preset(tmp_path, capsys):
    data = tmp_path / "train.bin"
    model = tmp_path / "model.bin"
    assert main(["gen-data", "--count", "10", "--n", "3", "--seed", "2", "--out", str(data)]) == 0
    args = ["train", "--data", str(data), "--preset", "paper", "--seed", "0", "--iterations", "1"]
    assert main(args + ["--out", str(model)]) == 0
    assert "Training paper preset for 1 iterations" in capsys.readouterr().out
    _, meta = load_checkpoint(model)
    assert meta["preset"] == "paper"
    assert meta["network"]["hidden"] == [500, 500, 500]


def test_gen_data_is_reproducible(tmp_path):
    paths = [tmp_path / "a.bin", tmp_path / "b.bin"]
    for path in paths:
        args = ["gen-data", "--problem", "poisson1d-boundary", "--count", "4", "--n", "3", "--seed", "9"]
        assert main(args + ["--out", str(path)]) == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_validate_and_cache_commands(tmp_path, disk_path, capsys):
    assert main(["validate", "--mesh", disk_path]) == 0
    assert "pairwise intersections" in capsys.readouterr().out
    assert main(["cache", "--stats"]) == 0
    assert "total_entries: 0" in capsys.readouterr().out
    assert main(["cache", "--clear"]) == 0
    assert "Cleared all cache entries" in capsys.readouterr().out


def test_usage_errors_exit_with_2(tmp_path, disk_path, capsys):
    out = str(tmp_path / "x.bin")
    assert main(["encode", "--mesh", str(tmp_path / "missing.json"), "--n", "3", "--out", out]) == 2
    assert main(["encode", "--mesh", disk_path, "--n", "3", "--samples", "10", "--out", out]) == 2
    assert main(["consistency", "--point", "a,b", "--radii", "0.1", "--n", "3", "--out", out]) == 2
    assert "✗" in capsys.readouterr().err
    with pytest.raises(SystemExit) as excinfo:
        main(["encode", "--mesh", disk_path])
    assert excinfo.value.code == 2


def test_data_errors_exit_with_3(tmp_path, disk_path):
    outside = tmp_path / "outside.json"
    outside.write_text(json.dumps({"d": 1, "k": 1, "vertices": [[0.5], [1.5]], "simplices": [[0, 1]]}))
    out = str(tmp_path / "x.bin")
    assert main(["encode", "--mesh", str(outside), "--n", "3", "--out", out]) == 3
    assert main(["encode", "--mesh", disk_path, "--n", "0", "--out", out]) == 3
    assert main(["reconstruct", "--encoded", disk_path, "--grid", "8", "--out", out]) == 3
    square = tmp_path / "square.json"
    square.write_text(
        json.dumps({"d": 2, "k": 1, "vertices": [[0.0, 0.5], [0.5, 0.5]], "simplices": [[0, 1]]})
    )
    assert main(["encode", "--mesh", str(square), "--family", "fourier", "--n", "3", "--out", out]) == 3


def test_numerical_errors_exit_with_4(tmp_path):
    data = tmp_path / "train.bin"
    assert main(["gen-data", "--count", "4", "--n", "3", "--seed", "1", "--out", str(data)]) == 0
    with patch("src.main.train", side_effect=DivergenceError("loss became non-finite")):
        args = ["train", "--data", str(data), "--seed", "0", "--out", str(tmp_path / "m.bin")]
        assert main(args) == 4
