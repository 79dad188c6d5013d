import csv
import json

import numpy as np
import pytest

from boundcue.cli import main


@pytest.fixture(scope="module")
def wedge_scene(tmp_path_factory):
    out = tmp_path_factory.mktemp("scene")
    assert main(["synth", "--kind", "wedge", "--size", "32", "--out", str(out)]) == 0
    return out


def test_synth_writes_artifacts(wedge_scene):
    assert (wedge_scene / "image.png").exists()
    assert (wedge_scene / "z_star.bczf").exists()
    assert (wedge_scene / "annotations.json").exists()
    doc = json.loads((wedge_scene / "annotations.json").read_text())
    assert doc["version"] == 1


def test_synth_bad_kind(tmp_path):
    assert main(["synth", "--kind", "torus", "--out", str(tmp_path)]) == 1


def quick_config(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"solver": {"max_iters": 40, "levels": 1}}))
    return cfg


def test_reconstruct_smoke(wedge_scene, tmp_path):
    out = tmp_path / "run"
    code = main(
        [
            "reconstruct",
            "--annotations", str(wedge_scene / "annotations.json"),
            "--variant", "folds",
            "--config", str(quick_config(tmp_path)),
            "--out", str(out),
        ]
    )
    assert code == 0
    for name in ("height.bczf", "height.pfm", "mesh.obj", "normals.png",
                 "trace.csv", "diagnostics.json"):
        assert (out / name).exists(), name
    from boundcue import io

    hf = io.read_bczf(out / "height.bczf")
    assert hf.shape == (32, 32)


def test_reconstruct_deterministic(wedge_scene, tmp_path):
    cfg = quick_config(tmp_path)
    args = [
        "reconstruct",
        "--annotations", str(wedge_scene / "annotations.json"),
        "--variant", "occ_folds",
        "--config", str(cfg),
        "--seed", "7",
    ]
    assert main(args + ["--out", str(tmp_path / "a")]) == 0
    assert main(args + ["--out", str(tmp_path / "b")]) == 0
    a = (tmp_path / "a" / "height.bczf").read_bytes()
    b = (tmp_path / "b" / "height.bczf").read_bytes()
    assert a == b


def test_reconstruct_missing_annotations(tmp_path, capsys):
    code = main(
        [
            "reconstruct",
            "--annotations", str(tmp_path / "nope.json"),
            "--variant", "silh",
            "--out", str(tmp_path / "o"),
        ]
    )
    assert code == 1
    assert "nope.json" in capsys.readouterr().err


def test_reconstruct_shading_needs_image(wedge_scene, tmp_path, capsys):
    code = main(
        [
            "reconstruct",
            "--annotations", str(wedge_scene / "annotations.json"),
            "--variant", "shading",
            "--out", str(tmp_path / "o"),
        ]
    )
    assert code == 1
    assert "requires an image" in capsys.readouterr().err


def test_ablate_smoke(wedge_scene, tmp_path):
    out = tmp_path / "ablation.csv"
    cfg = quick_config(tmp_path)
    code = main(
        [
            "ablate",
            "--scene", str(wedge_scene),
            "--variants", "silh", "folds",
            "--config", str(cfg),
            "--out", str(out),
        ]
    )
    assert code == 0
    rows = list(csv.DictReader(open(out)))
    assert [r["variant"] for r in rows] == ["silh", "folds"]
    assert all(r["status"] == "ok" for r in rows)
    assert all(float(r["n_mse"]) >= 0 for r in rows)


def test_evaluate_emits_json(wedge_scene, capsys):
    code = main(
        ["evaluate", "--z", str(wedge_scene / "z_star.bczf"),
         "--z-star", str(wedge_scene / "z_star.bczf")]
    )
    assert code == 0
    report = json.loads(capsys.readouterr().out)
    assert set(report) == {"n_mse", "z_mae", "pixels"}
    assert report["z_mae"] == 0.0


def test_evaluate_missing_file(tmp_path, capsys):
    code = main(
        ["evaluate", "--z", str(tmp_path / "a.bczf"), "--z-star", str(tmp_path / "b.bczf")]
    )
    assert code == 1


def test_gradcheck_clean_and_corrupted():
    assert main(["gradcheck", "--seed", "3", "--instances", "2"]) == 0
    assert main(
        ["gradcheck", "--seed", "3", "--instances", "1", "--corrupt", "f_flat"]
    ) == 1


def test_gradcheck_deterministic(capsys):
    main(["gradcheck", "--seed", "11", "--instances", "2"])
    first = capsys.readouterr().out
    main(["gradcheck", "--seed", "11", "--instances", "2"])
    second = capsys.readouterr().out
    assert first == second
