import json
import subprocess
import sys

import pytest

from ghost.cli import main
from ghost.clustering import read_pgm
from ghost.model import load_model
from ghost.samples import directory_library
from ghost.trace import serialize_trace


@pytest.fixture()
def lib_file(tmp_path):
    path = tmp_path / "lib.jsonl"
    with open(path, "w") as fh:
        serialize_trace(directory_library(), fh)
    return path


def test_analyze_writes_model_and_image(tmp_path, lib_file):
    out, img = tmp_path / "m.json", tmp_path / "dm.pgm"
    assert main(["analyze", "--in", str(lib_file), "--strategy", "consensus", "--f", "0.8",
                 "--boundaries", "5", "--out", str(out), "--emit-image", str(img)]) == 0
    with open(out) as fh:
        model = load_model(fh)
    assert [p.render() for p in model.prototypes][0] == "{id:???,op:S,sn:???????}"
    data = img.read_bytes()
    assert data.startswith(b"P5\n8 8\n255\n")
    assert read_pgm(data).shape == (8, 8)


def test_analyze_is_byte_deterministic(tmp_path, lib_file):
    outs = []
    for k in range(2):
        out = tmp_path / f"m{k}.json"
        assert main(["analyze", "--in", str(lib_file), "--out", str(out), "--reorder", "bea"]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_evaluate_prints_table(tmp_path, capsys):
    lib = tmp_path / "g.jsonl"
    assert main(["generate", "--n", "60", "--seed", "2", "--out", str(lib)]) == 0
    report = tmp_path / "r.json"
    assert main(["evaluate", "--in", str(lib), "--folds", "3", "--strategy", "consensus",
                 "--json", str(report)]) == 0
    text = capsys.readouterr().out
    assert "Malformed" in text and "Accuracy Ratio" in text
    doc = json.loads(report.read_text())
    assert doc["total"] == 60 and set(doc["counts"]) == {
        "identical", "consistent", "protocol_conformant", "well_formed", "malformed"}


def test_evaluate_with_noise(tmp_path, capsys):
    lib = tmp_path / "g.jsonl"
    main(["generate", "--n", "120", "--seed", "1", "--out", str(lib)])
    assert main(["evaluate", "--in", str(lib), "--folds", "3", "--noise", "0.1", "--f", "0.5"]) == 0
    assert "Accuracy Ratio" in capsys.readouterr().out


def test_one_fold_is_an_error(lib_file, capsys):
    assert main(["evaluate", "--in", str(lib_file), "--folds", "1"]) == 1
    assert "k ≥ 2 required" in capsys.readouterr().err


def test_missing_validator(tmp_path, lib_file, capsys):
    # without a validator, any non-identical reply cannot be categorized
    code = main(["evaluate", "--in", str(lib_file), "--folds", "2", "--protocol", "none"])
    assert code == 1
    assert "validator" in capsys.readouterr().err


def test_bad_flag_is_usage_error(lib_file):
    with pytest.raises(SystemExit) as exc:
        main(["analyze", "--in", str(lib_file), "--out", "x", "--reorder", "spiral"])
    assert exc.value.code == 2


def test_missing_input_file(tmp_path, capsys):
    assert main(["analyze", "--in", str(tmp_path / "nope.jsonl"), "--out", str(tmp_path / "m.json")]) == 1
    assert capsys.readouterr().err.startswith("error:")


def test_image_command(tmp_path, lib_file):
    out = tmp_path / "req.pgm"
    assert main(["image", "--in", str(lib_file), "--out", str(out), "--basis", "request", "--reorder", "none"]) == 0
    assert read_pgm(out.read_bytes()).shape == (8, 8)


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "ghost", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0
    for cmd in ("analyze", "serve", "evaluate", "image"):
        assert cmd in proc.stdout
