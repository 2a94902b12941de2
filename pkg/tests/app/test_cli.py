import json
from pathlib import Path

import pytest

from tadpole.app import cli, is_expected_error
from tadpole.checkpoint import load_tensors

from ..conftest import Argv


@pytest.fixture
def corpus(tmp_path: Path, argv: Argv) -> Path:
    """A tiny synthetic category written with the `synth` command."""
    argv.assign(
        "synth",
        "--out",
        tmp_path / "data",
        "--categories",
        '["stripes"]',
        "--image_size",
        16,
        "--n_train",
        4,
        "--n_test_normal",
        2,
        "--n_test_anomalous",
        2,
    )
    assert cli() == 0
    return tmp_path / "data" / "stripes"


def test_full_run(corpus: Path, tmp_path: Path, argv: Argv) -> None:
    run = tmp_path / "run"
    argv.assign("pretrain", "--data", corpus, "--out", run, "--preset", "smoke")
    assert cli() == 0
    assert (run / "stage1.tadc").is_file()
    assert (run / "stage1_progress.csv").is_file()

    argv.assign(
        "train",
        "--data",
        corpus,
        "--init",
        run / "stage1.tadc",
        "--out",
        run,
        "--preset",
        "smoke",
    )
    assert cli() == 0
    header, _ = load_tensors(run / "stage2.tadc")
    assert header.lineage == ("stage1", "stage2")
    assert header.meta == {"corpus": "stripes", "variant": "OURS"}

    argv.assign(
        "eval",
        "--checkpoint",
        run / "stage2.tadc",
        "--data",
        corpus,
        "--out",
        run,
        "--preset",
        "smoke",
    )
    assert cli() == 0
    (report,) = json.loads((run / "report.json").read_text())
    assert report["category"] == "stripes"
    assert (run / "report.csv").is_file()

    scores = tmp_path / "scores"
    argv.assign(
        "score",
        "--checkpoint",
        run / "stage2.tadc",
        "--images",
        json.dumps([str(corpus / "test" / "good")]),
        "--out",
        scores,
        "--preset",
        "smoke",
        "--dump_maps",
        "True",
    )
    assert cli() == 0
    lines = (scores / "scores.csv").read_text().splitlines()
    assert lines[0] == "name,image_score"
    assert [line.split(",")[0] for line in lines[1:]] == ["000", "001"]
    assert (scores / "000_score.pgm").is_file()
    header, maps = load_tensors(scores / "maps.tadc")
    assert header.stage == "maps"
    assert set(maps) == {
        f"{stem}/{kind}"
        for stem in ("000", "001")
        for kind in ("error", "probability", "score")
    }


def test_augment(corpus: Path, tmp_path: Path, argv: Argv) -> None:
    out = tmp_path / "augment"
    argv.assign(
        "augment", "--data", corpus, "--out", out, "--preset", "smoke", "--count", 2
    )
    assert cli() == 0
    names = sorted(path.name for path in out.iterdir())
    assert len(names) == 6
    stems = {name.split("_")[0] for name in names}
    assert len(stems) == 2
    assert set(names) == {
        f"{stem}_{kind}.png"
        for stem in stems
        for kind in ("original", "corrupted", "mask")
    }


def test_train_needs_init(corpus: Path, tmp_path: Path, argv: Argv) -> None:
    out = tmp_path / "run"
    argv.assign("train", "--data", corpus, "--out", out, "--preset", "smoke")
    assert cli() == 1
    assert not out.exists()


def test_scratch_variant_rejects_init(
    corpus: Path, tmp_path: Path, argv: Argv
) -> None:
    out = tmp_path / "run"
    argv.assign(
        "train",
        "--data",
        corpus,
        "--init",
        tmp_path / "stage1.tadc",
        "--out",
        out,
        "--variant",
        "II",
        "--preset",
        "smoke",
    )
    assert cli() == 1
    assert not out.exists()


def test_missing_checkpoint(corpus: Path, tmp_path: Path, argv: Argv) -> None:
    argv.assign(
        "eval",
        "--checkpoint",
        tmp_path / "nope.tadc",
        "--data",
        corpus,
        "--out",
        tmp_path / "run",
    )
    assert cli() == 1


def test_no_command() -> None:
    assert cli() == 1


def test_invalid_preset(tmp_path: Path, argv: Argv) -> None:
    argv.assign("pretrain", "--data", tmp_path, "--out", tmp_path, "--preset", "huge")
    assert cli() == 1


def test_expected_errors() -> None:
    assert is_expected_error(ValueError())
    assert is_expected_error(ExceptionGroup("", [OSError(), RuntimeError()]))
    assert not is_expected_error(ExceptionGroup("", [OSError(), KeyError()]))
    assert not is_expected_error(KeyError())
