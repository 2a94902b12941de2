import json
from pathlib import Path

import anyio
import pytest

from tadpole.app import (
    VARIANTS,
    AblationRow,
    ablate_corpus,
    ablation_csv,
    ablation_markdown,
    check_orderings,
    load_preset,
    mean_aucs,
)
from tadpole.io import SynthSpec, generate_synthetic
from tadpole.metrics import EvalReport


def _row(
    variant: str, category: str, image_auc: float, pixel_auc: float
) -> AblationRow:
    report = EvalReport(
        category=category,
        image_auc=image_auc,
        pixel_auc=pixel_auc,
        roc_points=((0.0, 0.0), (1.0, 1.0)),
        n_pos=2,
        n_neg=2,
        n_pos_pixels=10,
        n_neg_pixels=90,
    )
    return AblationRow(variant=variant, report=report)  # type: ignore[arg-type]


ROWS = [
    _row("OURS", "stripes", 1.0, 0.75),
    _row("OURS", "checker", 0.5, 0.25),
    _row("VII", "stripes", 0.5, 0.5),
    _row("VII", "checker", 0.5, 1.0),
]


def test_mean_aucs() -> None:
    assert mean_aucs(ROWS) == {"OURS": (0.75, 0.5), "VII": (0.5, 0.75)}


def test_orderings_hold() -> None:
    means = {"OURS": (0.9, 0.9), "VII": (0.91, 0.9), "III": (0.5, 0.5)}
    # Within the tolerance
    assert check_orderings(means) == []
    # Orderings with missing variants are skipped
    assert check_orderings({"VIII": (0.1, 0.1)}) == []


def test_orderings_violated(caplog: pytest.LogCaptureFixture) -> None:
    means = {
        "OURS": (0.7, 0.9),
        "VII": (0.8, 0.9),
        "VIII": (0.6, 0.5),
        "II": (0.95, 0.5),
    }
    violations = check_orderings(means)
    # OURS < VII and OURS < best single-score variant (II)
    assert len(violations) == 2
    assert violations[0].startswith("OURS (0.7000) < VII (0.8000)")
    assert violations[1].startswith("OURS (0.7000) < II (0.9500)")
    assert "Ablation ordering violated" in caplog.text
    assert check_orderings(means, tolerance=0.3) == []


def test_csv() -> None:
    lines = ablation_csv(ROWS).splitlines()
    assert lines[0] == "variant,category,image_auc,pixel_auc"
    assert lines[1] == "OURS,stripes,1.0,0.75"
    assert lines[-2:] == ["OURS,mean,0.75,0.5", "VII,mean,0.5,0.75"]
    assert len(lines) == 7


def test_markdown() -> None:
    text = ablation_markdown([*ROWS[:3]])
    assert "## Image AUC" in text
    assert "## Pixel AUC" in text
    assert "| category | OURS | VII |" in text
    assert "| stripes | 1.000 | 0.500 |" in text
    # VII was never evaluated on checker
    assert "| checker | 0.500 | - |" in text
    assert "| **mean** | 0.750 | 0.500 |" in text


def test_ablate_corpus(tmp_path: Path) -> None:
    spec = SynthSpec(
        category="stripes",
        image_size=16,
        n_train=4,
        n_test_normal=2,
        n_test_anomalous=2,
    )
    corpus = generate_synthetic(spec)
    variants = [VARIANTS["I"], VARIANTS["II"], VARIANTS["VII"]]

    async def main() -> list[AblationRow]:
        return await ablate_corpus(
            load_preset("smoke"), corpus, variants, out=tmp_path
        )

    rows = anyio.run(main)
    assert [row.variant for row in rows] == ["I", "II", "VII"]
    for row in rows:
        assert row.report.category == "stripes"
        assert row.report.n_pos == 2
        assert row.report.n_neg == 2
    directory = tmp_path / "stripes"
    assert {path.name for path in directory.iterdir()} == {
        "stage1.tadc",
        "stage1_progress.csv",
        "II_progress.csv",
        "VII_progress.csv",
        "reports.json",
    }
    reports = json.loads((directory / "reports.json").read_text())
    assert len(reports) == 3


def test_ablate_without_stage1(tmp_path: Path) -> None:
    spec = SynthSpec(
        category="checker",
        image_size=16,
        n_train=4,
        n_test_normal=2,
        n_test_anomalous=2,
    )
    corpus = generate_synthetic(spec)

    async def main() -> list[AblationRow]:
        return await ablate_corpus(
            load_preset("smoke"), corpus, [VARIANTS["II"]], out=tmp_path
        )

    anyio.run(main)
    assert not (tmp_path / "checker" / "stage1.tadc").exists()


def test_ablation_output_is_byte_identical(tmp_path: Path) -> None:
    spec = SynthSpec(
        category="stripes",
        image_size=16,
        n_train=4,
        n_test_normal=2,
        n_test_anomalous=2,
    )
    variants = [VARIANTS["I"], VARIANTS["II"], VARIANTS["VII"]]
    tables: list[str] = []
    for run in ("first", "second"):

        async def main(out: Path = tmp_path / run) -> list[AblationRow]:
            corpus = generate_synthetic(spec)
            return await ablate_corpus(load_preset("smoke"), corpus, variants, out=out)

        rows = anyio.run(main)
        tables.append(ablation_csv(rows) + ablation_markdown(rows))
    assert tables[0] == tables[1]
    first = tmp_path / "first" / "stripes"
    second = tmp_path / "second" / "stripes"
    names = sorted(path.name for path in first.iterdir())
    assert names == sorted(path.name for path in second.iterdir())
    assert "reports.json" in names
    for name in names:
        assert (first / name).read_bytes() == (second / name).read_bytes(), name
