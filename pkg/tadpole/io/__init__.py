"""Image codecs and corpora (synthetic and MVTec layout)."""

try:
    from ._corpus import NORMAL_DIR, Corpus, TestItem, list_categories, load_corpus
    from ._images import (
        ImageDecodeError,
        from_unit_range,
        read_image,
        read_mask,
        resize_area,
        to_unit_range,
        write_heatmap,
        write_image,
        write_mask,
    )
    from ._synth import (
        Category,
        DefectKind,
        SynthSpec,
        generate_synthetic,
        plant_defect,
        write_corpus,
    )
except ImportError as exc:
    from .._extra import ExtraImportError

    raise ExtraImportError.from_module_name(__name__) from exc

__all__ = (
    "NORMAL_DIR",
    "Category",
    "Corpus",
    "DefectKind",
    "ImageDecodeError",
    "SynthSpec",
    "TestItem",
    "from_unit_range",
    "generate_synthetic",
    "list_categories",
    "load_corpus",
    "plant_defect",
    "read_image",
    "read_mask",
    "resize_area",
    "to_unit_range",
    "write_corpus",
    "write_heatmap",
    "write_image",
    "write_mask",
)
