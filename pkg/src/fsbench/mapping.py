"""Class-name normalization and source-to-evaluation label mappings."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional

from .errors import MappingError, ValidationError

# Known synonyms, applied after lowercasing and whitespace collapsing.
# Matching is otherwise exact: silent fuzzy matching hides dataset errors.
CLASS_ALIASES = {
    "mpox": "monkeypox",
    "hfmd": "hand-foot-mouth disease",
    "hand foot mouth disease": "hand-foot-mouth disease",
}

DROP = None  # table value marking a source class as dropped


def normalize_class_name(name: str) -> str:
    """Canonical lookup key for a class name."""
    key = " ".join(name.strip().lower().split())
    return CLASS_ALIASES.get(key, key)


def normalize_dataset_name(name: str) -> str:
    """Canonical lookup key for a dataset name.

    Lowercases, strips separators, and drops a trailing ".0" so that
    "MSLD v2.0", "msld-v2" and "MSLDv2" all resolve to "msldv2".
    """
    key = name.strip().lower()
    for ch in (" ", "_", "-"):
        key = key.replace(ch, "")
    if key.endswith(".0"):
        key = key[:-2]
    return key


def _normalize_target(value, evaluation_classes: tuple) -> Optional[str]:
    if value is None:
        return None
    if isinstance(value, str) and value.strip().lower() == "drop":
        return None
    if value not in evaluation_classes:
        raise MappingError(f"mapping target {value!r} is not an evaluation class")
    return value


@dataclass(frozen=True)
class LabelMapping:
    """Source-class to evaluation-class table for one or more datasets.

    ``evaluation_classes`` fixes the evaluation label order. ``tables``
    maps dataset name -> {source class name -> evaluation class name},
    with None (or the string "drop") marking a dropped source class.
    Dataset and source-class keys are normalized on construction.
    """

    evaluation_classes: tuple
    tables: Mapping[str, Mapping[str, Optional[str]]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        classes = tuple(self.evaluation_classes)
        if not classes:
            raise ValidationError("a mapping needs at least one evaluation class")
        if len(set(classes)) != len(classes) or any(not c for c in classes):
            raise ValidationError("evaluation classes must be unique, non-empty strings")
        norm_tables = {}
        for dataset, table in dict(self.tables).items():
            norm = {}
            for source, target in dict(table).items():
                key = normalize_class_name(source)
                if key in norm:
                    raise MappingError(
                        f"source class {source!r} maps twice for dataset {dataset!r}"
                    )
                norm[key] = _normalize_target(target, classes)
            norm_tables[normalize_dataset_name(dataset)] = norm
        object.__setattr__(self, "evaluation_classes", classes)
        object.__setattr__(self, "tables", norm_tables)

    @classmethod
    def identity(cls, class_names, datasets) -> "LabelMapping":
        """Mapping that keeps every class of every named dataset as-is."""
        table = {name: name for name in class_names}
        return cls(
            evaluation_classes=tuple(class_names),
            tables={ds: dict(table) for ds in datasets},
        )

    @property
    def datasets(self) -> tuple:
        return tuple(self.tables)

    def table_for(self, dataset_name: str) -> Mapping[str, Optional[str]]:
        key = normalize_dataset_name(dataset_name)
        try:
            return self.tables[key]
        except KeyError:
            raise MappingError(
                f"no mapping table for dataset {dataset_name!r} (known: {sorted(self.tables)})"
            ) from None

    def target_id(self, evaluation_class: str) -> int:
        try:
            return self.evaluation_classes.index(evaluation_class)
        except ValueError:
            raise MappingError(f"{evaluation_class!r} is not an evaluation class") from None
