"""Named experiment protocols: in-domain grids and cross-dataset transfers.

Each protocol is a declarative bundle of dataset roles, a label mapping,
and (N, M) cells. The builtin set covers the two in-domain baselines,
the six-way-support/four-class-query mismatch, the four-class overlap in
both directions, and the binary Mpox-vs-Others transfer in both
directions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

from .errors import ConfigError, MappingError
from .mapping import LabelMapping, normalize_class_name, normalize_dataset_name
from .store import EmbeddingDataset

# Per-class image counts of the public releases of the three target
# datasets; used to sanity-check mappings and manifests.
DATASET_INVENTORIES: Mapping[str, Mapping[str, int]] = {
    "msldv2": {
        "Monkeypox": 284,
        "Chickenpox": 75,
        "Measles": 55,
        "Cowpox": 66,
        "HFMD": 161,
        "Healthy": 114,
    },
    "msid": {
        "Monkeypox": 279,
        "Chickenpox": 107,
        "Measles": 91,
        "Healthy": 293,
    },
    "msldv1": {
        "Monkeypox": 102,
        "Others": 126,
    },
}

MSLDV2_CLASSES = ("Monkeypox", "Chickenpox", "Measles", "Cowpox", "HFMD", "Healthy")
MSID_CLASSES = ("Monkeypox", "Chickenpox", "Measles", "Healthy")
MSLDV1_CLASSES = ("Monkeypox", "Others")
OVERLAP_CLASSES = ("Monkeypox", "Chickenpox", "Measles", "Healthy")
BINARY_CLASSES = ("Mpox", "Others")


@dataclass(frozen=True)
class ProtocolGrid:
    """One named experiment: dataset roles, mapping, and (N, M) cells."""

    name: str
    family: str
    support: str
    query: Optional[str]  # None = in-domain (queries from the support dataset)
    mapping: LabelMapping
    cells: tuple  # ((n_way, m_shot), ...)
    episodes: int = 100
    query_count: int = 50
    allow_uncovered: tuple = field(default_factory=tuple)

    def __post_init__(self) -> None:
        if not self.cells:
            raise ConfigError(f"protocol {self.name!r} has no cells")
        object.__setattr__(self, "cells", tuple((int(n), int(m)) for n, m in self.cells))
        object.__setattr__(
            self,
            "allow_uncovered",
            tuple(normalize_dataset_name(d) for d in self.allow_uncovered),
        )

    @property
    def datasets(self) -> tuple:
        if self.query is None or self.query == self.support:
            return (self.support,)
        return (self.support, self.query)

    def swapped(self) -> "ProtocolGrid":
        """Same protocol with support and query roles exchanged."""
        if self.query is None:
            return self
        # keep report names truthful about the run direction
        if self.name == f"{self.family}-{self.support}-to-{self.query}":
            name = f"{self.family}-{self.query}-to-{self.support}"
        else:
            name = f"{self.name}-swapped"
        return ProtocolGrid(
            name=name,
            family=self.family,
            support=self.query,
            query=self.support,
            mapping=self.mapping,
            cells=self.cells,
            episodes=self.episodes,
            query_count=self.query_count,
            allow_uncovered=self.allow_uncovered,
        )


def _overlap_mapping() -> LabelMapping:
    return LabelMapping(
        evaluation_classes=OVERLAP_CLASSES,
        tables={
            "msldv2": {
                "Monkeypox": "Monkeypox",
                "Chickenpox": "Chickenpox",
                "Measles": "Measles",
                "Healthy": "Healthy",
                "Cowpox": None,
                "HFMD": None,
            },
            "msid": {name: name for name in MSID_CLASSES},
        },
    )


def _binary_mapping() -> LabelMapping:
    def table(classes) -> dict:
        return {
            name: ("Mpox" if normalize_class_name(name) == "monkeypox" else "Others")
            for name in classes
        }

    return LabelMapping(
        evaluation_classes=BINARY_CLASSES,
        tables={
            "msldv2": table(MSLDV2_CLASSES),
            "msid": table(MSID_CLASSES),
            "msldv1": table(MSLDV1_CLASSES),
        },
    )


def _mismatch_mapping() -> LabelMapping:
    return LabelMapping(
        evaluation_classes=MSLDV2_CLASSES,
        tables={
            "msldv2": {name: name for name in MSLDV2_CLASSES},
            # MSID covers four of the six classes; the other two stay
            # support-side-only and are legal prediction targets.
            "msid": {name: name for name in MSID_CLASSES},
        },
    )


def builtin_protocols() -> tuple:
    """The canonical seven-row comparison set, in report order."""
    overlap = _overlap_mapping()
    binary = _binary_mapping()
    return (
        ProtocolGrid(
            name="msldv2-indomain",
            family="msldv2-indomain",
            support="msldv2",
            query=None,
            mapping=LabelMapping.identity(MSLDV2_CLASSES, ["msldv2"]),
            cells=((6, 10),),
        ),
        ProtocolGrid(
            name="msid-indomain",
            family="msid-indomain",
            support="msid",
            query=None,
            mapping=LabelMapping.identity(MSID_CLASSES, ["msid"]),
            cells=((4, 10),),
        ),
        ProtocolGrid(
            name="cross-mismatch",
            family="cross-mismatch",
            support="msldv2",
            query="msid",
            mapping=_mismatch_mapping(),
            cells=((6, 10),),
            allow_uncovered=("msid",),
        ),
        ProtocolGrid(
            name="cross-overlap4-msldv2-to-msid",
            family="cross-overlap4",
            support="msldv2",
            query="msid",
            mapping=overlap,
            cells=((4, 10),),
        ),
        ProtocolGrid(
            name="cross-overlap4-msid-to-msldv2",
            family="cross-overlap4",
            support="msid",
            query="msldv2",
            mapping=overlap,
            cells=((4, 10),),
        ),
        ProtocolGrid(
            name="cross-binary-msldv2-to-msid",
            family="cross-binary",
            support="msldv2",
            query="msid",
            mapping=binary,
            cells=((2, 10),),
        ),
        ProtocolGrid(
            name="cross-binary-msid-to-msldv2",
            family="cross-binary",
            support="msid",
            query="msldv2",
            mapping=binary,
            cells=((2, 10),),
        ),
    )


def select_protocols(names: Optional[Sequence[str]] = None) -> tuple:
    """Resolve protocol selectors against the builtin set.

    A selector matches a grid's exact name or its family (so
    "cross-binary" selects both directions). No selectors returns the
    full builtin set in canonical order.
    """
    grids = builtin_protocols()
    if not names:
        return grids
    chosen = []
    for selector in names:
        matches = [g for g in grids if selector in (g.name, g.family)]
        if not matches:
            known = sorted({g.family for g in grids} | {g.name for g in grids})
            raise ConfigError(f"unknown protocol {selector!r}; known selectors: {known}")
        for g in matches:
            if g not in chosen:
                chosen.append(g)
    return tuple(chosen)


def expected_mapped_counts(
    mapping: LabelMapping, dataset_name: str, source_counts: Mapping[str, int]
) -> dict:
    """Apply a mapping's table to a name -> count inventory."""
    table = mapping.table_for(dataset_name)
    out = {name: 0 for name in mapping.evaluation_classes}
    for source, count in source_counts.items():
        key = normalize_class_name(source)
        if key not in table:
            raise MappingError(
                f"source class {source!r} of {dataset_name!r} is neither mapped nor dropped"
            )
        target = table[key]
        if target is not None:
            out[target] += count
    return out


def validate_mapping(
    mapping: LabelMapping,
    datasets: Sequence[EmbeddingDataset],
    *,
    max_shot: int = 1,
    allow_uncovered: Sequence[str] = (),
) -> dict:
    """Check that a mapping fits real datasets; returns per-class counts.

    Every dataset must map each of its source classes, and every
    evaluation class must keep at least max_shot + 1 records per dataset
    so the largest grid cell stays feasible. Datasets listed in
    ``allow_uncovered`` are query-side-only: their evaluation classes may
    be empty (or thin), since they never provide supports.
    """
    exempt = {normalize_dataset_name(d) for d in allow_uncovered}
    report: dict = {}
    for ds in datasets:
        key = normalize_dataset_name(ds.dataset_name)
        counts = expected_mapped_counts(
            mapping, ds.dataset_name, dict(zip(ds.class_names, ds.class_counts()))
        )
        report[key] = counts
        if key in exempt:
            continue
        for name, count in counts.items():
            if count == 0:
                raise MappingError(
                    f"evaluation class {name!r} has no records in dataset {ds.dataset_name!r}"
                )
            if count < max_shot + 1:
                raise MappingError(
                    f"evaluation class {name!r} has {count} records in dataset "
                    f"{ds.dataset_name!r}, fewer than max_shot+1={max_shot + 1}"
                )
    return report
