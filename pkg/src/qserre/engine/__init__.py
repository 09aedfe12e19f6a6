"""Pages, page differentials, induced morphisms and the homology oracle."""

from .morphisms import (
    InducedMorphism,
    TruncatedMorphism,
    identity_morphism,
    induced_page_morphism,
    induced_tower,
    shift_morphism,
)
from .oracle import StabilizationReport, dense_rank, graded_homology_oracle, stabilized_page_check
from .pages import (
    Block,
    DrMatrix,
    Page,
    PageDifferential,
    PageEngine,
    StepComparison,
    compare_with_step,
    compute_page,
    page_differential,
    page_homology_step,
)
from .views import AUTO, UnfoldedView, Window, resolve_energy, worker_count

__all__ = [
    "AUTO",
    "Block",
    "DrMatrix",
    "InducedMorphism",
    "Page",
    "PageDifferential",
    "PageEngine",
    "StabilizationReport",
    "StepComparison",
    "TruncatedMorphism",
    "UnfoldedView",
    "Window",
    "compare_with_step",
    "compute_page",
    "dense_rank",
    "graded_homology_oracle",
    "identity_morphism",
    "induced_page_morphism",
    "induced_tower",
    "page_differential",
    "page_homology_step",
    "resolve_energy",
    "shift_morphism",
    "stabilized_page_check",
    "worker_count",
]
