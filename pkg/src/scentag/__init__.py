"""Tag-based scenario categories for automated-vehicle assessment.

Core pieces: hierarchical tag trees with a subsumption order
(`taxonomy`), a category definition language (`category`), qualitative
scenario records (`scenario`), the comprise decision with witnesses
(`matcher`), category-level reasoning (`algebra`), and a tag-indexed
scenario store with ODD-based test-case selection (`store`). A FastAPI
service (`scentag.service`) wraps the library; the CLI is a thin client
of that service.
"""

import importlib.resources

from .algebra import (
    InclusionStatus,
    InclusionVerdict,
    UniverseBounds,
    bounds_from_categories,
    conjoin,
    includes_semantic,
    includes_syntactic,
    is_satisfiable,
    validate_bounds,
)
from .category import (
    ActorGroup,
    Diagnostic,
    Requirement,
    ScenarioCategory,
    Snapshot,
    lint_category,
    parse_category,
    serialize_category,
    serialize_library,
)
from .errors import (
    BoundsTooLargeError,
    ParseError,
    ResolutionError,
    ScentagError,
    SourceLoc,
    StoreError,
    ValidationError,
)
from .matcher import (
    MatchWitness,
    WitnessEntry,
    comprises,
    comprising_categories,
    render_witness,
    requirement_satisfied,
    verify_witness,
    witness_line,
)
from .scenario import (
    ActorRecord,
    Phase,
    ScenarioRecord,
    parse_scenario,
    serialize_scenario,
    tags_active_at,
    validate_scenario,
)
from .store import OddSpec, QueryExpr, StoreFile, parse_query, select_test_cases
from .taxonomy import (
    Registry,
    Scope,
    TagNode,
    TagPath,
    TagTree,
    builtin_registry,
    builtin_registry_document,
    export_dot,
    load_registry,
    parse_registry,
    resolve,
    serialize_registry,
    subsumes,
)

__version__ = "0.1.0"

FIXTURE_NAMES = (
    "paper_categories.cat",
    "straight_road.scn",
    "oncoming_turn.scn",
    "cutin.scn",
)


def fixture_text(name: str) -> str:
    """Text of a shipped example document (see FIXTURE_NAMES)."""
    return importlib.resources.files("scentag").joinpath(f"fixtures/{name}").read_text("utf-8")
