"""Pydantic request/response models for the HTTP API.

Every request may carry `registry`: a registry document overriding the
built-in trees for that call. Documents (categories, scenarios, store
queries) travel as text in the request body; the server parses them, so
remote clients never need the library installed.
"""

from __future__ import annotations

from pydantic import BaseModel, Field


class RegistryRequest(BaseModel):
    registry: str | None = Field(
        default=None, description="registry document text; omit for the built-in trees"
    )


# --- registry ----------------------------------------------------------------


class TreeInfo(BaseModel):
    tree_id: str
    scope: str
    nodes: int


class TreesResponse(BaseModel):
    trees: list[TreeInfo]


class TreeRequest(RegistryRequest):
    tree_id: str


class TreeNodeModel(BaseModel):
    label: str
    display_name: str
    annotation: str | None = None
    children: list["TreeNodeModel"] = []


class TreeResponse(BaseModel):
    tree_id: str
    scope: str
    root: TreeNodeModel


class DotResponse(BaseModel):
    dot: str


class RegistryDocResponse(BaseModel):
    document: str


class ResolveRequest(RegistryRequest):
    path: str


class ResolveResponse(BaseModel):
    canonical: str
    tree_id: str
    segments: list[str]
    scope: str


class SubsumesRequest(RegistryRequest):
    general: str
    specific: str


class SubsumesResponse(BaseModel):
    subsumes: bool


# --- categories and scenarios --------------------------------------------------


class CategoryDocRequest(RegistryRequest):
    source: str


class CategorySummary(BaseModel):
    name: str
    canonical: str
    universal: bool


class ParseCategoriesResponse(BaseModel):
    categories: list[CategorySummary]


class DiagnosticModel(BaseModel):
    category: str
    severity: str
    code: str
    message: str
    line: int | None = None
    col: int | None = None


class LintResponse(BaseModel):
    diagnostics: list[DiagnosticModel]


class ScenarioDocRequest(RegistryRequest):
    source: str


class ScenarioResponse(BaseModel):
    scenario_id: str
    canonical: str


# --- matching -------------------------------------------------------------------


class MatchRequest(RegistryRequest):
    categories: str = Field(description="category library document")
    category_name: str
    scenario: str = Field(description="scenario document")


class BindingPair(BaseModel):
    group: str
    actor: str


class WitnessEntryModel(BaseModel):
    context: str
    requirement: str
    source: str
    matched: str


class WitnessModel(BaseModel):
    binding: list[BindingPair]
    snapshot_steps: list[int]
    satisfied_by: list[WitnessEntryModel]
    report: str
    line: str


class MatchResponse(BaseModel):
    matched: bool
    witness: WitnessModel | None = None


class MatchAllRequest(RegistryRequest):
    categories: str
    scenario: str


class MatchAllEntry(BaseModel):
    name: str
    witness: WitnessModel


class MatchAllResponse(BaseModel):
    matches: list[MatchAllEntry]


# --- inclusion, conjunction, satisfiability ------------------------------------


class BoundsParams(BaseModel):
    max_actors: int = 2
    max_phases: int = 2
    tag_pool: list[str] | None = Field(
        default=None,
        description="explicit tag pool; omitted = the categories' own tags",
    )
    exclusive_actor_states: bool = False


class IncludesRequest(RegistryRequest, BoundsParams):
    categories: str
    larger: str
    smaller: str
    semantic: bool = False


class ProofModel(BaseModel):
    kind: str  # "mapping" | "exhaustion"
    requirement_map: list[list[str]] | None = None
    group_map: list[list[str]] | None = None
    snapshot_map: list[list[int]] | None = None
    records_checked: int | None = None
    comprised_checked: int | None = None


class IncludesResponse(BaseModel):
    status: str
    note: str
    proof: ProofModel | None = None
    counterexample: str | None = Field(
        default=None, description="scenario document refuting the inclusion"
    )


class ConjoinRequest(RegistryRequest):
    categories: str
    a: str
    b: str


class ConjoinResponse(BaseModel):
    category: str


class SatisfiableRequest(RegistryRequest, BoundsParams):
    categories: str
    name: str


class SatisfiableResponse(BaseModel):
    satisfiable: bool
    record: str | None = None


# --- store ----------------------------------------------------------------------


class StoreInitRequest(BaseModel):
    path: str


class StoreInitResponse(BaseModel):
    path: str
    created: bool = True


class StoreAddRequest(RegistryRequest):
    path: str
    scenario: str


class StoreAddResponse(BaseModel):
    scenario_id: str
    records: int


class StoreQueryRequest(RegistryRequest):
    path: str
    query: str


class StoreQueryResponse(BaseModel):
    ids: list[str]


class TestCasesRequest(RegistryRequest):
    store_path: str
    library: str
    odd: list[str]


class SelectionModel(BaseModel):
    scenario_id: str
    categories: list[str]


class TestCasesResponse(BaseModel):
    selections: list[SelectionModel]
