"""FastAPI application wrapping the core library.

The service is stateless apart from store files on its own filesystem:
documents are parsed per request against the built-in registry, a
per-request override, or the registry the app was created with.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import algebra, category, matcher, scenario, store, taxonomy
from ..errors import ScentagError, ValidationError
from ..matcher import MatchWitness
from ..taxonomy import Registry, TagNode
from . import models


def _witness_model(witness: MatchWitness) -> models.WitnessModel:
    return models.WitnessModel(
        binding=[models.BindingPair(group=g, actor=a) for g, a in witness.binding],
        snapshot_steps=list(witness.snapshot_steps),
        satisfied_by=[
            models.WitnessEntryModel(
                context=e.context,
                requirement=e.requirement.canonical(),
                source=e.source,
                matched=e.matched.canonical(),
            )
            for e in witness.satisfied_by
        ],
        report=matcher.render_witness(witness),
        line=matcher.witness_line(witness),
    )


def _node_model(node: TagNode) -> models.TreeNodeModel:
    return models.TreeNodeModel(
        label=node.label,
        display_name=node.display_name,
        annotation=node.annotation,
        children=[_node_model(c) for c in node.children],
    )


def _find_category(library: list[category.ScenarioCategory], name: str):
    for cat in library:
        if cat.name == name:
            return cat
    raise ValidationError(f"no category named {name!r} in the library")


def create_app(default_registry: Registry | None = None) -> FastAPI:
    app = FastAPI(
        title="scentag",
        description="Tag-based scenario categories for AV assessment",
        version="0.1.0",
    )

    def registry_for(req: models.RegistryRequest) -> Registry:
        if req.registry is not None:
            return taxonomy.parse_registry(req.registry)
        return default_registry or taxonomy.builtin_registry()

    def bounds_for(
        registry: Registry,
        params: models.BoundsParams,
        categories: list[category.ScenarioCategory],
    ) -> algebra.UniverseBounds:
        if params.tag_pool is None:
            return algebra.bounds_from_categories(
                registry,
                categories,
                params.max_actors,
                params.max_phases,
                params.exclusive_actor_states,
            )
        pools: dict[taxonomy.Scope, list[taxonomy.TagPath]] = {s: [] for s in taxonomy.Scope}
        for text in params.tag_pool:
            path = taxonomy.resolve(registry, text)
            pools[registry.scope_of(path)].append(path)
        return algebra.UniverseBounds(
            params.max_actors,
            params.max_phases,
            tuple(pools[taxonomy.Scope.ACTOR]),
            tuple(pools[taxonomy.Scope.STATIC]),
            tuple(pools[taxonomy.Scope.CONDITION]),
            params.exclusive_actor_states,
        )

    @app.exception_handler(ScentagError)
    async def scentag_error(request: Request, exc: ScentagError) -> JSONResponse:
        status = 422 if exc.kind == "usage" else 409
        detail = {"kind": exc.kind, "message": exc.message}
        if exc.loc is not None:
            detail["line"] = exc.loc.line
            detail["col"] = exc.loc.col
        return JSONResponse(status_code=status, content={"detail": detail})

    @app.get("/health")
    def health() -> dict[str, str]:
        return {"status": "ok"}

    # --- registry ---

    @app.post("/registry/trees", response_model=models.TreesResponse)
    def list_trees(req: models.RegistryRequest) -> models.TreesResponse:
        reg = registry_for(req)
        return models.TreesResponse(
            trees=[
                models.TreeInfo(
                    tree_id=t.tree_id, scope=t.scope.value, nodes=t.node_count()
                )
                for t in reg.trees.values()
            ]
        )

    @app.post("/registry/tree", response_model=models.TreeResponse)
    def show_tree(req: models.TreeRequest) -> models.TreeResponse:
        reg = registry_for(req)
        tree = reg.trees.get(req.tree_id)
        if tree is None:
            raise ValidationError(f"unknown tag tree {req.tree_id!r}")
        return models.TreeResponse(
            tree_id=tree.tree_id, scope=tree.scope.value, root=_node_model(tree.root)
        )

    @app.post("/registry/dot", response_model=models.DotResponse)
    def tree_dot(req: models.TreeRequest) -> models.DotResponse:
        reg = registry_for(req)
        return models.DotResponse(dot=taxonomy.export_dot(reg, req.tree_id))

    @app.post("/registry/document", response_model=models.RegistryDocResponse)
    def registry_document(req: models.RegistryRequest) -> models.RegistryDocResponse:
        reg = registry_for(req)
        return models.RegistryDocResponse(document=taxonomy.serialize_registry(reg))

    @app.post("/registry/resolve", response_model=models.ResolveResponse)
    def resolve_path(req: models.ResolveRequest) -> models.ResolveResponse:
        reg = registry_for(req)
        path = taxonomy.resolve(reg, req.path)
        return models.ResolveResponse(
            canonical=path.canonical(),
            tree_id=path.tree_id,
            segments=list(path.segments),
            scope=reg.scope_of(path).value,
        )

    @app.post("/registry/subsumes", response_model=models.SubsumesResponse)
    def subsumes_paths(req: models.SubsumesRequest) -> models.SubsumesResponse:
        reg = registry_for(req)
        general = taxonomy.resolve(reg, req.general)
        specific = taxonomy.resolve(reg, req.specific)
        return models.SubsumesResponse(subsumes=taxonomy.subsumes(reg, general, specific))

    # --- categories and scenarios ---

    @app.post("/categories/parse", response_model=models.ParseCategoriesResponse)
    def parse_categories(req: models.CategoryDocRequest) -> models.ParseCategoriesResponse:
        reg = registry_for(req)
        cats = category.parse_category(reg, req.source)
        return models.ParseCategoriesResponse(
            categories=[
                models.CategorySummary(
                    name=c.name,
                    canonical=category.serialize_category(c, reg),
                    universal=c.is_universal,
                )
                for c in cats
            ]
        )

    @app.post("/categories/lint", response_model=models.LintResponse)
    def lint_categories(req: models.CategoryDocRequest) -> models.LintResponse:
        reg = registry_for(req)
        out = []
        for cat in category.parse_category(reg, req.source):
            for diag in category.lint_category(reg, cat):
                out.append(
                    models.DiagnosticModel(
                        category=cat.name,
                        severity=diag.severity,
                        code=diag.code,
                        message=diag.message,
                        line=diag.loc.line if diag.loc else None,
                        col=diag.loc.col if diag.loc else None,
                    )
                )
        return models.LintResponse(diagnostics=out)

    @app.post("/scenarios/validate", response_model=models.ScenarioResponse)
    def validate_scenario_doc(req: models.ScenarioDocRequest) -> models.ScenarioResponse:
        reg = registry_for(req)
        record = scenario.parse_scenario(reg, req.source)
        return models.ScenarioResponse(
            scenario_id=record.scenario_id,
            canonical=scenario.serialize_scenario(record),
        )

    # --- matching ---

    @app.post("/match", response_model=models.MatchResponse)
    def match(req: models.MatchRequest) -> models.MatchResponse:
        reg = registry_for(req)
        library = category.parse_category(reg, req.categories)
        cat = _find_category(library, req.category_name)
        record = scenario.parse_scenario(reg, req.scenario)
        witness = matcher.comprises(reg, cat, record)
        if witness is None:
            return models.MatchResponse(matched=False)
        return models.MatchResponse(matched=True, witness=_witness_model(witness))

    @app.post("/match/all", response_model=models.MatchAllResponse)
    def match_all(req: models.MatchAllRequest) -> models.MatchAllResponse:
        reg = registry_for(req)
        library = category.parse_category(reg, req.categories)
        record = scenario.parse_scenario(reg, req.scenario)
        hits = matcher.comprising_categories(reg, library, record)
        return models.MatchAllResponse(
            matches=[
                models.MatchAllEntry(name=name, witness=_witness_model(w))
                for name, w in hits
            ]
        )

    # --- inclusion, conjunction, satisfiability ---

    @app.post("/includes", response_model=models.IncludesResponse)
    def includes(req: models.IncludesRequest) -> models.IncludesResponse:
        reg = registry_for(req)
        library = category.parse_category(reg, req.categories)
        larger = _find_category(library, req.larger)
        smaller = _find_category(library, req.smaller)
        verdict = algebra.includes_syntactic(reg, larger, smaller)
        if verdict.status is algebra.InclusionStatus.UNKNOWN and req.semantic:
            bounds = bounds_for(reg, req, [larger, smaller])
            verdict = algebra.includes_semantic(reg, larger, smaller, bounds)
        proof = None
        if isinstance(verdict.proof, algebra.MappingProof):
            proof = models.ProofModel(
                kind="mapping",
                requirement_map=[list(p) for p in verdict.proof.requirement_map],
                group_map=[list(p) for p in verdict.proof.group_map],
                snapshot_map=[list(p) for p in verdict.proof.snapshot_map],
            )
        elif isinstance(verdict.proof, algebra.ExhaustionProof):
            proof = models.ProofModel(
                kind="exhaustion",
                records_checked=verdict.proof.records_checked,
                comprised_checked=verdict.proof.comprised_checked,
            )
        counterexample = None
        if verdict.counterexample is not None:
            counterexample = scenario.serialize_scenario(verdict.counterexample)
        return models.IncludesResponse(
            status=verdict.status.value,
            note=verdict.note,
            proof=proof,
            counterexample=counterexample,
        )

    @app.post("/conjoin", response_model=models.ConjoinResponse)
    def conjoin_categories(req: models.ConjoinRequest) -> models.ConjoinResponse:
        reg = registry_for(req)
        library = category.parse_category(reg, req.categories)
        result = algebra.conjoin(
            reg, _find_category(library, req.a), _find_category(library, req.b)
        )
        return models.ConjoinResponse(category=category.serialize_category(result, reg))

    @app.post("/satisfiable", response_model=models.SatisfiableResponse)
    def satisfiable(req: models.SatisfiableRequest) -> models.SatisfiableResponse:
        reg = registry_for(req)
        library = category.parse_category(reg, req.categories)
        cat = _find_category(library, req.name)
        bounds = bounds_for(reg, req, [cat])
        record = algebra.is_satisfiable(reg, cat, bounds)
        if record is None:
            return models.SatisfiableResponse(satisfiable=False)
        return models.SatisfiableResponse(
            satisfiable=True, record=scenario.serialize_scenario(record)
        )

    # --- store ---

    @app.post("/store/init", response_model=models.StoreInitResponse)
    def store_init(req: models.StoreInitRequest) -> models.StoreInitResponse:
        store.StoreFile.init(req.path)
        return models.StoreInitResponse(path=req.path)

    @app.post("/store/add", response_model=models.StoreAddResponse)
    def store_add(req: models.StoreAddRequest) -> models.StoreAddResponse:
        reg = registry_for(req)
        record = scenario.parse_scenario(reg, req.scenario)
        sf = store.StoreFile(req.path, reg)
        sf.add(record)
        return models.StoreAddResponse(
            scenario_id=record.scenario_id, records=len(sf.records)
        )

    @app.post("/store/query", response_model=models.StoreQueryResponse)
    def store_query(req: models.StoreQueryRequest) -> models.StoreQueryResponse:
        reg = registry_for(req)
        sf = store.StoreFile(req.path, reg)
        expr = store.parse_query(reg, req.query)
        return models.StoreQueryResponse(ids=sf.query(expr))

    @app.post("/testcases/select", response_model=models.TestCasesResponse)
    def testcases_select(req: models.TestCasesRequest) -> models.TestCasesResponse:
        reg = registry_for(req)
        library = category.parse_category(reg, req.library)
        sf = store.StoreFile(req.store_path, reg)
        odd = store.OddSpec(tuple(req.odd))
        selections = store.select_test_cases(sf, library, odd)
        return models.TestCasesResponse(
            selections=[
                models.SelectionModel(scenario_id=rid, categories=names)
                for rid, names in selections
            ]
        )

    return app
