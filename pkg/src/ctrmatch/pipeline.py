"""Contract repository and the two-phase matcher.

A repository is a flat directory::

    <root>/index.json            component -> contract copy, graph file, protocol
    <root>/contracts/<C>.ctr     copy of each ingested contract
    <root>/<C>.graphml           per-component contract graph
    <root>/aa.graphml            application-architecture composite

Phase 1 embeds the required contract graph into each component graph.
Phase 2 renames the required protocol through each witness's method
substitution and checks language equivalence with the component's
protocol.
"""

from __future__ import annotations

import enum
import json
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .contract_graph import (
    LabeledGraph,
    build_aa_graph,
    build_contract_graph,
    read_graphml,
    write_graphml,
)
from .contract_lang import (
    IDENTIFIER_RE,
    ContractAst,
    ContractSyntaxError,
    parse_contract_source,
    validate_contract,
)
from .protocol_automata import ProtocolParseError, equivalent, parse_protocol, remap_alphabet
from .subgraph_match import match_against_architecture

__all__ = [
    "Recommendation",
    "RepoEntry",
    "Repository",
    "IngestRecord",
    "MatchOutcome",
    "InvalidContractError",
    "ingest",
    "build_architecture",
    "match",
    "report",
    "DEFAULT_WITNESS_LIMIT",
]

log = logging.getLogger(__name__)

DEFAULT_WITNESS_LIMIT = 8
INDEX_FILE = "index.json"
AA_FILE = "aa.graphml"


class Recommendation(str, enum.Enum):
    REUSE = "REUSE"
    BUILD_NEW = "BUILD_NEW"


class InvalidContractError(ValueError):
    pass


@dataclass
class RepoEntry:
    contract_file: str
    graph_file: str
    protocol: str


@dataclass
class Repository:
    root: Path
    contracts: dict[str, RepoEntry] = field(default_factory=dict)

    @classmethod
    def open(cls, root: str | os.PathLike) -> "Repository":
        root = Path(root)
        root.mkdir(parents=True, exist_ok=True)
        repo = cls(root)
        index = root / INDEX_FILE
        if index.exists():
            data = json.loads(index.read_text(encoding="utf-8"))
            for name, entry in data.get("contracts", {}).items():
                repo.contracts[name] = RepoEntry(entry["contract"], entry["graph"], entry["protocol"])
        return repo

    def save(self) -> None:
        data = {
            "contracts": {
                name: {"contract": e.contract_file, "graph": e.graph_file, "protocol": e.protocol}
                for name, e in self.contracts.items()
            }
        }
        (self.root / INDEX_FILE).write_text(json.dumps(data, indent=2) + "\n", encoding="utf-8")

    @property
    def aa_path(self) -> Path:
        return self.root / AA_FILE

    def load_graph(self, component: str) -> LabeledGraph:
        with open(self.root / self.contracts[component].graph_file, "rb") as fh:
            return read_graphml(fh)


@dataclass
class IngestRecord:
    path: str
    component: str | None = None
    warnings: list[str] = field(default_factory=list)
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


def _load_contract(path: Path) -> tuple[ContractAst, list[str]]:
    """Parse and validate; raise on hard problems, return soft ones as text."""
    ast = parse_contract_source(path.read_text(encoding="utf-8"))
    issues = validate_contract(ast)
    errors = [str(i) for i in issues if i.severity == "error"]
    if errors:
        raise InvalidContractError("; ".join(errors))
    warnings = [str(i) for i in issues if i.severity == "warning"]
    return ast, warnings


def ingest(contract_files: Iterable[str | os.PathLike], repo: Repository) -> list[IngestRecord]:
    """Parse, graph and store each contract; failures skip only that file."""
    records = []
    changed = False
    for raw in contract_files:
        path = Path(raw)
        rec = IngestRecord(str(path))
        records.append(rec)
        try:
            ast, rec.warnings = _load_contract(path)
        except ContractSyntaxError as exc:
            rec.error = f"{path}:{exc.line}:{exc.column}: {exc.message}"
        except (InvalidContractError, OSError, UnicodeDecodeError) as exc:
            rec.error = f"{path}: {exc}"
        if rec.error:
            log.error(rec.error)
            continue
        try:
            parse_protocol(ast.protocol)
        except ProtocolParseError as exc:
            rec.warnings.append(f"ProtocolSyntax({exc})")
        for w in rec.warnings:
            log.warning("%s: %s", path, w)

        name = ast.component_class
        rec.component = name
        (repo.root / "contracts").mkdir(exist_ok=True)
        contract_copy = f"contracts/{name}.ctr"
        (repo.root / contract_copy).write_bytes(path.read_bytes())
        graph_file = f"{name}.graphml"
        with open(repo.root / graph_file, "wb") as fh:
            write_graphml(build_contract_graph(ast), fh)
        repo.contracts[name] = RepoEntry(contract_copy, graph_file, " ".join(ast.protocol))
        changed = True
    if changed:
        repo.save()
        repo.aa_path.unlink(missing_ok=True)
    return records


def build_architecture(repo: Repository) -> Path:
    graphs = [repo.load_graph(name) for name in repo.contracts]
    with open(repo.aa_path, "wb") as fh:
        write_graphml(build_aa_graph(graphs), fh)
    return repo.aa_path


@dataclass
class MatchOutcome:
    phase1_candidates: list[str] = field(default_factory=list)
    confirmed: list[tuple[str, dict[str, str]]] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @property
    def recommendation(self) -> Recommendation:
        return Recommendation.REUSE if self.confirmed else Recommendation.BUILD_NEW

    @property
    def confirmed_components(self) -> list[str]:
        return [name for name, _ in self.confirmed]


def match(
    required_contract: str | os.PathLike,
    repo: Repository,
    witness_limit: int = DEFAULT_WITNESS_LIMIT,
) -> MatchOutcome:
    """Run both matching phases for one required contract.

    Raises ContractSyntaxError, InvalidContractError or ProtocolParseError
    when the required contract itself is unusable.
    """
    path = Path(required_contract)
    ast, warnings = _load_contract(path)
    required_protocol = parse_protocol(ast.protocol)
    outcome = MatchOutcome(warnings=[f"{path.name}: {w}" for w in warnings])

    if not repo.aa_path.exists():
        build_architecture(repo)
    with open(repo.aa_path, "rb") as fh:
        aa = read_graphml(fh)

    reports = match_against_architecture(build_contract_graph(ast), aa, witness_limit)
    declared = set(ast.method_names())
    # protocol symbols with no declared method have no graph image; keep them literal
    passthrough = {s: s for s in ast.protocol if s not in declared and IDENTIFIER_RE.fullmatch(s)}

    for rep in reports:
        if not rep.matched:
            continue
        outcome.phase1_candidates.append(rep.candidate_component)
        entry = repo.contracts.get(rep.candidate_component)
        if entry is None:
            outcome.warnings.append(f"{rep.candidate_component}: not in repository index")
            continue
        try:
            candidate_protocol = parse_protocol(entry.protocol)
        except ProtocolParseError as exc:
            outcome.warnings.append(f"{rep.candidate_component}: protocol does not parse ({exc})")
            continue
        tried: set[tuple] = set()
        for witness in rep.mappings:
            key = tuple(sorted(witness.method_substitution.items()))
            if not witness.consistent or key in tried:
                continue
            tried.add(key)
            renamed = remap_alphabet(required_protocol, {**passthrough, **witness.method_substitution})
            if equivalent(renamed, candidate_protocol):
                outcome.confirmed.append((rep.candidate_component, dict(witness.method_substitution)))
                break
    return outcome


def report(outcome: MatchOutcome, format: str = "json") -> str:
    if format == "json":
        data = {
            "phase1": list(outcome.phase1_candidates),
            "confirmed": [
                {"component": name, "substitution": dict(sorted(subst.items()))}
                for name, subst in outcome.confirmed
            ],
            "recommendation": outcome.recommendation.value,
        }
        return json.dumps(data, separators=(",", ":"))
    if format != "text":
        raise ValueError(f"unknown report format {format!r}")

    lines = [f"recommendation: {outcome.recommendation.value}"]
    confirmed = outcome.confirmed_components
    lines.append("confirmed:")
    if not outcome.confirmed:
        lines.append("  (none)")
    for name, subst in outcome.confirmed:
        lines.append(f"  {name}")
        for src, dst in sorted(subst.items()):
            lines.append(f"      {src} -> {dst}")
    mismatched = [c for c in outcome.phase1_candidates if c not in confirmed]
    lines.append("matched structure, protocol mismatch:")
    if not mismatched:
        lines.append("  (none)")
    lines.extend(f"  {c}" for c in mismatched)
    if outcome.warnings:
        lines.append("warnings:")
        lines.extend(f"  {w}" for w in outcome.warnings)
    return "\n".join(lines)
