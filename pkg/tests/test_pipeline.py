import json
import random
import subprocess
import sys

import pytest

from ctrmatch.cli import main
from ctrmatch.contract_graph import NodeKind, build_contract_graph, read_graphml
from ctrmatch.contract_lang import ParseError, format_contract, parse_contract_source
from ctrmatch.pipeline import (
    MatchOutcome,
    Recommendation,
    Repository,
    build_architecture,
    ingest,
    match,
    report,
)

from oracles import random_contract


@pytest.fixture
def repo(tmp_path):
    return Repository.open(tmp_path / "repo")


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


def with_protocol(source: str, protocol: str) -> str:
    head, _, _ = source.rpartition("protocol {")
    return head + "protocol { " + protocol + " }\n}\n"


class TestIngest:
    def test_sample(self, repo, sample_path):
        (rec,) = ingest([sample_path], repo)
        assert rec.ok and rec.component == "DocumentManager"
        assert rec.warnings == ["UndeclaredProtocolSymbol('searchDocument')"]
        assert list(repo.contracts) == ["DocumentManager"]
        graph_file = repo.root / "DocumentManager.graphml"
        with open(graph_file, "rb") as fh:
            assert read_graphml(fh) == build_contract_graph(parse_contract_source(sample_path.read_text()))
        assert Repository.open(repo.root).contracts == repo.contracts

    def test_no_files(self, repo):
        assert ingest([], repo) == []
        assert repo.contracts == {}

    def test_unbalanced_braces(self, repo, tmp_path, sample_path):
        bad = write(tmp_path, "bad.ctr", "contract B of Broken {\n  public void a() {;}\n  protocol { a }\n")
        records = ingest([bad, sample_path], repo)
        assert not records[0].ok
        assert records[0].error.startswith(f"{bad}:3:")
        assert records[1].ok
        assert list(repo.contracts) == ["DocumentManager"]

    def test_duplicate_declarations_rejected(self, repo, tmp_path):
        bad = write(tmp_path, "dup.ctr", "contract D of Dup { int x; int x; protocol { a } }")
        (rec,) = ingest([bad], repo)
        assert not rec.ok and "DuplicateField" in rec.error

    def test_reingest_replaces(self, repo, tmp_path, sample_path, sample_source):
        ingest([sample_path], repo)
        changed = write(tmp_path, "dm2.ctr", with_protocol(sample_source, "viewDocument*"))
        ingest([changed], repo)
        assert repo.contracts["DocumentManager"].protocol == "viewDocument *"


class TestBuildArchitecture:
    def test_empty(self, repo):
        with open(build_architecture(repo), "rb") as fh:
            aa = read_graphml(fh)
        assert [r.kind for r in aa.nodes.values()] == [NodeKind.ROOT]

    def test_out_degree_grows(self, repo, tmp_path):
        rng = random.Random(1)
        files = [write(tmp_path, f"c{i}.ctr", format_contract(random_contract(rng, f"Comp{i}"))) for i in range(7)]
        ingest(files[:6], repo)

        def out_degree():
            with open(build_architecture(repo), "rb") as fh:
                aa = read_graphml(fh)
            root = aa.nodes_of_kind(NodeKind.ROOT)[0]
            return sum(1 for s, _, _ in aa.edges if s == root)

        assert out_degree() == 6
        ingest(files[6:], repo)
        assert out_degree() == 7


class TestMatch:
    def test_self_match(self, repo, sample_path):
        ingest([sample_path], repo)
        outcome = match(sample_path, repo)
        assert outcome.phase1_candidates == ["DocumentManager"]
        assert outcome.confirmed_components == ["DocumentManager"]
        assert outcome.recommendation is Recommendation.REUSE

    def test_protocol_mismatch(self, repo, tmp_path, sample_path, sample_source):
        ingest([sample_path], repo)
        req = write(tmp_path, "req.ctr", with_protocol(sample_source, "viewDocument*"))
        outcome = match(req, repo)
        assert outcome.phase1_candidates == ["DocumentManager"]
        assert outcome.confirmed == []
        assert outcome.recommendation is Recommendation.BUILD_NEW

    def test_absent_type(self, repo, tmp_path, sample_path):
        ingest([sample_path], repo)
        req = write(tmp_path, "req.ctr", "contract R of Books { public Ledger open() {;} protocol { open } }")
        outcome = match(req, repo)
        assert outcome.phase1_candidates == [] and outcome.recommendation is Recommendation.BUILD_NEW

    def test_renamed_requirement(self, repo, tmp_path, sample_path):
        ingest([sample_path], repo)
        req = write(
            tmp_path,
            "req.ctr",
            """contract want of Wanted {
                public void show(String id) {;}
                public Document[] find(String q) {;}
                protocol { find+ show }
            }""",
        )
        cand = write(
            tmp_path,
            "cand.ctr",
            """contract have of Have {
                public void display(String key) {;}
                public Document[] lookup(String query) {;}
                public int size() {;}
                protocol { lookup lookup* display }
            }""",
        )
        ingest([cand], repo)
        outcome = match(req, repo)
        assert outcome.phase1_candidates == ["DocumentManager", "Have"]
        assert outcome.confirmed == [("Have", {"find": "lookup", "show": "display"})]

    def test_unparseable_candidate_protocol(self, repo, tmp_path):
        cand = write(tmp_path, "c.ctr", "contract c of Caret { public void a() {;} protocol { a ^ a } }")
        (rec,) = ingest([cand], repo)
        assert rec.ok and any("ProtocolSyntax" in w for w in rec.warnings)
        req = write(tmp_path, "r.ctr", "contract r of R { public void b() {;} protocol { b } }")
        outcome = match(req, repo)
        assert outcome.phase1_candidates == ["Caret"] and outcome.confirmed == []
        assert any("Caret" in w for w in outcome.warnings)

    def test_bad_requirement_raises(self, repo, tmp_path):
        req = write(tmp_path, "r.ctr", "contract r of R { public void b() {;} ")
        with pytest.raises(ParseError):
            match(req, repo)

    def test_idempotent_reports(self, repo, sample_path):
        ingest([sample_path], repo)
        first = report(match(sample_path, repo), "json")
        assert report(match(sample_path, repo), "json") == first


class TestReport:
    def test_empty(self):
        assert report(MatchOutcome(), "json") == '{"phase1":[],"confirmed":[],"recommendation":"BUILD_NEW"}'

    def test_confirmed(self):
        outcome = MatchOutcome(["A", "B"], [("A", {"y": "b", "x": "a"})])
        data = json.loads(report(outcome, "json"))
        assert data == {
            "phase1": ["A", "B"],
            "confirmed": [{"component": "A", "substitution": {"x": "a", "y": "b"}}],
            "recommendation": "REUSE",
        }

    def test_text(self):
        text = report(MatchOutcome(["A", "B"], [("A", {"x": "a"})], ["note"]), "text")
        lines = text.splitlines()
        assert lines[0] == "recommendation: REUSE"
        idx = lines.index("matched structure, protocol mismatch:")
        assert lines[idx + 1] == "  B"
        assert "  note" in lines

    def test_unknown_format(self):
        with pytest.raises(ValueError):
            report(MatchOutcome(), "xml")


class TestCli:
    def test_round(self, tmp_path, sample_path, capsys):
        repo = str(tmp_path / "r")
        assert main(["ingest", str(sample_path), "--repo", repo]) == 0
        assert main(["build-aa", "--repo", repo]) == 0
        capsys.readouterr()
        assert main(["match", str(sample_path), "--repo", repo]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["recommendation"] == "REUSE"

    def test_exit_codes(self, tmp_path, sample_path, sample_source, capsys, monkeypatch):
        repo = tmp_path / "r"
        monkeypatch.setenv("CTRMATCH_REPO", str(repo))
        bad = write(tmp_path, "bad.ctr", "contract x {")
        assert main(["ingest", str(sample_path), str(bad)]) == 2
        req = write(tmp_path, "req.ctr", with_protocol(sample_source, "viewDocument*"))
        assert main(["match", str(req), "--format", "text", "--witness-limit", "3"]) == 1
        assert "matched structure, protocol mismatch:\n  DocumentManager" in capsys.readouterr().out
        assert main(["match", str(bad)]) == 2
        assert main(["match", str(tmp_path / "missing.ctr")]) == 2

    def test_no_repo(self, monkeypatch, sample_path):
        monkeypatch.delenv("CTRMATCH_REPO", raising=False)
        assert main(["match", str(sample_path)]) == 2

    def test_module_entry_point(self, tmp_path, sample_path):
        repo = str(tmp_path / "r")
        run = lambda *args: subprocess.run([sys.executable, "-m", "ctrmatch", *args], capture_output=True, text=True)
        assert run("ingest", str(sample_path), "--repo", repo).returncode == 0
        result = run("match", str(sample_path), "--repo", repo)
        assert result.returncode == 0
        assert "UndeclaredProtocolSymbol('searchDocument')" in result.stderr
