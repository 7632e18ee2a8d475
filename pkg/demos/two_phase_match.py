"""
Reuse or build new?
===================

Populate a small repository, then ask whether a required contract is already
available. Structure is matched first; protocols then confirm or reject.
"""

import tempfile
from importlib import resources
from pathlib import Path

from ctrmatch import Repository, ingest, match, report

work = Path(tempfile.mkdtemp())
repo = Repository.open(work / "repo")

documents = Path(str(resources.files("ctrmatch") / "data" / "document_manager.ctr"))
catalog = work / "catalog.ctr"
catalog.write_text(
    """contract catalog of Catalog {
        public void display(String key) {;}
        public Document[] lookup(String query) {;}
        public int size() {;}
        protocol { lookup lookup* display }
    }"""
)
for rec in ingest([documents, catalog], repo):
    print(rec.component, rec.warnings)

# %%
# Names differ from Catalog's, but signatures and protocol line up.
wanted = work / "wanted.ctr"
wanted.write_text(
    """contract want of Wanted {
        public void show(String id) {;}
        public Document[] find(String q) {;}
        protocol { find+ show }
    }"""
)
print(report(match(wanted, repo), "text"))

# %%
# Same shape, different order of calls: the structure still matches,
# the protocol check turns it down.
wanted.write_text(wanted.read_text().replace("find+ show", "show find+"))
outcome = match(wanted, repo)
print(outcome.phase1_candidates, outcome.confirmed, outcome.recommendation.value)
print(report(outcome, "json"))
