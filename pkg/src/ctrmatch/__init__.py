"""Match required component contracts against an application architecture.

Contracts are parsed into labeled graphs; candidates are found by subgraph
matching and confirmed by protocol (regular language) equivalence.
"""

from .contract_graph import (
    EdgeKind,
    LabeledGraph,
    NodeKind,
    NodeRecord,
    build_aa_graph,
    build_contract_graph,
    read_graphml,
    write_graphml,
)
from .contract_lang import (
    ContractAst,
    format_contract,
    parse_contract,
    parse_contract_source,
    tokenize,
    validate_contract,
)
from .pipeline import MatchOutcome, Repository, build_architecture, ingest, match, report
from .protocol_automata import (
    compile_protocol,
    equivalent,
    minimize,
    nfa_to_dfa,
    parse_protocol,
    remap_alphabet,
    to_nfa,
)
from .subgraph_match import find_embeddings, match_against_architecture, node_compatible

__version__ = "0.1.0"
