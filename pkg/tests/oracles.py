"""Independent oracles and random generators shared by the test modules.

Nothing here calls the code paths it is used to check: the regex matcher
walks the AST directly, node counts are read straight off the AST, and
string enumeration never touches an automaton.
"""

from __future__ import annotations

import itertools
import random
from functools import lru_cache

from ctrmatch.contract_lang import ContractAst, FieldDecl, Group, MethodDecl, Param, TypeName
from ctrmatch.protocol_automata import Alt, Concat, Opt, Plus, Star, Symbol, format_protocol, split_protocol

# ---------------------------------------------------------------------------
# regex oracles


def _ends(node, word: tuple, i: int) -> frozenset[int]:
    """Positions j such that node matches word[i:j]."""
    return _ends_cached(node, word, i)


@lru_cache(maxsize=None)
def _ends_cached(node, word: tuple, i: int) -> frozenset[int]:
    if isinstance(node, Symbol):
        return frozenset({i + 1}) if i < len(word) and word[i] == node.name else frozenset()
    if isinstance(node, Alt):
        return frozenset().union(*(_ends(c, word, i) for c in node.items))
    if isinstance(node, Concat):
        current = {i}
        for child in node.items:
            current = set().union(*(_ends(child, word, p) for p in current)) if current else set()
        return frozenset(current)
    if isinstance(node, Opt):
        return frozenset({i}) | _ends(node.child, word, i)
    if isinstance(node, (Star, Plus)):
        reached = set() if isinstance(node, Plus) else {i}
        frontier = {i}
        while frontier:
            nxt = set().union(*(_ends(node.child, word, p) for p in frontier)) - reached
            reached |= nxt
            frontier = nxt
        return frozenset(reached)
    raise TypeError(node)


def regex_match(node, word) -> bool:
    word = tuple(word)
    return len(word) in _ends(node, word, 0)


def words_up_to(alphabet, max_len: int):
    alphabet = sorted(alphabet)
    for n in range(max_len + 1):
        yield from itertools.product(alphabet, repeat=n)


def same_language_up_to(a, b, alphabet, max_len: int = 6) -> bool:
    return all(regex_match(a, w) == regex_match(b, w) for w in words_up_to(alphabet, max_len))


def random_regex(rng: random.Random, alphabet, depth: int):
    """Random protocol AST of depth at most ``depth`` (a lone symbol has depth 1)."""
    if depth <= 1 or rng.random() < 0.25:
        return Symbol(rng.choice(alphabet))
    op = rng.choice(["cat", "cat", "alt", "alt", "star", "plus", "opt"])
    if op in ("star", "plus", "opt"):
        child = random_regex(rng, alphabet, depth - 1)
        return {"star": Star, "plus": Plus, "opt": Opt}[op](child)
    parts = [random_regex(rng, alphabet, depth - 1) for _ in range(2)]
    cls = Concat if op == "cat" else Alt
    items = []
    for p in parts:
        items.extend(p.items if isinstance(p, cls) else (p,))
    return cls(tuple(items))


def regex_depth(node) -> int:
    if isinstance(node, Symbol):
        return 1
    if isinstance(node, (Concat, Alt)):
        return 1 + max(regex_depth(c) for c in node.items)
    return 1 + regex_depth(node.child)


def rewrite_equivalent(rng: random.Random, node):
    """A language-preserving rewrite of ``node`` (used to produce equal pairs)."""
    choice = rng.randrange(6)
    if choice == 0 and isinstance(node, Alt):
        items = list(node.items)
        rng.shuffle(items)
        return Alt(tuple(items))
    if choice == 1:
        return Alt((node, node)) if not isinstance(node, Alt) else Alt(node.items + node.items[:1])
    if choice == 2 and isinstance(node, Plus):
        return Concat((node.child, Star(node.child)))
    if choice == 3 and isinstance(node, Star):
        return Star(Star(node.child)) if not isinstance(node.child, Star) else node.child
    if choice == 4 and isinstance(node, Opt):
        return Opt(Opt(node.child))
    if isinstance(node, (Star, Plus, Opt)):
        return type(node)(rewrite_equivalent(rng, node.child))
    if isinstance(node, (Concat, Alt)):
        items = list(node.items)
        k = rng.randrange(len(items))
        items[k] = rewrite_equivalent(rng, items[k])
        return type(node)(tuple(items))
    return node


# ---------------------------------------------------------------------------
# contract oracles / generators


def expected_kind_counts(ast: ContractAst) -> dict[str, int]:
    """Node counts per kind read directly off the AST."""
    types = set()
    for f in ast.fields:
        types.add(f.dtype.name + "[]" * f.dtype.dims)
    params = 0
    returns = 0
    for m in ast.methods:
        for p in m.params:
            params += 1
            types.add(p.dtype.name + "[]" * p.dtype.dims)
        if m.return_type is not None:
            returns += 1
            types.add(m.return_type.name + "[]" * m.return_type.dims)
    return {
        "ROOT": 0,
        "CONTRACT": 1,
        "FIELD": len(ast.fields),
        "METHOD": len(ast.methods),
        "PARAM": params,
        "RETURN": returns,
        "TYPE": len(types),
    }


def expected_edge_count(ast: ContractAst) -> int:
    params = sum(len(m.params) for m in ast.methods)
    returns = sum(m.return_type is not None for m in ast.methods)
    return 2 * len(ast.fields) + len(ast.methods) + 2 * params + 2 * returns


TYPE_POOL = ["String", "int", "Document", "Boolean", "Ledger", "Account"]
NAME_POOL = ["alpha", "beta", "gamma", "delta", "omega", "sigma", "kappa", "theta"]


def random_type(rng: random.Random, pool=TYPE_POOL) -> TypeName:
    return TypeName(rng.choice(pool), rng.choice([0, 0, 0, 1]))


def _group_for(modifiers: frozenset, required: bool) -> Group:
    if required:
        return Group.REQUIRED
    return Group.PROVIDED if "public" in modifiers else Group.INTERNAL


def random_contract(
    rng: random.Random,
    component: str = "Comp",
    max_fields: int = 3,
    max_methods: int = 4,
    max_params: int = 2,
    type_pool=TYPE_POOL,
    distinct_signatures: bool = False,
    protocol_depth: int = 3,
) -> ContractAst:
    """Random well-formed contract; methods are grouped consistently with modifiers.

    With ``distinct_signatures`` no two methods share (param types, return type).
    """
    names = iter(rng.sample([f"{n}{i}" for n in NAME_POOL for i in range(3)], 24))
    fields = tuple(
        FieldDecl(next(names), random_type(rng, type_pool), frozenset([rng.choice(["private", "public"])]))
        for _ in range(rng.randint(0, max_fields))
    )
    methods = []
    signatures = set()
    required_tail = rng.random() < 0.5
    n_methods = rng.randint(1, max_methods)
    attempts = 0
    while len(methods) < n_methods and attempts < 50:
        attempts += 1
        params = tuple(Param(f"p{j}", random_type(rng, type_pool)) for j in range(rng.randint(0, max_params)))
        ret = None if rng.random() < 0.4 else random_type(rng, type_pool)
        sig = (tuple(str(p.dtype) for p in params), str(ret))
        if distinct_signatures and sig in signatures:
            continue
        signatures.add(sig)
        mods = frozenset([rng.choice(["public", "public", "private"])])
        is_required = required_tail and len(methods) == n_methods - 1 and n_methods > 1
        methods.append(MethodDecl(next(names), ret, params, mods, _group_for(mods, is_required)))
    alphabet = [m.name for m in methods]
    protocol = random_regex(rng, alphabet, protocol_depth)
    return ContractAst(
        contract_name=f"ctr_{component}",
        component_class=component,
        fields=fields,
        methods=tuple(methods),
        protocol=tuple(split_protocol(format_protocol(protocol))),
    )


def rename_contract(rng: random.Random, ast: ContractAst, component: str | None = None) -> ContractAst:
    """Consistently rename fields, methods and protocol symbols."""
    used = set()

    def fresh() -> str:
        while True:
            name = "r" + "".join(rng.choice("abcdefghijklmnopqrstuvwxyz") for _ in range(6))
            if name not in used:
                used.add(name)
                return name

    method_map = {m.name: fresh() for m in ast.methods}
    fields = tuple(FieldDecl(fresh(), f.dtype, f.modifiers) for f in ast.fields)
    methods = tuple(
        MethodDecl(method_map[m.name], m.return_type, tuple(Param(fresh(), p.dtype) for p in m.params), m.modifiers, m.group)
        for m in ast.methods
    )
    protocol = tuple(method_map.get(t, t) for t in ast.protocol)
    return ContractAst(ast.contract_name, component or ast.component_class, fields, methods, protocol)

