"""Protocol expressions: parsing, Thompson NFAs, subset construction,
Hopcroft minimization and language equivalence.

Protocol syntax, loosest to tightest binding::

    alt     := concat ('|' concat)*
    concat  := postfix ((';')? postfix)*
    postfix := atom ('*' | '+' | '?')*
    atom    := IDENT | '(' alt ')'

``;`` is plain sequencing. ``^`` is reserved and rejected.
"""

from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence, Union

__all__ = [
    "Symbol",
    "Concat",
    "Alt",
    "Star",
    "Plus",
    "Opt",
    "Empty",
    "ProtocolAst",
    "ProtocolParseError",
    "UnsupportedOperatorError",
    "UnmappedSymbolError",
    "Nfa",
    "Dfa",
    "split_protocol",
    "parse_protocol",
    "format_protocol",
    "symbols",
    "to_nfa",
    "nfa_accepts",
    "nfa_to_dfa",
    "minimize",
    "compile_protocol",
    "remap_alphabet",
    "equivalent",
]


@dataclass(frozen=True)
class Symbol:
    name: str


@dataclass(frozen=True)
class Concat:
    items: tuple


@dataclass(frozen=True)
class Alt:
    items: tuple


@dataclass(frozen=True)
class Star:
    child: "ProtocolAst"


@dataclass(frozen=True)
class Plus:
    child: "ProtocolAst"


@dataclass(frozen=True)
class Opt:
    child: "ProtocolAst"


@dataclass(frozen=True)
class Empty:
    pass


ProtocolAst = Union[Symbol, Concat, Alt, Star, Plus, Opt, Empty]


class ProtocolParseError(ValueError):
    pass


class UnsupportedOperatorError(ProtocolParseError):
    pass


class UnmappedSymbolError(KeyError):
    def __init__(self, symbol: str):
        super().__init__(symbol)
        self.symbol = symbol

    def __str__(self) -> str:
        return f"no substitution for protocol symbol {self.symbol!r}"


# ---------------------------------------------------------------------------
# Parsing

_IDENT = re.compile(r"[A-Za-z_$][A-Za-z0-9_$]*")
_TOKEN = re.compile(r"\s*(?:([A-Za-z_$][A-Za-z0-9_$]*)|([()+*;^|?]))")
_POSTFIX = {"*": Star, "+": Plus, "?": Opt}


def split_protocol(text: str) -> list[str]:
    """Split protocol text such as ``"(a+b?)*"`` into lexemes."""
    out, pos = [], 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ProtocolParseError(f"unexpected character {text[pos:].lstrip()[:1]!r} at offset {pos}")
        out.append(m.group(1) or m.group(2))
        pos = m.end()
    return out


def _flatten(cls, parts: list) -> ProtocolAst:
    items: list = []
    for p in parts:
        items.extend(p.items if isinstance(p, cls) else (p,))
    return items[0] if len(items) == 1 else cls(tuple(items))


class _ProtocolParser:
    def __init__(self, tokens: Sequence[str]):
        self.tokens = list(tokens)
        self.pos = 0

    def peek(self) -> str | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def fail(self, what: str) -> ProtocolParseError:
        tok = self.peek()
        found = "end of protocol" if tok is None else repr(tok)
        return ProtocolParseError(f"{what}, found {found} at token {self.pos}")

    def parse(self) -> ProtocolAst:
        if not self.tokens:
            raise ProtocolParseError("empty protocol")
        if "^" in self.tokens:
            raise UnsupportedOperatorError("the '^' operator is not supported in protocols")
        node = self.alt()
        if self.peek() is not None:
            raise self.fail("expected end of protocol")
        return node

    def alt(self) -> ProtocolAst:
        parts = [self.concat()]
        while self.peek() == "|":
            self.pos += 1
            parts.append(self.concat())
        return _flatten(Alt, parts)

    def concat(self) -> ProtocolAst:
        parts = [self.postfix()]
        while True:
            tok = self.peek()
            if tok == ";":
                self.pos += 1
                parts.append(self.postfix())
            elif tok == "(" or (tok is not None and _IDENT.fullmatch(tok)):
                parts.append(self.postfix())
            else:
                return _flatten(Concat, parts)

    def postfix(self) -> ProtocolAst:
        node = self.atom()
        while self.peek() in _POSTFIX:
            node = _POSTFIX[self.tokens[self.pos]](node)
            self.pos += 1
        return node

    def atom(self) -> ProtocolAst:
        tok = self.peek()
        if tok == "(":
            self.pos += 1
            node = self.alt()
            if self.peek() != ")":
                raise self.fail("expected ')'")
            self.pos += 1
            return node
        if tok is not None and _IDENT.fullmatch(tok):
            self.pos += 1
            return Symbol(tok)
        raise self.fail("expected a method name or '('")


def parse_protocol(text: Sequence[str] | str) -> ProtocolAst:
    """Parse protocol lexemes (or raw text) into an AST.

    >>> parse_protocol("(a|b)*")
    Star(child=Alt(items=(Symbol(name='a'), Symbol(name='b'))))
    """
    if isinstance(text, str):
        text = split_protocol(text)
    lexemes = [getattr(t, "lexeme", t) for t in text]
    return _ProtocolParser(lexemes).parse()


def format_protocol(ast: ProtocolAst) -> str:
    """Render with the minimum parentheses needed to reparse to ``ast``."""

    def go(node, ctx: int) -> str:
        # ctx: 0 = alternation operand, 1 = concatenation operand, 2 = postfix operand
        if isinstance(node, Symbol):
            return node.name
        if isinstance(node, Alt):
            s = " | ".join(go(c, 0) for c in node.items)
            return f"({s})" if ctx > 0 else s
        if isinstance(node, Concat):
            s = " ".join(go(c, 1) for c in node.items)
            return f"({s})" if ctx > 1 else s
        if isinstance(node, (Star, Plus, Opt)):
            op = {Star: "*", Plus: "+", Opt: "?"}[type(node)]
            return go(node.child, 2) + op
        raise ValueError(f"cannot render {node!r}")

    return go(ast, 0)


def symbols(ast: ProtocolAst) -> set[str]:
    if isinstance(ast, Symbol):
        return {ast.name}
    if isinstance(ast, (Concat, Alt)):
        return set().union(*(symbols(c) for c in ast.items))
    if isinstance(ast, (Star, Plus, Opt)):
        return symbols(ast.child)
    return set()


def remap_alphabet(ast: ProtocolAst, substitution: Mapping[str, str]) -> ProtocolAst:
    if isinstance(ast, Symbol):
        if ast.name not in substitution:
            raise UnmappedSymbolError(ast.name)
        return Symbol(substitution[ast.name])
    if isinstance(ast, (Concat, Alt)):
        return type(ast)(tuple(remap_alphabet(c, substitution) for c in ast.items))
    if isinstance(ast, (Star, Plus, Opt)):
        return type(ast)(remap_alphabet(ast.child, substitution))
    return ast


# ---------------------------------------------------------------------------
# Automata


@dataclass(frozen=True)
class Nfa:
    """Thompson NFA; a ``None`` label is an epsilon move."""

    state_count: int
    transitions: tuple[tuple[int, str | None, int], ...]
    start: int
    accept: int


def to_nfa(ast: ProtocolAst) -> Nfa:
    transitions: list[tuple[int, str | None, int]] = []
    count = 0

    def new() -> int:
        nonlocal count
        count += 1
        return count - 1

    def build(node) -> tuple[int, int]:
        if isinstance(node, Symbol):
            s, f = new(), new()
            transitions.append((s, node.name, f))
            return s, f
        if isinstance(node, Empty):
            s, f = new(), new()
            transitions.append((s, None, f))
            return s, f
        if isinstance(node, Concat):
            pieces = [build(c) for c in node.items]
            for (_, f1), (s2, _) in zip(pieces, pieces[1:]):
                transitions.append((f1, None, s2))
            return pieces[0][0], pieces[-1][1]
        if isinstance(node, Alt):
            s = new()
            pieces = [build(c) for c in node.items]
            f = new()
            for cs, cf in pieces:
                transitions.append((s, None, cs))
                transitions.append((cf, None, f))
            return s, f
        if isinstance(node, (Star, Plus, Opt)):
            s = new()
            cs, cf = build(node.child)
            f = new()
            transitions.append((s, None, cs))
            transitions.append((cf, None, f))
            if not isinstance(node, Plus):
                transitions.append((s, None, f))
            if not isinstance(node, Opt):
                transitions.append((cf, None, cs))
            return s, f
        raise TypeError(f"not a protocol node: {node!r}")

    start, accept = build(ast)
    return Nfa(count, tuple(transitions), start, accept)


def _closure(states: Iterable[int], eps: Mapping[int, list[int]]) -> frozenset[int]:
    seen = set(states)
    stack = list(seen)
    while stack:
        for nxt in eps.get(stack.pop(), ()):
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return frozenset(seen)


def _split_moves(nfa: Nfa):
    eps: dict[int, list[int]] = {}
    moves: dict[int, list[tuple[str, int]]] = {}
    for s, label, d in nfa.transitions:
        if label is None:
            eps.setdefault(s, []).append(d)
        else:
            moves.setdefault(s, []).append((label, d))
    return eps, moves


def nfa_accepts(nfa: Nfa, word: Sequence[str]) -> bool:
    """Direct epsilon-closure simulation of the NFA."""
    eps, moves = _split_moves(nfa)
    current = _closure([nfa.start], eps)
    for sym in word:
        step = [d for s in current for label, d in moves.get(s, ()) if label == sym]
        current = _closure(step, eps)
        if not current:
            return False
    return nfa.accept in current


@dataclass(frozen=True)
class Dfa:
    """Complete DFA; ``delta[state][i]`` is the target on ``alphabet[i]``."""

    alphabet: tuple[str, ...]
    delta: tuple[tuple[int, ...], ...]
    start: int
    accepting: frozenset[int]

    @property
    def state_count(self) -> int:
        return len(self.delta)

    def accepts(self, word: Sequence[str]) -> bool:
        index = {a: i for i, a in enumerate(self.alphabet)}
        state = self.start
        for sym in word:
            if sym not in index:
                return False
            state = self.delta[state][index[sym]]
        return state in self.accepting

    def serialize(self) -> str:
        lines = [
            f"states={self.state_count} start={self.start}",
            "accepting=" + ",".join(str(s) for s in sorted(self.accepting)),
        ]
        rows = sorted(
            (src, sym, dst)
            for src, row in enumerate(self.delta)
            for sym, dst in zip(self.alphabet, row)
        )
        lines.extend(f"{src} {sym} {dst}" for src, sym, dst in rows)
        return "\n".join(lines) + "\n"


def nfa_to_dfa(nfa: Nfa, alphabet: Iterable[str] | None = None) -> Dfa:
    """Subset construction over reachable epsilon-closed subsets.

    The empty subset doubles as the dead state that makes ``delta`` total.
    """
    eps, moves = _split_moves(nfa)
    if alphabet is None:
        alphabet = {label for _, label, _ in nfa.transitions if label is not None}
    sigma = tuple(sorted(set(alphabet)))
    start = _closure([nfa.start], eps)
    index = {start: 0}
    subsets = [start]
    delta: list[list[int]] = []
    i = 0
    while i < len(subsets):
        current = subsets[i]
        row = []
        for sym in sigma:
            target = _closure(
                (d for s in current for label, d in moves.get(s, ()) if label == sym), eps
            )
            if target not in index:
                index[target] = len(subsets)
                subsets.append(target)
            row.append(index[target])
        delta.append(row)
        i += 1
    accepting = frozenset(i for i, sub in enumerate(subsets) if nfa.accept in sub)
    return Dfa(sigma, tuple(tuple(r) for r in delta), 0, accepting)


def _reachable(d: Dfa) -> list[int]:
    """States reachable from the start, in BFS order following alphabet order."""
    order = [d.start]
    seen = {d.start}
    queue = deque(order)
    while queue:
        s = queue.popleft()
        for t in d.delta[s]:
            if t not in seen:
                seen.add(t)
                order.append(t)
                queue.append(t)
    return order


def minimize(d: Dfa) -> Dfa:
    """Hopcroft partition refinement, renumbered by BFS from the start state."""
    states = _reachable(d)
    live = set(states)
    k = len(d.alphabet)
    inverse: list[dict[int, list[int]]] = [dict() for _ in range(k)]
    for s in states:
        for a, t in enumerate(d.delta[s]):
            inverse[a].setdefault(t, []).append(s)

    acc = frozenset(s for s in states if s in d.accepting)
    rej = frozenset(live - acc)
    partition = [b for b in (acc, rej) if b]
    worklist = [min(partition, key=len)] if len(partition) == 2 else []

    while worklist:
        splitter = worklist.pop()
        for a in range(k):
            pre = {p for t in splitter for p in inverse[a].get(t, ())}
            if not pre:
                continue
            refined = []
            for block in partition:
                inside = block & pre
                if inside and len(inside) < len(block):
                    outside = block - inside
                    refined.extend((inside, outside))
                    if block in worklist:
                        worklist.remove(block)
                        worklist.extend((inside, outside))
                    else:
                        worklist.append(min(inside, outside, key=len))
                else:
                    refined.append(block)
            partition = refined

    block_of = {s: i for i, block in enumerate(partition) for s in block}
    # BFS numbering over the quotient automaton
    number = {block_of[d.start]: 0}
    queue = deque([d.start])
    reps = [d.start]
    while queue:
        s = queue.popleft()
        for t in d.delta[s]:
            b = block_of[t]
            if b not in number:
                number[b] = len(number)
                reps.append(t)
                queue.append(t)
    delta = tuple(tuple(number[block_of[t]] for t in d.delta[r]) for r in reps)
    accepting = frozenset(number[block_of[r]] for r in reps if r in d.accepting)
    return Dfa(d.alphabet, delta, 0, accepting)


def compile_protocol(ast: ProtocolAst, alphabet: Iterable[str] | None = None) -> Dfa:
    """Minimal complete DFA for ``ast`` over ``alphabet`` (default: its own symbols)."""
    if alphabet is None:
        alphabet = symbols(ast)
    return minimize(nfa_to_dfa(to_nfa(ast), alphabet))


def equivalent(a: ProtocolAst, b: ProtocolAst) -> bool:
    sigma = symbols(a) | symbols(b)
    return compile_protocol(a, sigma).serialize() == compile_protocol(b, sigma).serialize()
