"""
Protocols as minimal automata
=============================

Two protocols accept the same call sequences exactly when their minimal
DFAs coincide after renumbering. Here is how that plays out.
"""

from ctrmatch import compile_protocol, equivalent, parse_protocol, remap_alphabet

a = parse_protocol("(a | b)*")
b = parse_protocol("(a* b*)*")
print(equivalent(a, b))

# Both collapse to a single accepting state looping on every symbol.
print(compile_protocol(a).serialize())

# %%
# ``a?`` and ``a | a a`` differ on the empty word and on ``a a``.
print(equivalent(parse_protocol("a?"), parse_protocol("a | a a")))

# %%
# The DocumentManager protocol, written two ways.
p = parse_protocol("(searchDocument+? setPreference)* | (searchDocument+ viewDocument? setPreference)*")
q = parse_protocol("(searchDocument* setPreference)* | (searchDocument+ viewDocument? setPreference)*")
print(equivalent(p, q), compile_protocol(p).state_count, "states")

# %%
# Renaming the alphabet is how a required protocol is carried over to a
# candidate's method names before comparison.
want = parse_protocol("find+ show")
have = parse_protocol("lookup lookup* display")
print(equivalent(remap_alphabet(want, {"find": "lookup", "show": "display"}), have))
