"""Classify formulas and emit the architecture of a linear one."""

from hypersynth.formula import AlphabetSpec, conj, forall, independence, parse_hyperltl
from hypersynth.fragments import classify, linear_check

alphabet = AlphabetSpec({"a", "b"}, {"c", "d", "e"})
f = parse_hyperltl(
    "forall p. forall q. (!(a[p] <-> a[q])) R (c[p] <-> c[q]) && G (c[p] <-> d[p]) && G (b[p] <-> X e[p])"
)
chain = linear_check(f, alphabet)
print("views:", {o: sorted(chain.view(o)) for o in chain.order})
print(chain.architecture.dumps())

fork = forall("p", "q", body=conj([independence({"a"}, {"c"}, "p", "q"), independence({"b"}, {"d"}, "p", "q")]))
print("fork chain:", linear_check(fork, AlphabetSpec({"a", "b"}, {"c", "d"})))

for text in ["forall p. forall q. G o[p] || G o[q]", "forall p. exists q. G (o[p] <-> !o[q])", "exists p. G o[p]"]:
    print(text, "->", classify(parse_hyperltl(text), AlphabetSpec({"i"}, {"o"})).label)
