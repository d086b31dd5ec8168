"""Counter strategies: environments that defeat every system."""

from hypersynth.counterex import closed_loop, find_counterexample
from hypersynth.formula import AlphabetSpec, parse_hyperltl
from hypersynth.tsys import constant_system, to_dot

io = AlphabetSpec({"i"}, {"o"})

phi1 = parse_hyperltl("forall p. forall q. F (i[p] <-> i[q])")
cs = find_counterexample(phi1, 2, 2, io)
print("phi1: k =", cs.k, "strategy states =", cs.system.size)
for w in closed_loop(cs, constant_system(["i"], ["o"])):
    print("  ", w)

predict = parse_hyperltl("forall pi. F (i[pi] <-> o[pi])")
cs = find_counterexample(predict, 1, 2, io)
print("F(i <-> o): the environment answers each output with its negation")
print(to_dot(cs.system, "inverter"))
