"""Synthesize the secret-decision system twice: from the LTL part alone and with the hyperproperty."""

from hypersynth.cli import load_spec
from hypersynth.synth import synthesize
from hypersynth.tsys import model_check, to_dot

ltl_only = load_spec("secret-decision-ltl")
full = load_spec("secret-decision")
privacy = full.hyper_formula()

r = synthesize(ltl_only, 8)
print("LTL only:", r.verdict, "with", r.system.size, "states")
v = model_check(r.system, privacy)
print("privacy holds:", v.holds)
for var, w in zip(v.variables, v.witnesses):
    print(f"  {var}: {w}")

r = synthesize(full, 8)
print("with privacy:", r.verdict, "with", r.system.size, "states")
print("privacy holds:", model_check(r.system, privacy).holds)
print(to_dot(r.system, "secret_decision"))
