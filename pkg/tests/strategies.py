"""Hypothesis strategies shared by the test modules."""

from hypothesis import strategies as st

from hypersynth.formula import FALSE, TRUE, And, Atom, Eventually, Globally, Iff, Implies, Next, Not, Or, Release, Until, WeakUntil


def bodies(variables=("p",), aps=("a", "b"), depth=3):
    """Random quantifier-free bodies over the given atoms, all operators included."""
    leaves = st.builds(Atom, st.sampled_from(aps), st.sampled_from(variables)) | st.sampled_from([TRUE, FALSE])
    unary = (Not, Next, Eventually, Globally)
    binary = (And, Or, Implies, Iff, Until, Release, WeakUntil)

    def extend(children):
        return st.one_of(
            st.builds(lambda k, x: k(x), st.sampled_from(unary), children),
            st.builds(lambda k, x, y: k(x, y), st.sampled_from(binary), children, children),
        )

    return st.recursive(leaves, extend, max_leaves=2 ** depth)
