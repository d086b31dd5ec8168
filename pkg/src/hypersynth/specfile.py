"""Specification files: an LTL part over one implicit trace plus HyperLTL formulas."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

from .formula import (
    AlphabetSpec, Formula, Quant, Term, conj, conjoin, forall, format_formula, format_term,
    parse_hyperltl, parse_ltl, rename,
)
from .tsys import Semantics

LTL_VAR = "pi"


@dataclass(frozen=True)
class SpecFile:
    inputs: tuple[str, ...]
    outputs: tuple[str, ...]
    semantics: Semantics
    ltl: tuple[Term, ...] = ()
    hyper: tuple[Formula, ...] = ()
    options: Mapping[str, Any] = field(default_factory=dict)
    name: str = "spec"

    def __post_init__(self):
        AlphabetSpec(self.inputs, self.outputs)
        if not self.ltl and not self.hyper:
            raise ValueError("a specification needs at least one formula")

    @property
    def alphabet(self) -> AlphabetSpec:
        return AlphabetSpec(self.inputs, self.outputs)

    @property
    def ltl_body(self) -> Term:
        return conj(self.ltl)

    def ltl_formula(self) -> Formula | None:
        return forall(LTL_VAR, body=self.ltl_body) if self.ltl else None

    def hyper_formula(self) -> Formula | None:
        return conjoin(*self.hyper) if self.hyper else None

    def combined(self) -> Formula:
        """Everything as one prenex formula.

        Universal parts share variables positionally.  Other parts get fresh
        variables; universal blocks go first when some part starts with a
        universal quantifier and last otherwise, which keeps the prefix in
        the smallest class the parts allow.
        """
        parts = [f for f in (self.ltl_formula(),) if f is not None] + list(self.hyper)
        if len(parts) == 1:
            return parts[0]
        universal = [f for f in parts if f.is_universal()]
        other = [f for f in parts if not f.is_universal()]
        if not other:
            return conjoin(*universal)
        blocks = [conjoin(*universal)] if universal else []
        lead = any(f.quantifiers[0] is Quant.FORALL for f in other)
        ordered = blocks + other if lead else other + blocks
        prefix, bodies, used = [], [], set()
        for f in ordered:
            names = {}
            for q, v in f.prefix:
                fresh, n = v, 1
                while fresh in used:
                    n += 1
                    fresh = f"{v}{n}"
                used.add(fresh)
                names[v] = fresh
                prefix.append((q, fresh))
            bodies.append(rename(f.body, names))
        return Formula(tuple(prefix), conj(bodies))

    def option(self, key: str, default=None):
        return self.options.get(key, default)

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "inputs": list(self.inputs),
            "outputs": list(self.outputs),
            "semantics": self.semantics.value,
            "ltl": [format_term(t, implicit_var=LTL_VAR) for t in self.ltl],
            "hyper": [format_formula(f) for f in self.hyper],
            "options": dict(self.options),
        }

    @classmethod
    def from_json(cls, data: Mapping | str, name: str | None = None) -> "SpecFile":
        if isinstance(data, str):
            data = json.loads(data)
        try:
            inputs = tuple(data["inputs"])
            outputs = tuple(data["outputs"])
        except KeyError as e:
            raise ValueError(f"specification is missing {e}") from None
        alphabet = AlphabetSpec(inputs, outputs)
        semantics = Semantics(data.get("semantics", "moore"))
        ltl = tuple(parse_ltl(text, alphabet, var=LTL_VAR) for text in data.get("ltl", ()))
        hyper = tuple(parse_hyperltl(text, alphabet) for text in data.get("hyper", ()))
        return cls(inputs, outputs, semantics, ltl, hyper, dict(data.get("options", {})), name or data.get("name", "spec"))

    @classmethod
    def load(cls, path: str | Path) -> "SpecFile":
        path = Path(path)
        return cls.from_json(path.read_text(), name=None)

    def with_semantics(self, semantics: Semantics) -> "SpecFile":
        return SpecFile(self.inputs, self.outputs, semantics, self.ltl, self.hyper, self.options, self.name)
