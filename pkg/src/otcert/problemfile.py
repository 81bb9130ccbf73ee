"""Problem-file serialization: a JSON tree describing one transport instance.

The file pins the number mode for the whole instance.  In rational mode every
number is a string like ``"3/4"``; in float mode numbers are JSON floats.
``"inf"`` is the only spelling of +infinity (cost entries), ``"-inf"`` is
allowed in potential vectors only, and NaN is rejected outright.  Parsing
then serializing then parsing again is the identity on the parsed structure.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .core import CostTensor, Coupling, Measure, Space, SupportSet
from .errors import InputError
from .numbers import (
    RATIONAL,
    as_number,
    check_mode,
    format_number,
    is_neg_inf,
    is_pos_inf,
)


def _rule_quadratic(x, y):
    d = x - y
    return d * d / 2


def _rule_absolute(x, y):
    return abs(x - y)


NAMED_RULES = {
    "quadratic": _rule_quadratic,
    "absolute": _rule_absolute,
}


@dataclass
class ProblemFile:
    """One instance: spaces, optional measures, cost, plans, support, potentials."""

    mode: str
    spaces: list
    measures: Optional[list] = None
    cost: Optional[CostTensor] = None
    plan: Optional[Coupling] = None
    plans: dict = field(default_factory=dict)
    support: Optional[SupportSet] = None
    potentials: Optional[list] = None
    metadata: dict = field(default_factory=dict)

    def resolve_support(self) -> SupportSet:
        """Explicit support if present, else the plan's support."""
        if self.support is not None:
            return self.support
        if self.plan is not None:
            return self.plan.support()
        raise InputError("the problem file carries neither a support set nor a plan")


def _num_out(v, mode):
    if mode == RATIONAL:
        return format_number(v)
    if is_pos_inf(v):
        return "inf"
    if is_neg_inf(v):
        return "-inf"
    return float(v)


def _num_in(v, mode, allow_inf=False, allow_neg_inf=False):
    x = as_number(v, mode)
    if is_pos_inf(x) and not allow_inf:
        raise InputError("'inf' is not allowed in this field")
    if is_neg_inf(x) and not allow_neg_inf:
        raise InputError("'-inf' is not allowed in this field")
    return x


def _label_type(labels) -> str:
    kinds = {type(l) for l in labels}
    if kinds <= {int}:
        return "int"
    if kinds <= {str}:
        return "str"
    if kinds <= {Fraction, int}:
        return "rational"
    if kinds <= {float, int}:
        return "float"
    raise InputError(f"unsupported label types {kinds}")


def _labels_out(space: Space):
    t = _label_type(space.labels)
    if t == "rational":
        return t, [str(Fraction(l)) for l in space.labels]
    return t, list(space.labels)


def _labels_in(kind, raw):
    if kind == "int":
        return [int(l) for l in raw]
    if kind == "str":
        return [str(l) for l in raw]
    if kind == "rational":
        return [Fraction(l) for l in raw]
    if kind == "float":
        return [float(l) for l in raw]
    raise InputError(f"unknown label_type {kind!r}")


def _nested_out(entries, shape, mode):
    if len(shape) == 1:
        return [_num_out(v, mode) for v in entries]
    return [_nested_out(sub, shape[1:], mode) for sub in entries]


def _cost_out(c: CostTensor, mode):
    if c._rule is not None:
        if c.rule_name not in NAMED_RULES:
            raise InputError("only named rules can be serialized; materialize custom rules")
        return {"kind": "rule", "name": c.rule_name}
    nested = _to_nested(c)
    return {"kind": "dense", "entries": _nested_out(nested, c.shape, mode)}


def _to_nested(c: CostTensor):
    def build(prefix):
        a = len(prefix)
        if a == c.n_marginals:
            return c.raw_value(tuple(prefix))
        return [build(prefix + [i]) for i in range(c.shape[a])]

    return build([])


def _cost_in(obj, spaces, mode) -> CostTensor:
    kind = obj.get("kind")
    if kind == "rule":
        name = obj.get("name")
        if name not in NAMED_RULES:
            raise InputError(f"unknown cost rule {name!r}")
        return CostTensor.from_rule(spaces, NAMED_RULES[name], mode, name=name)
    if kind == "dense":
        def parse(entries, depth):
            if depth == len(spaces) - 1:
                return [_num_in(v, mode, allow_inf=True) for v in entries]
            return [parse(sub, depth + 1) for sub in entries]

        return CostTensor.dense(spaces, parse(obj["entries"], 0), mode)
    raise InputError(f"unknown cost kind {kind!r}")


def _atoms_out(g: Coupling, mode):
    return [
        {"idx": list(idx), "weight": _num_out(w, mode)} for idx, w in g.sorted_atoms()
    ]


def _atoms_in(raw, spaces, mode) -> Coupling:
    atoms = {}
    for entry in raw:
        idx = tuple(entry["idx"])
        atoms[idx] = _num_in(entry["weight"], mode)
    return Coupling(spaces, atoms, mode)


def to_dict(pf: ProblemFile) -> dict:
    mode = pf.mode
    out = {"mode": mode, "spaces": []}
    for s in pf.spaces:
        kind, labels = _labels_out(s)
        entry = {"label_type": kind, "labels": labels}
        if s.name:
            entry["name"] = s.name
        out["spaces"].append(entry)
    if pf.measures is not None:
        out["measures"] = [[_num_out(w, mode) for w in m.weights] for m in pf.measures]
    if pf.cost is not None:
        out["cost"] = _cost_out(pf.cost, mode)
    if pf.plan is not None:
        out["plan"] = _atoms_out(pf.plan, mode)
    if pf.plans:
        out["plans"] = {name: _atoms_out(g, mode) for name, g in sorted(pf.plans.items())}
    if pf.support is not None:
        out["support"] = [list(t) for t in pf.support.sorted_tuples()]
    if pf.potentials is not None:
        out["potentials"] = [[_num_out(v, mode) for v in vec] for vec in pf.potentials]
    if pf.metadata:
        out["metadata"] = pf.metadata
    return out


def from_dict(obj: dict) -> ProblemFile:
    if not isinstance(obj, dict) or "spaces" not in obj:
        raise InputError("a problem file needs at least a 'spaces' block")
    mode = check_mode(obj.get("mode", RATIONAL))
    spaces = []
    for entry in obj["spaces"]:
        labels = _labels_in(entry["label_type"], entry["labels"])
        spaces.append(Space(labels, name=entry.get("name", "")))
    pf = ProblemFile(mode=mode, spaces=spaces)
    if "measures" in obj:
        ms = obj["measures"]
        if len(ms) != len(spaces):
            raise InputError("one measure per space is required")
        pf.measures = [
            Measure(s, tuple(_num_in(w, mode) for w in weights), mode)
            for s, weights in zip(spaces, ms)
        ]
    if "cost" in obj:
        pf.cost = _cost_in(obj["cost"], spaces, mode)
    if "plan" in obj:
        pf.plan = _atoms_in(obj["plan"], spaces, mode)
    if "plans" in obj:
        pf.plans = {name: _atoms_in(raw, spaces, mode) for name, raw in obj["plans"].items()}
    if "support" in obj:
        pf.support = SupportSet(spaces, [tuple(t) for t in obj["support"]])
    if "potentials" in obj:
        vecs = obj["potentials"]
        pf.potentials = [
            tuple(_num_in(v, mode, allow_neg_inf=True) for v in vec) for vec in vecs
        ]
    pf.metadata = dict(obj.get("metadata", {}))
    return pf


def _reject_nan(token):
    raise InputError(f"non-finite JSON constant {token!r} is forbidden; use the 'inf' token")


def dumps_problem(pf: ProblemFile) -> str:
    return json.dumps(to_dict(pf), indent=2, sort_keys=True, allow_nan=False)


def loads_problem(text: str) -> ProblemFile:
    try:
        obj = json.loads(text, parse_constant=_reject_nan)
    except json.JSONDecodeError as e:
        raise InputError(f"not a valid problem file: {e}") from None
    return from_dict(obj)


def dump_problem(pf: ProblemFile, path: str):
    with open(path, "w") as fh:
        fh.write(dumps_problem(pf) + "\n")


def load_problem(path: str) -> ProblemFile:
    with open(path) as fh:
        return loads_problem(fh.read())


def instance_hash(pf: ProblemFile) -> str:
    canonical = json.dumps(to_dict(pf), sort_keys=True, allow_nan=False)
    return hashlib.sha256(canonical.encode()).hexdigest()[:16]
