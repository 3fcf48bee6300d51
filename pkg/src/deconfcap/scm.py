"""Exact discrete structural causal models.

Brute-force substrate for the causal estimators: joint tables by explicit
factor products, conditionals by slicing, interventions by truncated
factorization, and seeded ancestral sampling.  Enumeration is capped at
10**6 assignments; the point of this module is to be an oracle, not to scale.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .graphs import CausalDag, GraphError
from .rng import categorical, derive_rng

MAX_ENUMERATION = 10**6
ROW_SUM_TOL = 1e-9


class ScmValidationError(ValueError):
    """Inconsistent SCM: bad CPD rows, parent mismatch, or size cap exceeded."""


class ZeroProbabilityError(ValueError):
    """Conditioning on (or adjusting within) an event of probability zero."""


@dataclass(frozen=True)
class Variable:
    name: str
    cardinality: int

    def __post_init__(self) -> None:
        if self.cardinality < 1:
            raise ScmValidationError(f"{self.name}: cardinality must be >= 1")


@dataclass(frozen=True)
class Cpd:
    """P(child | parents) as a row-stochastic table.

    Rows are indexed row-major over parent assignments in the order given by
    ``parents``; columns index child states.
    """

    child: str
    parents: tuple[str, ...]
    table: np.ndarray

    def __post_init__(self) -> None:
        table = np.asarray(self.table, dtype=np.float64)
        object.__setattr__(self, "table", table)
        if table.ndim != 2:
            raise ScmValidationError(f"{self.child}: CPD table must be 2-D")
        if np.any(table < 0) or np.any(table > 1):
            raise ScmValidationError(f"{self.child}: probabilities outside [0, 1]")
        if np.max(np.abs(table.sum(axis=1) - 1.0)) > ROW_SUM_TOL:
            raise ScmValidationError(f"{self.child}: CPD rows must sum to 1")

    @staticmethod
    def point_mass(child: str, cardinality: int, value: int) -> "Cpd":
        table = np.zeros((1, cardinality))
        table[0, value] = 1.0
        return Cpd(child, (), table)


@dataclass(frozen=True)
class DiscreteDistribution:
    """Distribution of one variable over its states."""

    variable: str
    probs: np.ndarray

    def __post_init__(self) -> None:
        probs = np.asarray(self.probs, dtype=np.float64)
        object.__setattr__(self, "probs", probs)
        if np.any(probs < -1e-15) or abs(probs.sum() - 1.0) > ROW_SUM_TOL:
            raise ScmValidationError(f"{self.variable}: not a distribution")

    def total_variation(self, other: "DiscreteDistribution") -> float:
        return 0.5 * float(np.abs(self.probs - other.probs).sum())


@dataclass(frozen=True)
class Scm:
    """Discrete SCM: variables, one CPD each, the DAG, and a hidden-flag set."""

    variables: tuple[Variable, ...]
    cpds: Mapping[str, Cpd]
    dag: CausalDag
    hidden: frozenset[str] = frozenset()

    def __post_init__(self) -> None:
        names = [v.name for v in self.variables]
        if len(set(names)) != len(names):
            raise ScmValidationError("variable names must be unique")
        if set(names) != set(self.dag.nodes):
            raise ScmValidationError("dag nodes and variables disagree")
        if set(self.cpds) != set(names):
            raise ScmValidationError("exactly one CPD per variable required")
        if not self.hidden <= set(names):
            raise ScmValidationError("hidden set references unknown variables")
        cards = self.cards()
        for name in names:
            cpd = self.cpds[name]
            if tuple(sorted(cpd.parents)) != tuple(self.dag.parents(name)):
                raise ScmValidationError(f"{name}: CPD parents differ from dag parents")
            n_rows = int(np.prod([cards[p] for p in cpd.parents], dtype=np.int64)) if cpd.parents else 1
            if cpd.table.shape != (n_rows, cards[name]):
                raise ScmValidationError(
                    f"{name}: CPD shape {cpd.table.shape} != ({n_rows}, {cards[name]})"
                )

    @staticmethod
    def create(
        variables: Iterable[tuple[str, int]],
        cpds: Iterable[Cpd],
        hidden: Iterable[str] = (),
    ) -> "Scm":
        variables = tuple(Variable(n, c) for n, c in variables)
        cpd_map = {c.child: c for c in cpds}
        edges = [(p, c.child) for c in cpd_map.values() for p in c.parents]
        dag = CausalDag.create([v.name for v in variables], edges)
        return Scm(variables, cpd_map, dag, frozenset(hidden))

    def cards(self) -> dict[str, int]:
        return {v.name: v.cardinality for v in self.variables}

    def observables(self) -> tuple[str, ...]:
        return tuple(n for n in self.dag.nodes if n not in self.hidden)

    def assignment_space(self) -> int:
        return int(np.prod([v.cardinality for v in self.variables], dtype=np.int64))


@dataclass(frozen=True)
class JointTable:
    """Exact joint over an ordered variable tuple.

    ``array`` carries one axis per variable; ``flat`` is the row-major view
    the spec's file format talks about.
    """

    variables: tuple[str, ...]
    array: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.array, dtype=np.float64)
        object.__setattr__(self, "array", arr)
        if arr.ndim != len(self.variables):
            raise ScmValidationError("joint rank must match variable count")
        if abs(arr.sum() - 1.0) > ROW_SUM_TOL or np.any(arr < -1e-15):
            raise ScmValidationError("joint table must be a distribution")

    @property
    def flat(self) -> np.ndarray:
        return self.array.reshape(-1)

    def _axis(self, name: str) -> int:
        try:
            return self.variables.index(name)
        except ValueError as exc:
            raise KeyError(f"unknown variable {name!r}") from exc

    def marginal(self, keep: Iterable[str]) -> "JointTable":
        keep = tuple(keep)
        drop = tuple(i for i, v in enumerate(self.variables) if v not in keep)
        arr = self.array.sum(axis=drop) if drop else self.array
        remaining = tuple(v for v in self.variables if v in keep)
        arr = np.moveaxis(arr, [remaining.index(k) for k in keep], range(len(keep)))
        return JointTable(keep, arr)

    def prob(self, assignment: Mapping[str, int]) -> float:
        idx = tuple(assignment[v] for v in self.variables)
        if len(assignment) != len(self.variables):
            raise KeyError("full assignment required")
        return float(self.array[idx])


def joint_distribution(scm: Scm) -> JointTable:
    """Product of all CPD factors over the full assignment space."""
    if scm.assignment_space() > MAX_ENUMERATION:
        raise ScmValidationError(
            f"assignment space {scm.assignment_space()} exceeds cap {MAX_ENUMERATION}"
        )
    order = tuple(v.name for v in scm.variables)
    cards = scm.cards()
    pos = {name: i for i, name in enumerate(order)}
    arr = np.ones([cards[n] for n in order])
    for name in order:
        cpd = scm.cpds[name]
        factor_vars = cpd.parents + (name,)
        factor = cpd.table.reshape([cards[v] for v in factor_vars])
        # transpose factor axes into joint order, then pad with size-1 axes
        axis_order = np.argsort([pos[v] for v in factor_vars])
        factor = factor.transpose(axis_order)
        shape = [1] * len(order)
        for v in factor_vars:
            shape[pos[v]] = cards[v]
        arr = arr * factor.reshape(shape)
    return JointTable(order, arr)


def conditional(
    joint: JointTable, target: str, given: Mapping[str, int] | None = None
) -> DiscreteDistribution:
    """Normalized slice P(target | given) of an exact joint."""
    given = dict(given or {})
    if target in given:
        raise ScmValidationError("target cannot appear in the evidence")
    sub = joint.marginal((target,) + tuple(given))
    arr = sub.array
    for i, name in enumerate(tuple(given), start=1):
        arr = np.take(arr, given[name], axis=1)  # axis 1 shifts left after each take
    mass = arr.sum()
    if mass <= 0.0:
        raise ZeroProbabilityError(f"evidence {given} has probability zero")
    return DiscreteDistribution(target, arr / mass)


def intervene(scm: Scm, var: str, value: int) -> Scm:
    """Truncated factorization: cut edges into ``var``, pin it to ``value``."""
    cards = scm.cards()
    if var not in cards:
        raise ScmValidationError(f"unknown variable {var!r}")
    if not 0 <= value < cards[var]:
        raise ScmValidationError(f"{var}: state {value} out of range")
    cpds = dict(scm.cpds)
    cpds[var] = Cpd.point_mass(var, cards[var], value)
    return Scm(scm.variables, cpds, scm.dag.without_edges_into(var), scm.hidden)


def do_distribution(scm: Scm, target: str, do_var: str, do_value: int) -> DiscreteDistribution:
    """Ground-truth interventional marginal, using all CPDs (hidden included)."""
    cut = intervene(scm, do_var, do_value)
    marg = joint_distribution(cut).marginal((target,))
    return DiscreteDistribution(target, marg.array)


def sample(scm: Scm, seed: int, n: int) -> np.ndarray:
    """Ancestral sampling; returns an (n, #vars) array in declaration order."""
    if n < 0:
        raise ScmValidationError("sample count must be nonnegative")
    order = tuple(v.name for v in scm.variables)
    col = {name: i for i, name in enumerate(order)}
    cards = scm.cards()
    rng = derive_rng(seed, "scm-sample")
    out = np.zeros((n, len(order)), dtype=np.int64)
    for name in scm.dag.topological_order():
        cpd = scm.cpds[name]
        if n == 0:
            continue
        if not cpd.parents:
            out[:, col[name]] = categorical(rng, cpd.table[0], n)
            continue
        rows = np.zeros(n, dtype=np.int64)
        for p in cpd.parents:
            rows = rows * cards[p] + out[:, col[p]]
        cum = np.cumsum(cpd.table, axis=1)
        u = rng.random(n)
        states = (cum[rows] <= u[:, None]).sum(axis=1)
        out[:, col[name]] = np.minimum(states, cards[name] - 1)
    return out


def _canonical_nested_table(cpd: Cpd, cards: Mapping[str, int]) -> list:
    """CPD table nested over sorted parent names (the file-format convention)."""
    nested = cpd.table.reshape([cards[p] for p in cpd.parents] + [cards[cpd.child]])
    order = sorted(range(len(cpd.parents)), key=lambda i: cpd.parents[i])
    nested = nested.transpose(order + [len(cpd.parents)])
    return nested.tolist()


def scm_to_json(scm: Scm) -> str:
    """Serialize per the SCM file schema (decimal probability literals)."""
    cards = scm.cards()
    payload = {
        "variables": [{"name": v.name, "cardinality": v.cardinality} for v in scm.variables],
        "edges": sorted([p, c] for p, c in scm.dag.edges),
        "cpds": {name: _canonical_nested_table(cpd, cards) for name, cpd in scm.cpds.items()},
        "hidden": sorted(scm.hidden),
    }
    return json.dumps(payload, indent=2, sort_keys=True)


def scm_from_json(text: str) -> Scm:
    payload = json.loads(text)
    variables = [(v["name"], int(v["cardinality"])) for v in payload["variables"]]
    cards = dict(variables)
    parents_of: dict[str, list[str]] = {name: [] for name, _ in variables}
    for p, c in payload["edges"]:
        parents_of[c].append(p)
    cpds = []
    for name, _ in variables:
        parents = tuple(sorted(parents_of[name]))
        table = np.asarray(payload["cpds"][name], dtype=np.float64)
        n_rows = int(np.prod([cards[p] for p in parents], dtype=np.int64)) if parents else 1
        cpds.append(Cpd(name, parents, table.reshape(n_rows, cards[name])))
    return Scm.create(variables, cpds, payload.get("hidden", ()))


def load_scm(path: str | Path) -> Scm:
    return scm_from_json(Path(path).read_text())


def save_scm(scm: Scm, path: str | Path) -> None:
    Path(path).write_text(scm_to_json(scm))
