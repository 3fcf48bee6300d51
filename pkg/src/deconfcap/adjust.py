"""Backdoor, front-door, and two-confounder (mediated) adjustment estimators.

Each estimator consumes only observational factors, read from the exact
joint over observable variables, and validates the graphical preconditions
that make its formula an identification of P(y | do(x)).  Soundness against
the truncated-factorization oracle is the contract tested throughout.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .graphs import CausalDag, backdoor_paths, d_separated, is_blocked
from .scm import (
    DiscreteDistribution,
    JointTable,
    Scm,
    ZeroProbabilityError,
    joint_distribution,
)


class InvalidAdjustmentError(ValueError):
    """The requested estimator's graphical preconditions do not hold."""


@dataclass(frozen=True)
class AdjustmentResult:
    distribution: DiscreteDistribution
    estimator: str  # "backdoor" | "frontdoor" | "dic"
    x_value: int
    inputs_used: tuple[str, ...]


def observable_joint(scm: Scm) -> JointTable:
    """Exact joint marginalized onto the observable variables."""
    return joint_distribution(scm).marginal(scm.observables())


def _pruned_dag(scm: Scm) -> CausalDag:
    """Graph with cardinality-1 variables removed.

    A one-state variable is a constant: it carries no dependence, so it can
    never open or transmit along a path.  Structural checks run on this
    reduced graph so degenerate confounders do not trip them.
    """
    dag = scm.dag
    for v in scm.variables:
        if v.cardinality == 1:
            dag = dag.without_node(v.name)
    return dag


def _states(joint: JointTable, name: str) -> range:
    return range(joint.array.shape[joint.variables.index(name)])


def _cond_probs(joint: JointTable, target: str, given: dict[str, int]) -> np.ndarray:
    """P(target | given) from the joint; ZeroProbabilityError on null evidence."""
    sub = joint.marginal((target,) + tuple(given))
    arr = sub.array
    for name in given:
        arr = np.take(arr, given[name], axis=1)
    mass = arr.sum()
    if mass <= 0.0:
        raise ZeroProbabilityError(
            f"stratum {given} intersects the data with probability zero"
        )
    return arr / mass


def _marg_probs(joint: JointTable, names: tuple[str, ...]) -> np.ndarray:
    return joint.marginal(names).array


def _check_observable(scm: Scm, names: tuple[str, ...], estimator: str) -> None:
    hidden = [n for n in names if n in scm.hidden]
    if hidden:
        raise InvalidAdjustmentError(f"{estimator}: variables {hidden} are hidden")


def backdoor_adjust(
    scm: Scm, x: str, y: str, adjust_set: frozenset[str], x_value: int
) -> AdjustmentResult:
    """Sum_d P(y | x, d) P(d) over the adjustment set's assignment space.

    Requires the set to be observable, to block every backdoor path from x
    to y, and to contain no descendant of x (without the descendant rule the
    sum can condition away part of the causal path and lose soundness).
    """
    adjust_set = frozenset(adjust_set)
    _check_observable(scm, (x, y) + tuple(adjust_set), "backdoor")
    dag = _pruned_dag(scm)
    if x in dag.nodes and y in dag.nodes:
        banned = dag.descendants(x) | {x, y}
        if adjust_set & banned & set(dag.nodes):
            raise InvalidAdjustmentError(
                f"backdoor: adjustment set {sorted(adjust_set)} touches x, y, or descendants of {x}"
            )
        pruned_set = adjust_set & set(dag.nodes)
        for path in backdoor_paths(dag, x, y, pruned_set):
            if not path.blocked:
                raise InvalidAdjustmentError(
                    f"backdoor: path {' -> '.join(path.nodes)} stays open given {sorted(adjust_set)}"
                )

    joint = observable_joint(scm)
    members = tuple(sorted(adjust_set))
    cards = [len(_states(joint, m)) for m in members]
    weights = _marg_probs(joint, members) if members else np.ones(())
    total = np.zeros(len(_states(joint, y)))
    for assign in itertools.product(*[range(c) for c in cards]):
        w = float(weights[assign]) if members else 1.0
        if w == 0.0:
            continue  # measure-zero stratum contributes nothing
        given = {x: x_value, **dict(zip(members, assign))}
        total += w * _cond_probs(joint, y, given)
    inputs = (f"P({y}|{x},{','.join(members)})" if members else f"P({y}|{x})",) + (
        (f"P({','.join(members)})",) if members else ()
    )
    return AdjustmentResult(DiscreteDistribution(y, total), "backdoor", x_value, inputs)


def _check_frontdoor_structure(dag: CausalDag, x: str, y: str, mediator: str) -> None:
    if mediator not in dag.nodes or x not in dag.nodes or y not in dag.nodes:
        return  # a degenerate (constant) endpoint transmits nothing
    for path in backdoor_paths(dag, x, mediator):
        if not path.blocked:
            raise InvalidAdjustmentError(
                f"frontdoor: backdoor path {' -> '.join(path.nodes)} from {x} to "
                f"{mediator} is open (e.g. the mediator has a hidden parent)"
            )
    for path in backdoor_paths(dag, mediator, y, frozenset({x})):
        if not path.blocked:
            raise InvalidAdjustmentError(
                f"frontdoor: {{{x}}} does not block {' -> '.join(path.nodes)}"
            )
    if mediator in dag.descendants(y):
        raise InvalidAdjustmentError("frontdoor: mediator descends from the outcome")


def frontdoor_adjust(scm: Scm, x: str, y: str, mediator: str, x_value: int) -> AdjustmentResult:
    """Sum_z P(z|x) Sum_x' P(y|z,x') P(x'): two chained partial effects."""
    _check_observable(scm, (x, y, mediator), "frontdoor")
    _check_frontdoor_structure(_pruned_dag(scm), x, y, mediator)

    joint = observable_joint(scm)
    p_x = _marg_probs(joint, (x,))
    p_z_given_x = _cond_probs(joint, mediator, {x: x_value})
    total = np.zeros(len(_states(joint, y)))
    for z_val in _states(joint, mediator):
        if p_z_given_x[z_val] == 0.0:
            continue
        inner = np.zeros_like(total)
        for x_prime in _states(joint, x):
            if p_x[x_prime] == 0.0:
                continue
            inner += p_x[x_prime] * _cond_probs(joint, y, {mediator: z_val, x: x_prime})
        total += p_z_given_x[z_val] * inner
    inputs = (f"P({mediator}|{x})", f"P({y}|{mediator},{x})", f"P({x})")
    return AdjustmentResult(DiscreteDistribution(y, total), "frontdoor", x_value, inputs)


def _check_dic_structure(dag: CausalDag, i: str, l: str, z: str, s: str) -> None:
    if s in dag.nodes and i in dag.nodes and not d_separated(dag, s, i):
        raise InvalidAdjustmentError(
            f"dic: {s} and {i} are dependent (e.g. an edge {s} -> {i}); "
            "the factored prior P(s)P(x) is invalid"
        )
    if z not in dag.nodes or i not in dag.nodes or l not in dag.nodes:
        return
    for path in backdoor_paths(dag, i, z):
        if not path.blocked:
            raise InvalidAdjustmentError(
                f"dic: backdoor path {' -> '.join(path.nodes)} from {i} to {z} is open"
            )
    cond = frozenset(n for n in (i, s) if n in dag.nodes)
    if cond & dag.descendants(z):
        raise InvalidAdjustmentError("dic: conditioning variables descend from the mediator")
    for path in backdoor_paths(dag, z, l, cond):
        if not path.blocked:
            raise InvalidAdjustmentError(
                f"dic: {sorted(cond)} does not block {' -> '.join(path.nodes)}"
            )


def dic_adjust(scm: Scm, i: str, l: str, z: str, s: str, i_value: int) -> AdjustmentResult:
    """Sum_s P(s) Sum_x P(x) Sum_z P(z|i) P(l|s,x,z).

    Front-door chaining through the mediator z with the extra observed
    confounder s folded into the second partial effect; x ranges over the
    treatment variable's own states.
    """
    _check_observable(scm, (i, l, z, s), "dic")
    _check_dic_structure(_pruned_dag(scm), i, l, z, s)

    joint = observable_joint(scm)
    p_s = _marg_probs(joint, (s,))
    p_x = _marg_probs(joint, (i,))
    p_z_given_i = _cond_probs(joint, z, {i: i_value})
    total = np.zeros(len(_states(joint, l)))
    for s_val in _states(joint, s):
        if p_s[s_val] == 0.0:
            continue
        for x_val in _states(joint, i):
            if p_x[x_val] == 0.0:
                continue
            w_sx = p_s[s_val] * p_x[x_val]
            for z_val in _states(joint, z):
                if p_z_given_i[z_val] == 0.0:
                    continue
                probs = _cond_probs(joint, l, {s: s_val, i: x_val, z: z_val})
                total += w_sx * p_z_given_i[z_val] * probs
    inputs = (f"P({s})", f"P({i})", f"P({z}|{i})", f"P({l}|{s},{i},{z})")
    return AdjustmentResult(DiscreteDistribution(l, total), "dic", i_value, inputs)
