"""Structural and spectral analysis of a fixed transition matrix.

Covers SCC decomposition, recurrent/transient classification, stationary
and limiting distributions, the fundamental matrix and the Drazin inverse,
plus the closed-form gain/bias they induce.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

EDGE_THRESHOLD = 1e-15  # entries below this are float dust, not edges
CLOSURE_TOL = 1e-12


class ChainStructureError(ValueError):
    """Raised when an operation requires a unichain matrix and P is not one."""


@dataclass(frozen=True)
class ChainStructure:
    """SCC partition of a transition matrix with recurrence classification."""

    sccs: tuple[tuple[int, ...], ...]
    recurrent_classes: tuple[tuple[int, ...], ...]
    transient_states: tuple[int, ...]

    @property
    def is_unichain(self) -> bool:
        return len(self.recurrent_classes) == 1

    @property
    def is_recurrent(self) -> bool:
        return self.is_unichain and not self.transient_states


@dataclass(frozen=True)
class StationaryDistribution:
    phi: np.ndarray

    def __post_init__(self):
        phi = np.ascontiguousarray(self.phi, dtype=float)
        phi.setflags(write=False)
        object.__setattr__(self, "phi", phi)


def strongly_connected_components(
    P: np.ndarray, edge_threshold: float = EDGE_THRESHOLD
) -> list[list[int]]:
    """Kosaraju SCC partition, in reverse topological order of the condensation.

    An edge i -> j exists iff P[i, j] > edge_threshold.  Reverse topological
    order puts sink components (closed classes) first.
    """
    P = np.asarray(P, dtype=float)
    n = P.shape[0]
    if P.shape != (n, n):
        raise ValueError(f"expected a square matrix, got shape {P.shape}")
    succ = [np.flatnonzero(P[i] > edge_threshold).tolist() for i in range(n)]
    pred: list[list[int]] = [[] for _ in range(n)]
    for i, row in enumerate(succ):
        for j in row:
            pred[j].append(i)

    # first pass: order nodes by finish time (iterative DFS)
    order: list[int] = []
    seen = [False] * n
    for start in range(n):
        if seen[start]:
            continue
        stack = [(start, iter(succ[start]))]
        seen[start] = True
        while stack:
            node, it = stack[-1]
            advanced = False
            for nxt in it:
                if not seen[nxt]:
                    seen[nxt] = True
                    stack.append((nxt, iter(succ[nxt])))
                    advanced = True
                    break
            if not advanced:
                order.append(node)
                stack.pop()

    # second pass on the transpose, in decreasing finish time
    comp_of = [-1] * n
    components: list[list[int]] = []
    for root in reversed(order):
        if comp_of[root] != -1:
            continue
        comp = [root]
        comp_of[root] = len(components)
        stack = [root]
        while stack:
            node = stack.pop()
            for nxt in pred[node]:
                if comp_of[nxt] == -1:
                    comp_of[nxt] = len(components)
                    comp.append(nxt)
                    stack.append(nxt)
        components.append(sorted(comp))
    components.reverse()  # Kosaraju emits topological order; we want sinks first
    return components


def classify_chain(P: np.ndarray, edge_threshold: float = EDGE_THRESHOLD) -> ChainStructure:
    """Classify SCCs as recurrent (closed: no mass leaves) or transient."""
    P = np.asarray(P, dtype=float)
    sccs = strongly_connected_components(P, edge_threshold)
    recurrent: list[tuple[int, ...]] = []
    transient: list[int] = []
    for comp in sccs:
        idx = np.asarray(comp)
        outside = np.delete(np.arange(P.shape[0]), idx)
        leak = P[np.ix_(idx, outside)].sum(axis=1).max() if outside.size else 0.0
        if leak < CLOSURE_TOL:
            recurrent.append(tuple(comp))
        else:
            transient.extend(comp)
    return ChainStructure(
        sccs=tuple(tuple(c) for c in sccs),
        recurrent_classes=tuple(recurrent),
        transient_states=tuple(sorted(transient)),
    )


def _require_unichain(P: np.ndarray, what: str) -> ChainStructure:
    structure = classify_chain(P)
    if not structure.is_unichain:
        raise ChainStructureError(
            f"{what} requires a unichain matrix; found "
            f"{len(structure.recurrent_classes)} recurrent classes"
        )
    return structure


def stationary_distribution(P: np.ndarray) -> StationaryDistribution:
    """Solve phi = P^T phi with sum(phi) = 1 by a direct linear solve."""
    P = np.asarray(P, dtype=float)
    _require_unichain(P, "stationary distribution not unique:")
    n = P.shape[0]
    A = P.T - np.eye(n)
    A[-1, :] = 1.0  # replace one balance equation by the normalization
    b = np.zeros(n)
    b[-1] = 1.0
    phi = np.linalg.solve(A, b)
    # transient states may come out as -1e-17 instead of 0
    tiny = (phi < 0) & (phi > -1e-12)
    phi[tiny] = 0.0
    if (phi < 0).any():
        raise ChainStructureError(f"stationary solve produced negative mass: {phi.min()!r}")
    return StationaryDistribution(phi=phi)


def limiting_matrix(P: np.ndarray) -> np.ndarray:
    """Cesaro limit of P^k for a unichain: the rank-1 matrix 1 phi^T."""
    phi = stationary_distribution(P).phi
    return np.outer(np.ones(len(phi)), phi)


def cesaro_limit(P: np.ndarray) -> np.ndarray:
    """Cesaro limiting matrix for a general (possibly multichain) P.

    Rows of recurrent states hold their class's stationary distribution;
    transient rows mix class distributions by absorption probability.
    """
    P = np.asarray(P, dtype=float)
    n = P.shape[0]
    structure = classify_chain(P)
    star = np.zeros((n, n))
    class_phis = []
    for cls in structure.recurrent_classes:
        idx = np.asarray(cls)
        sub = P[np.ix_(idx, idx)]
        sub = sub / sub.sum(axis=1, keepdims=True)  # strip closure dust
        phi_cls = stationary_distribution(sub).phi
        class_phis.append((idx, phi_cls))
        for i in idx:
            star[i, idx] = phi_cls
    trans = np.asarray(structure.transient_states, dtype=int)
    if trans.size:
        Q = P[np.ix_(trans, trans)]
        M = np.linalg.inv(np.eye(trans.size) - Q)
        for idx, phi_cls in class_phis:
            reach = P[np.ix_(trans, idx)].sum(axis=1)
            absorb = M @ reach
            star[np.ix_(trans, idx)] = np.outer(absorb, phi_cls)
    return star


def fundamental_matrix(P: np.ndarray) -> np.ndarray:
    """(I - P + P*)^-1 for a unichain P, with a residual check."""
    P = np.asarray(P, dtype=float)
    star = limiting_matrix(P)
    return _checked_inverse(np.eye(P.shape[0]) - P + star)


def fundamental_matrix_alpha(P: np.ndarray, alpha: float) -> np.ndarray:
    """(I - alpha P + alpha P*)^-1, the discounted deviation resolvent."""
    P = np.asarray(P, dtype=float)
    star = limiting_matrix(P)
    return _checked_inverse(np.eye(P.shape[0]) - alpha * P + alpha * star)


def _checked_inverse(A: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    inv = np.linalg.inv(A)
    residual = np.abs(A @ inv - np.eye(A.shape[0])).max()
    if residual > tol:
        raise ChainStructureError(f"inverse residual {residual:.3g} exceeds {tol:g}")
    return inv


def drazin_inverse(P: np.ndarray) -> np.ndarray:
    """Deviation matrix H = (I - P + P*)^-1 - P*; satisfies H 1 = 0, P* H = 0."""
    P = np.asarray(P, dtype=float)
    return fundamental_matrix(P) - limiting_matrix(P)


def bias_closed_form(P: np.ndarray, C: np.ndarray) -> tuple[float, np.ndarray]:
    """Gain and bias of a unichain policy chain in closed form.

    gain = phi^T C, bias = (I - P + P*)^-1 C - gain * 1; the bias carries
    the phi^T bias = 0 normalization.
    """
    C = np.asarray(C, dtype=float)
    phi = stationary_distribution(P).phi
    gain = float(phi @ C)
    bias = fundamental_matrix(P) @ C - gain
    return gain, bias
