"""Independent brute-force references for the search engine.

Everything here works on explicit trees with independent Bernoulli leaf
outcomes and computes posteriors by enumerating outcome assignments of
the unobserved leaves, so it shares no code path with the engine's
incremental recursions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .games.tree_game import Path, TreeModel
from .priors import known_tree_prior

MAX_UNKNOWN_LEAVES = 24


@dataclass
class ObservationSet:
    """Observed leaves with outcomes; the explored shape follows from them."""

    outcomes: dict[Path, int]


def explored_shape(model: TreeModel, obs: dict[Path, int]) -> tuple[set[Path], set[Path]]:
    """(B, D): branch nodes of the observed leaves, and their unexplored
    siblings (the frontier)."""
    branch: set[Path] = {()}
    for leaf in obs:
        for i in range(1, len(leaf) + 1):
            branch.add(leaf[:i])
    frontier: set[Path] = set()
    for node in branch:
        if model.is_leaf(node):
            continue
        for kid in model.children[node]:
            if kid not in branch:
                frontier.add(kid)
    return branch, frontier


def _assignment_table(model: TreeModel, obs: dict[Path, int]):
    """All outcome assignments of the unknown leaves, with probabilities."""
    unknown = [p for p in model.leaves if p not in obs]
    if len(unknown) > MAX_UNKNOWN_LEAVES:
        raise ValueError(f"too many unknown leaves ({len(unknown)} > {MAX_UNKNOWN_LEAVES})")
    count = 1 << len(unknown)
    if unknown:
        ids = np.arange(count, dtype=np.int64)
        bits = ((ids[:, None] >> np.arange(len(unknown))) & 1).astype(np.float64)
        probs = np.array([model.leaf_probs[p] for p in unknown])
        weights = np.prod(np.where(bits > 0.5, probs, 1.0 - probs), axis=1)
    else:
        bits = np.zeros((1, 0))
        weights = np.ones(1)
    columns = {p: bits[:, i] for i, p in enumerate(unknown)}
    for p, k in obs.items():
        columns[p] = np.full(count, float(k))
    return columns, weights


def _minimax_rows(model: TreeModel, columns: dict[Path, np.ndarray], at: Path = ()):
    """Minimax value of ``at`` for every outcome assignment (vectorized)."""

    def value(path: Path) -> np.ndarray:
        if model.is_leaf(path):
            return columns[path]
        kids = [value(k) for k in model.children[path]]
        out = kids[0]
        maximize = len(path) % 2 == 0
        for arr in kids[1:]:
            out = np.maximum(out, arr) if maximize else np.minimum(out, arr)
        return out

    return value(at)


def _wsum(values: np.ndarray) -> float:
    # fsum keeps the small enumerations exact; pairwise summation is
    # plenty for the big ones
    if values.size <= 1 << 16:
        return math.fsum(values.tolist())
    return float(np.sum(values))


def exact_posterior(model: TreeModel, obs: dict[Path, int], at: Path = ()) -> float:
    """P(R(at) = 1 | observed leaf outcomes), by exact enumeration."""
    columns, weights = _assignment_table(model, obs)
    rows = _minimax_rows(model, columns, at=at)
    total = _wsum(weights)
    return _wsum(weights * rows) / total


def node_posteriors(model: TreeModel, obs: dict[Path, int]) -> dict[Path, float]:
    """Posterior mean of the minimax value at every explored node."""
    branch, frontier = explored_shape(model, obs)
    columns, weights = _assignment_table(model, obs)
    total = _wsum(weights)
    out = {}
    for path in sorted(branch | frontier):
        rows = _minimax_rows(model, columns, at=path)
        out[path] = _wsum(weights * rows) / total
    return out


def _playout_leaves(model: TreeModel, z: Path) -> list[tuple[Path, float]]:
    """Leaves below z with the probability a uniform playout reaches them."""
    if model.is_leaf(z):
        return [(z, 1.0)]
    out = []
    kids = model.children[z]
    for kid in kids:
        for leaf, w in _playout_leaves(model, kid):
            out.append((leaf, w / len(kids)))
    return out


@dataclass
class StepReport:
    """Exact one-step quantities for every frontier node."""

    posterior: float
    l2_error: dict[Path, float]  # E[(R_{n+1}^z(root) - R(root))^2 | F_n]
    l1_error: dict[Path, float]
    delta: dict[Path, float]  # E[(R_{n+1}^z(root) - R_n(root))^2 | F_n]
    delta_product: dict[Path, float]  # s(K_z, z) * prod U_n^2 along the branch
    tie_set: set[Path]
    l1_tie_set: set[Path]


def step_optimal_z(model: TreeModel, obs: dict[Path, int], tol: float = 1e-9) -> StepReport:
    """Enumerate the one-step-optimal frontier nodes and cross-check values."""
    _, frontier = explored_shape(model, obs)
    if not frontier:
        raise ValueError("no frontier node to select")
    p_now = exact_posterior(model, obs)
    posteriors = node_posteriors(model, obs)
    priors = known_tree_prior(model)

    l2: dict[Path, float] = {}
    l1: dict[Path, float] = {}
    delta: dict[Path, float] = {}
    dprod: dict[Path, float] = {}
    for z in sorted(frontier):
        err = 0.0
        err1 = 0.0
        dlt = 0.0
        for leaf, w in _playout_leaves(model, z):
            q = model.leaf_probs[leaf]
            for k, pk in ((1, q), (0, 1.0 - q)):
                if pk == 0.0:
                    continue
                post = exact_posterior(model, {**obs, leaf: k})
                err += w * pk * post * (1.0 - post)
                err1 += w * pk * 2.0 * post * (1.0 - post)
                dlt += w * pk * (post - p_now) ** 2
        l2[z] = err
        l1[z] = err1
        delta[z] = dlt
        prod = 1.0
        node = z
        while len(node) > 0:
            parent = node[:-1]
            maximize = len(parent) % 2 == 0
            u = 1.0
            for sib in model.children[parent]:
                if sib != node:
                    u *= (1.0 - posteriors[sib]) if maximize else posteriors[sib]
            prod *= u * u
            node = parent
        dprod[z] = priors[z][1] * prod

    best = min(l2.values())
    best1 = min(l1.values())
    return StepReport(
        posterior=p_now,
        l2_error=l2,
        l1_error=l1,
        delta=delta,
        delta_product=dprod,
        tie_set={z for z, e in l2.items() if e <= best + tol},
        l1_tie_set={z for z, e in l1.items() if e <= best1 + tol},
    )


# ---------------------------------------------------------------------------
# The depth-3 binary counterexample: step-by-step optimal is not globally
# optimal.  Leaves are labelled by paths; the literature's 111..222 digits
# map to path entries minus one.


def _sec6_model() -> TreeModel:
    return TreeModel.from_nested([[[0.5, 0.5], [0.5, 0.5]], [[0.5, 0.5], [0.5, 0.5]]])


_L111, _L112 = (0, 0, 0), (0, 0, 1)
_L121, _L122 = (0, 1, 0), (0, 1, 1)
_L211, _L212 = (1, 0, 0), (1, 0, 1)
_L221, _L222 = (1, 1, 0), (1, 1, 1)


def _greedy_script(outcomes: dict[Path, int]) -> list[Path | None]:
    x1 = _L111
    if outcomes[x1] == 1:
        x2 = _L121
        x3 = None if outcomes[x2] == 1 else _L122
    else:
        x2 = _L112
        x3 = _L121 if outcomes[x2] == 1 else _L211
    return [x1, x2, x3]


def _better3_script(outcomes: dict[Path, int]) -> list[Path | None]:
    x1 = _L111
    if outcomes[x1] == 1:
        x2 = _L121
        x3 = None if outcomes[x2] == 1 else _L122
    else:
        x2 = _L211
        x3 = _L221 if outcomes[x2] == 1 else _L112
    return [x1, x2, x3]


@dataclass
class Sec6Report:
    m_table: list[Fraction]
    s_table: list[Fraction]
    greedy_errors: list[Fraction]
    alternative_errors: list[Fraction]

    def crossover_holds(self) -> bool:
        g, a = self.greedy_errors, self.alternative_errors
        return g[0] == a[0] and a[1] > g[1] and a[2] < g[2]


def sec6_counterexample() -> Sec6Report:
    """Replay both scripted strategies on the depth-3 binary model and
    compute the exact unconditional L2 errors after 1, 2 and 3 playouts.

    All probabilities are dyadic, so double arithmetic is exact; results
    are returned as fractions.
    """
    from .games.random_trees import GWModel
    from .priors import gw_tables

    model = _sec6_model()
    gw = GWModel.create(
        K=3,
        mu=[[(2, 1.0)], [(2, 1.0)], [(2, 1.0)], [(0, 1.0)]],
        q=[None, None, None, 0.5],
        seed=0,
    )
    tables = gw_tables(gw)
    # every quantity in this model is dyadic, so the floats are exact
    m_table = [Fraction(tables.m[k]) for k in range(4)]
    s_table = [Fraction(tables.s[k]) for k in range(4)]

    leaves = model.leaves
    reports = []
    for script in (_greedy_script, _better3_script):
        errors = [Fraction(0)] * 3
        for mask in range(1 << len(leaves)):
            outcomes = {p: (mask >> i) & 1 for i, p in enumerate(leaves)}
            true_root = exact_posterior(model, outcomes)
            visits = script(outcomes)
            obs: dict[Path, int] = {}
            for n, leaf in enumerate(visits):
                if leaf is not None:
                    obs[leaf] = outcomes[leaf]
                post = exact_posterior(model, obs)
                errors[n] += Fraction(post - true_root) ** 2
        reports.append([e / (1 << len(leaves)) for e in errors])

    return Sec6Report(
        m_table=m_table,
        s_table=s_table,
        greedy_errors=reports[0],
        alternative_errors=reports[1],
    )
