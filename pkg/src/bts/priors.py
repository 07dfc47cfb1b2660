"""Prior mean/variance pairs (m, s) for every supported game model.

For a node z on the frontier of the explored tree, m is the conditional
mean of its minimax value given the explored shape, and s the variance of
the posterior mean after one more uniformly random playout from z.  Four
families are provided:

* depth-indexed tables for inhomogeneous Galton-Watson models (``gw``),
* (depth, litter-size)-indexed tables for the order-2 variant (``gw2``),
* the degenerate regular-tree tables (``pearl``),
* the symmetric family, which propagates (m, s) from parent to child with
  one closed-form step and needs no model fitting.

Tables live in plain probability space; engine-facing values are the
pair (phi(m), log s).
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field

import numpy as np

from .game_core import DrawPolicy, Player, Position, binary_value
from .games.tree_game import Path, TreeModel
from .logodds import log_from_phi, phi, phi_pow_root
from .rng import Stream

log = logging.getLogger("bts.priors")


@dataclass(frozen=True)
class NodePrior:
    """Engine-facing prior of one node: phi(m) and log(s)."""

    m_phi: float
    s_log: float


@dataclass(frozen=True)
class SymFamily:
    """Symmetric prior family: root mean ``a`` plus an s-propagation rule.

    b = 0 keeps s constant along every branch (Sym); other b values damp
    each child's s by (parent mean or complement) ** (b * (d - 1)).

    ``pearl_consistent`` replaces the fixed-b rule with the exponent
    -2 (d - 1) / d, the unique choice whose chain reproduces the exact
    regular-tree tables up to a constant factor (and hence, by the scale
    invariance of the search, exactly the same algorithm).  This is the
    SymP engine.
    """

    a: float
    b: float = 0.0
    pearl_consistent: bool = False

    def __post_init__(self):
        if not 0.0 < self.a < 1.0:
            raise ValueError("root mean a must lie in (0, 1)")


def sym_root(fam: SymFamily) -> NodePrior:
    # any positive constant works for the root s; scaling s leaves the
    # search invariant
    return NodePrior(m_phi=phi(fam.a), s_log=0.0)


def sym_child(parent: NodePrior, d: int, parent_turn: Player, fam: SymFamily) -> NodePrior:
    """Prior of each child in a litter of size d under the symmetric family."""
    if d < 1:
        raise ValueError("a litter has at least one child")
    if parent_turn is Player.J0:
        m_phi = phi_pow_root(parent.m_phi, d)
        g_log = log_from_phi(parent.m_phi)
    else:
        m_phi = -phi_pow_root(-parent.m_phi, d)
        g_log = log_from_phi(-parent.m_phi)
    if d == 1:
        s_log = parent.s_log
    elif fam.pearl_consistent:
        s_log = -2.0 * (d - 1) / d * g_log + parent.s_log
    elif fam.b == 0.0:
        s_log = parent.s_log
    else:
        s_log = fam.b * (d - 1) * g_log + parent.s_log
    return NodePrior(m_phi=m_phi, s_log=s_log)


@dataclass
class PriorTables:
    """Tabulated (m, s) by depth, or by (depth, litter size) for gw2."""

    kind: str  # "gw" | "gw2" | "pearl"
    m: dict
    s: dict
    max_depth: int
    _warned: set = field(default_factory=set, repr=False)

    def lookup(self, depth: int, litter: int | None = None) -> tuple[float, float]:
        """(m, s) in probability space; gw2 needs the node's litter size."""
        if self.kind != "gw2":
            if depth not in self.m:
                raise KeyError(f"prior tables have no entry at depth {depth}")
            return self.m[depth], self.s[depth]
        if litter is None:
            raise ValueError("gw2 tables are indexed by (depth, litter size)")
        key = (depth, litter)
        if key not in self.m:
            key = self._nearest(depth, litter)
        return self.m[key], self.s[key]

    def _nearest(self, depth: int, litter: int) -> tuple[int, int]:
        candidates = [d for (k, d) in self.m if k == depth]
        if not candidates:
            raise KeyError(f"prior tables have no entry at depth {depth}")
        best = min(candidates, key=lambda d: (abs(d - litter), d))
        if (depth, litter) not in self._warned:
            self._warned.add((depth, litter))
            log.warning(
                "gw2 tables: unseen litter size %d at depth %d, using nearest %d",
                litter,
                depth,
                best,
            )
        return depth, best

    def to_json(self) -> str:
        if self.kind == "gw2":
            m = {f"{k},{d}": v for (k, d), v in sorted(self.m.items())}
            s = {f"{k},{d}": v for (k, d), v in sorted(self.s.items())}
        else:
            m = [self.m[k] for k in range(self.max_depth + 1)]
            s = [self.s[k] for k in range(self.max_depth + 1)]
        return json.dumps({"kind": self.kind, "m": m, "s": s}, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "PriorTables":
        doc = json.loads(text)
        kind = doc["kind"]
        if kind == "gw2":
            m = {}
            s = {}
            for key, v in doc["m"].items():
                k, d = key.split(",")
                m[(int(k), int(d))] = float(v)
            for key, v in doc["s"].items():
                k, d = key.split(",")
                s[(int(k), int(d))] = float(v)
            max_depth = max(k for k, _ in m)
        else:
            m = {k: float(v) for k, v in enumerate(doc["m"])}
            s = {k: float(v) for k, v in enumerate(doc["s"])}
            max_depth = len(doc["m"]) - 1
        return cls(kind=kind, m=m, s=s, max_depth=max_depth)


def _q_at(q, k: int, mu0: float) -> float:
    """Leaf probability at depth k; only consulted when mu_k(0) > 0."""
    qk = q[k]
    if qk is None:
        if mu0 > 0.0:
            raise ValueError(f"model needs a leaf probability at depth {k}")
        return 0.0
    return qk


def gw_tables(model) -> PriorTables:
    """Backward-induction tables for an inhomogeneous Galton-Watson model."""
    K = model.K
    q = model.q
    m = {K: _q_at(q, K, 1.0)}
    s = {K: m[K] * (1.0 - m[K])}
    for k in range(K - 1, -1, -1):
        law = dict(model.mu[k])
        mu0 = law.get(0, 0.0)
        qk = _q_at(q, k, mu0)
        odd = k % 2 == 1
        mk = mu0 * qk
        for ell, prob in law.items():
            if ell < 1:
                continue
            mk += prob * (m[k + 1] ** ell if odd else 1.0 - (1.0 - m[k + 1]) ** ell)
        m[k] = mk
        base = m[k + 1] if odd else 1.0 - m[k + 1]
        own = m[k] if odd else 1.0 - m[k]
        sk = mu0 * (qk * (1.0 - m[k]) ** 2 + (1.0 - qk) * m[k] ** 2)
        for ell, prob in law.items():
            if ell < 1:
                continue
            sk += prob * (base ** (2 * ell - 2) * s[k + 1] + (base**ell - own) ** 2)
        s[k] = sk
    return PriorTables(kind="gw", m=m, s=s, max_depth=K)


def pearl_tables(d: int, K: int, p: float) -> PriorTables:
    """Tables for the regular degree-d depth-K tree with Bernoulli(p) leaves."""
    if d < 2 or K < 1:
        raise ValueError("need d >= 2 and K >= 1")
    m = {K: p}
    s = {K: p * (1.0 - p)}
    for k in range(K - 1, -1, -1):
        if k % 2 == 1:
            m[k] = m[k + 1] ** d
            s[k] = m[k + 1] ** (2 * d - 2) * s[k + 1]
        else:
            m[k] = 1.0 - (1.0 - m[k + 1]) ** d
            s[k] = (1.0 - m[k + 1]) ** (2 * d - 2) * s[k + 1]
    tables = PriorTables(kind="pearl", m=m, s=s, max_depth=K)
    return tables


def solve_root_mean(d: int, K: int, a: float) -> float:
    """p such that the Pearl root mean equals ``a`` (bisection; monotone)."""
    if not 0.0 < a < 1.0:
        raise ValueError("target root mean must lie in (0, 1)")

    def root_mean(p: float) -> float:
        return pearl_tables(d, K, p).m[0]

    lo, hi = 0.0, 1.0
    if not root_mean(lo) <= a <= root_mean(hi):
        raise ValueError("target does not bracket")  # cannot happen for a in (0,1)
    while True:
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if root_mean(mid) < a:
            lo = mid
        else:
            hi = mid
    return min((lo, hi), key=lambda p: abs(root_mean(p) - a))


@dataclass(frozen=True)
class GW2Model:
    """Order-2 Galton-Watson model: litter laws depend on the parent's
    litter size.  ``mu0`` rules the root; ``mu[(k, d)]`` rules depth-k
    nodes born in a litter of size d."""

    K: int
    mu0: tuple
    mu: dict
    q: tuple

    @classmethod
    def create(cls, K, mu0, mu, q) -> "GW2Model":
        from .games.random_trees import _validate_law

        mu0v = tuple(_validate_law(list(mu0), "mu0"))
        muv = {}
        for (k, d), law in mu.items():
            muv[(int(k), int(d))] = tuple(_validate_law(list(law), f"mu[{k},{d}]"))
        for (k, d), law in muv.items():
            if k == K and dict(law).get(0, 0.0) != 1.0:
                raise ValueError("mu[K, d] must be the point mass at 0")
        return cls(K=K, mu0=mu0v, mu=muv, q=tuple(q))


def gw2_tables(model: GW2Model) -> PriorTables:
    """Backward-induction tables over (depth, parent litter size)."""
    K = model.K
    q = model.q
    # litter sizes reachable at each depth
    reach: dict[int, set[int]] = {1: {c for c, p in model.mu0 if c >= 1 and p > 0}}
    for k in range(1, K):
        nxt: set[int] = set()
        for d in reach.get(k, ()):
            law = dict(model.mu.get((k, d), ()))
            nxt.update(c for c, p in law.items() if c >= 1 and p > 0)
        reach[k + 1] = nxt

    m: dict[tuple[int, int], float] = {}
    s: dict[tuple[int, int], float] = {}
    qK = _q_at(q, K, 1.0)
    for d in reach.get(K, set()) or {1}:
        m[(K, d)] = qK
        s[(K, d)] = qK * (1.0 - qK)
    for k in range(K - 1, 0, -1):
        odd = k % 2 == 1
        for d in reach.get(k, set()):
            if (k, d) not in model.mu:
                raise ValueError(f"model is missing the law mu[{k},{d}]")
            law = dict(model.mu[(k, d)])
            mu0 = law.get(0, 0.0)
            qk = _q_at(q, k, mu0)
            mk = mu0 * qk
            for ell, prob in law.items():
                if ell < 1:
                    continue
                mc = m[(k + 1, ell)]
                mk += prob * (mc**ell if odd else 1.0 - (1.0 - mc) ** ell)
            m[(k, d)] = mk
            own = mk if odd else 1.0 - mk
            sk = mu0 * (qk * (1.0 - mk) ** 2 + (1.0 - qk) * mk**2)
            for ell, prob in law.items():
                if ell < 1:
                    continue
                base = m[(k + 1, ell)] if odd else 1.0 - m[(k + 1, ell)]
                sk += prob * (base ** (2 * ell - 2) * s[(k + 1, ell)] + (base**ell - own) ** 2)
            s[(k, d)] = sk
    return PriorTables(kind="gw2", m=m, s=s, max_depth=K)


class STable:
    """Tabulated solution of the homogeneous-model s fixed point."""

    def __init__(self, grid: np.ndarray, values: np.ndarray, sweeps: int):
        self.grid = grid
        self.values = values
        self.sweeps = sweeps

    def __call__(self, alpha):
        return np.interp(alpha, self.grid, self.values)


def homogeneous_s_fixed_point(mu: dict[int, float], grid_size: int = 8192, tol: float = 1e-12) -> STable:
    """Solve s(a) = mu(0) a (1-a) + sum_l mu(l) (1-a)^{2(l-1)/l} s((1-a)^{1/l}).

    The map is a sup-norm contraction with factor kappa = sum_{l>=1} mu(l),
    so plain iteration on a uniform grid (linear interpolation off-grid)
    converges geometrically.
    """
    law = {int(c): float(p) for c, p in mu.items() if p > 0}
    total = sum(law.values())
    if abs(total - 1.0) > 1e-9:
        raise ValueError("mu must sum to 1")
    kappa = sum(p for c, p in law.items() if c >= 1)
    mean = sum(c * p for c, p in law.items())
    if kappa >= 1.0 or law.get(0, 0.0) <= 0.0:
        raise ValueError("need mu(0) > 0 (kappa < 1) for an a.s.-finite tree")
    if mean > 1.0 + 1e-12:
        raise ValueError("need mean litter size <= 1 for an a.s.-finite tree")

    grid = np.linspace(0.0, 1.0, grid_size)
    comp = 1.0 - grid
    fixed = law.get(0, 0.0) * grid * comp
    terms = []
    for ell, prob in sorted(law.items()):
        if ell >= 1:
            terms.append((prob, comp ** (2.0 * (ell - 1) / ell), comp ** (1.0 / ell)))
    values = np.zeros_like(grid)
    sweeps = 0
    while True:
        new = fixed.copy()
        for prob, weight, query in terms:
            new += prob * weight * np.interp(query, grid, values)
        sweeps += 1
        delta = float(np.max(np.abs(new - values)))
        values = new
        if delta <= tol:
            break
        if sweeps > 100000:
            raise RuntimeError("fixed-point iteration failed to converge")
    return STable(grid=grid, values=values, sweeps=sweeps)


@dataclass
class GWFit:
    """Raw playout statistics for fitting a Galton-Watson model."""

    playouts: int
    litters: dict[int, dict[int, int]]  # depth -> litter size -> count
    terminals: dict[int, list[int]]  # depth -> [losses, wins]

    @property
    def max_leaf_depth(self) -> int:
        return max(self.terminals)

    def missing_q_depths(self) -> list[int]:
        """Depths where a leaf probability would be needed but was never seen."""
        K = self.max_leaf_depth
        out = []
        for k in range(K + 1):
            saw_leaf = k in self.terminals
            visits = sum(self.litters.get(k, {}).values()) + sum(self.terminals.get(k, [0, 0]))
            if not saw_leaf and visits == 0:
                out.append(k)
        return out

    def to_model(self, seed: int = 0):
        """Frequency-count model estimate (no smoothing).

        Depths that were visited but never terminal get q = None; a depth
        never visited at all is an error.
        """
        from .games.random_trees import GWModel

        missing = self.missing_q_depths()
        if missing:
            raise ValueError(f"no playout reached depths {missing}; cannot fit")
        K = self.max_leaf_depth
        mu = []
        q: list[float | None] = []
        for k in range(K + 1):
            litter = dict(self.litters.get(k, {}))
            term = self.terminals.get(k, [0, 0])
            n_term = term[0] + term[1]
            total = sum(litter.values()) + n_term
            law = [(0, n_term / total)] if n_term else []
            law += [(c, cnt / total) for c, cnt in sorted(litter.items())]
            if k == K:
                law = [(0, 1.0)]
            mu.append(law)
            q.append(term[1] / n_term if n_term else None)
        return GWModel.create(K=K, mu=mu, q=q, seed=seed)


def fit_gw_from_playouts(
    root: Position, playouts: int, rng: Stream, policy: DrawPolicy = DrawPolicy()
) -> GWFit:
    """Estimate litter laws and leaf probabilities from uniform playouts."""
    if playouts < 1:
        raise ValueError("need at least one playout")
    litters: dict[int, dict[int, int]] = {}
    terminals: dict[int, list[int]] = {}
    for _ in range(playouts):
        pos = root
        while not pos.is_terminal:
            k = pos.depth
            d = len(pos.legal_moves)
            litters.setdefault(k, {}).setdefault(d, 0)
            litters[k][d] += 1
            i = rng.below(d) if d > 1 else 0
            pos = pos.apply(pos.legal_moves[i])
        bucket = terminals.setdefault(pos.depth, [0, 0])
        bucket[binary_value(pos.raw_outcome, policy)] += 1
    return GWFit(playouts=playouts, litters=litters, terminals=terminals)


@dataclass
class GW2Fit:
    playouts: int
    litters: dict[tuple[int, int], dict[int, int]]  # (depth, parent litter) -> size -> count
    root_litters: dict[int, int]
    terminals: dict[int, list[int]]

    def to_model(self):
        if not self.terminals:
            raise ValueError("no playout reached a terminal position")
        K = max(self.terminals)
        mu0 = [(c, n / sum(self.root_litters.values())) for c, n in sorted(self.root_litters.items())]
        mu: dict[tuple[int, int], list] = {}
        for (k, d), counts in self.litters.items():
            total = sum(counts.values())
            mu[(k, d)] = [(c, n / total) for c, n in sorted(counts.items())]
        # the deepest level can only have been seen terminating
        for key in [(k, d) for (k, d) in mu if k == K]:
            mu[key] = [(0, 1.0)]
        q: list[float | None] = []
        for k in range(K + 1):
            term = self.terminals.get(k, [0, 0])
            n_term = term[0] + term[1]
            q.append(term[1] / n_term if n_term else None)
        return GW2Model.create(K=K, mu0=mu0, mu=mu, q=q)


def fit_gw2_from_playouts(
    root: Position, playouts: int, rng: Stream, policy: DrawPolicy = DrawPolicy()
) -> GW2Fit:
    """Order-2 fit: litter laws conditioned on the parent's litter size.

    Terminal visits count as litter size 0 of the (depth, parent litter)
    cell, matching the order-2 model's reproduction laws.
    """
    if playouts < 1:
        raise ValueError("need at least one playout")
    litters: dict[tuple[int, int], dict[int, int]] = {}
    root_litters: dict[int, int] = {}
    terminals: dict[int, list[int]] = {}
    for _ in range(playouts):
        pos = root
        parent_d = None
        while True:
            k = pos.depth
            d = len(pos.legal_moves) if not pos.is_terminal else 0
            if k == 0:
                root_litters[d] = root_litters.get(d, 0) + 1
            else:
                litters.setdefault((k, parent_d), {}).setdefault(d, 0)
                litters[(k, parent_d)][d] += 1
            if pos.is_terminal:
                bucket = terminals.setdefault(k, [0, 0])
                bucket[binary_value(pos.raw_outcome, policy)] += 1
                break
            i = rng.below(d) if d > 1 else 0
            parent_d = d
            pos = pos.apply(pos.legal_moves[i])
    return GW2Fit(playouts=playouts, litters=litters, root_litters=root_litters, terminals=terminals)


def known_tree_prior(model: TreeModel, size_limit: int = 10**5) -> dict[Path, tuple[float, float]]:
    """Exact per-node (m, s) for an explicit tree with Bernoulli leaves.

    Backward induction with deterministic litters: at an internal node the
    one-playout variance averages, over the uniformly chosen child, the
    child's own variance damped by the squared product of the other
    children's means (or complement means on a max level).
    """
    if len(model.children) + len(model.leaf_probs) > size_limit:
        raise ValueError("tree too large for the exact prior")
    out: dict[Path, tuple[float, float]] = {}

    def visit(path: Path) -> tuple[float, float]:
        if model.is_leaf(path):
            q = model.leaf_probs[path]
            out[path] = (q, q * (1.0 - q))
            return out[path]
        kids = [visit(kid) for kid in model.children[path]]
        d = len(kids)
        maximize = len(path) % 2 == 0
        if maximize:
            prod = 1.0
            for mc, _ in kids:
                prod *= 1.0 - mc
            m = 1.0 - prod
            s = 0.0
            for i, (mc, sc) in enumerate(kids):
                others = 1.0
                for j, (mo, _) in enumerate(kids):
                    if j != i:
                        others *= (1.0 - mo) ** 2
                s += sc * others + (prod - (1.0 - m)) ** 2
            s /= d
        else:
            prod = 1.0
            for mc, _ in kids:
                prod *= mc
            m = prod
            s = 0.0
            for i, (mc, sc) in enumerate(kids):
                others = 1.0
                for j, (mo, _) in enumerate(kids):
                    if j != i:
                        others *= mo**2
                s += sc * others + (prod - m) ** 2
            s /= d
        out[path] = (m, s)
        return out[path]

    visit(())
    return out
