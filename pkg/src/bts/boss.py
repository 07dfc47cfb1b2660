"""Step-by-step optimal Bayesian search (pure-Python reference engine).

The engine grows an explored tree by repeated uniformly random playouts.
Each node carries a prior pair (m, s) fixed at creation and a posterior
triple (R, U, Z):

* R is the posterior mean of the node's minimax value,
* U aggregates the sibling posteriors (the product of sibling means, or
  of their complements on a max level),
* Z propagates the best attainable one-step information gain.

The next playout starts from the frontier node reached by descending on
the largest U^2 Z, which minimizes the expected posterior L2 error of the
root after one more playout.  R and U are stored as log-odds, Z as a
plain log (s may exceed 1; scaling s by a constant leaves the search
invariant).

All randomness comes from the state's stream; identical seeds give
identical searches, bit for bit, in both backends.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

from .game_core import DrawPolicy, Player, Position, binary_value
from .logodds import INF, log_from_phi, phi_inv, phi_mul
from .priors import NodePrior, PriorTables, SymFamily, sym_child, sym_root
from .rng import Stream

FRONTIER, INTERNAL, LEAF = 0, 1, 2
TIE_TOL = 1e-12


class Node:
    """One explored-tree node; values live in phi/log space."""

    __slots__ = (
        "idx",
        "parent",
        "move",
        "depth",
        "pos",
        "status",
        "turn_max",
        "children",
        "m_phi",
        "s_log",
        "r_phi",
        "u_phi",
        "u_log",
        "z_log",
    )

    def __init__(self, parent, move, depth, pos, turn_max, m_phi, s_log):
        self.idx = 0
        self.parent = parent
        self.move = move
        self.depth = depth
        self.pos = pos
        self.status = FRONTIER
        self.turn_max = turn_max
        self.children: list[Node] = []
        self.m_phi = m_phi
        self.s_log = s_log
        self.r_phi = m_phi
        self.u_phi = INF  # neutral until the parent litter is assessed
        self.u_log = 0.0
        self.z_log = s_log

    @property
    def path(self):
        return self.pos.path


# ---------------------------------------------------------------------------
# prior sources


class SymPrior:
    """Symmetric-family prior: children derive from the parent's stored m."""

    def __init__(self, fam: SymFamily):
        self.fam = fam

    def root_prior(self, state, pos) -> NodePrior:
        return sym_root(self.fam)

    def child_prior(self, state, parent: Node, d: int, child_pos) -> NodePrior:
        turn = Player.J1 if parent.turn_max else Player.J0
        return sym_child(NodePrior(parent.m_phi, parent.s_log), d, turn, self.fam)


class TablePrior:
    """Depth-indexed tables (gw / pearl), oriented by the state's flip."""

    def __init__(self, tables: PriorTables):
        if tables.kind == "gw2":
            raise ValueError("use Table2Prior for gw2 tables")
        self.tables = tables

    def _prior(self, state, depth: int, litter=None) -> NodePrior:
        m, s = self.tables.lookup(depth, litter)
        m_phi = _phi_of(m)
        if state.flip:
            m_phi = -m_phi
        return NodePrior(m_phi=m_phi, s_log=math.log(s) if s > 0.0 else -INF)

    def root_prior(self, state, pos) -> NodePrior:
        return self._prior(state, pos.depth)

    def child_prior(self, state, parent: Node, d: int, child_pos) -> NodePrior:
        return self._prior(state, parent.depth + 1)


class Table2Prior(TablePrior):
    """(depth, litter size)-indexed tables (gw2)."""

    def __init__(self, tables: PriorTables):
        if tables.kind != "gw2":
            raise ValueError("Table2Prior needs gw2 tables")
        self.tables = tables

    def root_prior(self, state, pos) -> NodePrior:
        # the root's own prior is never consulted by the search; any
        # interior placeholder works
        return NodePrior(m_phi=0.0, s_log=0.0)

    def child_prior(self, state, parent: Node, d: int, child_pos) -> NodePrior:
        return self._prior(state, parent.depth + 1, litter=d)


class KnownTreePrior:
    """Per-path exact priors for explicit test trees."""

    def __init__(self, table: dict):
        self.table = table  # path -> (m, s) in probability space

    def _prior(self, state, path) -> NodePrior:
        m, s = self.table[path]
        m_phi = _phi_of(m)
        if state.flip:
            m_phi = -m_phi
        return NodePrior(m_phi=m_phi, s_log=math.log(s) if s > 0.0 else -INF)

    def root_prior(self, state, pos) -> NodePrior:
        return self._prior(state, pos.path)

    def child_prior(self, state, parent: Node, d: int, child_pos) -> NodePrior:
        return self._prior(state, child_pos.path)


def _phi_of(m: float) -> float:
    if m <= 0.0:
        return -INF
    if m >= 1.0:
        return INF
    return math.log(m) - math.log1p(-m)


# ---------------------------------------------------------------------------


@dataclass
class Diagnostics:
    iterations: int = 0
    frozen_iterations: int = 0
    nodes_created: int = 1
    touched_per_step: list = field(default_factory=list)
    trajectory: list | None = None
    visited_leaves: list | None = None


class SearchState:
    """Explored tree plus search bookkeeping for one root position."""

    def __init__(
        self,
        root_pos: Position,
        prior,
        rng: Stream,
        policy: DrawPolicy = DrawPolicy(),
        record_trajectory: bool = False,
        record_leaves: bool = False,
        audit_writes: bool = False,
    ):
        self.prior = prior
        self.rng = rng
        self.policy = policy
        self.flip = False
        self.terminated = False
        self.diag = Diagnostics()
        if record_trajectory:
            self.diag.trajectory = []
        if record_leaves:
            self.diag.visited_leaves = []
        self.audit_writes = audit_writes
        self._touched: set | None = set() if audit_writes else None
        self._next_idx = 0

        rp = prior.root_prior(self, root_pos)
        self.root = Node(None, None, root_pos.depth, root_pos, True, rp.m_phi, rp.s_log)
        self.root.idx = self._take_idx()
        self._step_from(self.root)

    def _take_idx(self) -> int:
        i = self._next_idx
        self._next_idx += 1
        return i

    # -- iteration ---------------------------------------------------------

    def select_frontier(self) -> Node:
        """Descend from the root on the largest U^2 Z (log space)."""
        if self.terminated:
            raise RuntimeError("search already terminated")
        node = self.root
        while node.status == INTERNAL:
            node = node.children[self._argmax_child(node)]
        if node.status == LEAF:
            raise RuntimeError("descent reached a visited leaf; state corrupt")
        return node

    def _argmax_child(self, node: Node) -> int:
        scores = [2.0 * c.u_log + c.z_log for c in node.children]
        best = max(scores)
        ties = [i for i, sc in enumerate(scores) if sc >= best - TIE_TOL]
        if len(ties) == 1:
            return ties[0]
        return ties[self.rng.below(len(ties))]

    def step(self) -> None:
        """One iteration: select, play out, extend, update backward."""
        z = self.select_frontier()
        before = (self.root.r_phi, self.root.z_log)
        self._step_from(z)
        if not self.terminated and (self.root.r_phi, self.root.z_log) == before:
            self.diag.frozen_iterations += 1

    def _step_from(self, z: Node) -> None:
        if self.audit_writes:
            self._touched = set()
        rng = self.rng
        prior = self.prior
        node = z
        pos = z.pos
        while not pos.is_terminal:
            moves = pos.legal_moves
            d = len(moves)
            children = []
            for mv in moves:
                child_pos = pos.apply(mv)
                cp = prior.child_prior(self, node, d, child_pos)
                child = Node(node, mv, node.depth + 1, child_pos, not node.turn_max, cp.m_phi, cp.s_log)
                child.idx = self._take_idx()
                children.append(child)
            node.children = children
            node.status = INTERNAL
            self.diag.nodes_created += d
            if self._touched is not None:
                self._touched.update(c.idx for c in children)
                self._touched.add(node.idx)
            i = rng.below(d) if d > 1 else 0
            node = children[i]
            pos = node.pos

        value = binary_value(pos.raw_outcome, self.policy)
        if self.flip:
            value = 1 - value
        node.status = LEAF
        node.r_phi = INF if value else -INF
        node.z_log = -INF
        if self._touched is not None:
            self._touched.add(node.idx)
        self.diag.iterations += 1
        if self.diag.visited_leaves is not None:
            self.diag.visited_leaves.append(pos.path)

        leaf = node
        x = node
        while x is not self.root:
            x = x.parent
            self._refresh(x)
        self.terminated = math.isinf(self.root.r_phi)
        if self.diag.trajectory is not None:
            self.diag.trajectory.append(phi_inv(self.root.r_phi))
        if self._touched is not None:
            allowed = set()
            x = leaf
            while x is not None:
                allowed.add(x.idx)
                allowed.update(c.idx for c in x.children)
                x = x.parent
            self.diag.touched_per_step.append((self._touched, allowed))

    def _refresh(self, p: Node) -> None:
        """Recompute R(p), U over p's children and Z(p) from the children."""
        children = p.children
        d = len(children)
        # on a max level the recursions run on complement probabilities;
        # in phi space that is a sign flip
        if p.turn_max:
            vals = [-c.r_phi for c in children]
        else:
            vals = [c.r_phi for c in children]
        pre = [INF] * (d + 1)
        for i in range(d):
            pre[i + 1] = phi_mul(pre[i], vals[i])
        suf = [INF] * (d + 1)
        for i in range(d - 1, -1, -1):
            suf[i] = phi_mul(vals[i], suf[i + 1])
        r = -pre[d] if p.turn_max else pre[d]
        z = -INF
        touched = self._touched
        for i, c in enumerate(children):
            u = phi_mul(pre[i], suf[i + 1])
            if u != c.u_phi:
                c.u_phi = u
                c.u_log = log_from_phi(u)
                if touched is not None:
                    touched.add(id(c))
            sc = 2.0 * c.u_log + c.z_log
            if sc > z:
                z = sc
        if r != p.r_phi or z != p.z_log:
            if touched is not None:
                touched.add(id(p))
            p.r_phi = r
            p.z_log = z

    # -- conclusions ---------------------------------------------------------

    def best_move(self):
        """Move to the root child with the largest posterior mean."""
        children = self.root.children
        if not children:
            raise RuntimeError("root has no explored children")
        best = max(c.r_phi for c in children)
        ties = [i for i, c in enumerate(children) if c.r_phi >= best - TIE_TOL]
        pick = ties[0] if len(ties) == 1 else ties[self.rng.below(len(ties))]
        return children[pick].move

    def root_value(self) -> float:
        return phi_inv(self.root.r_phi)

    def run(self, iterations: int | None = None, deadline: float | None = None):
        """Run extra iterations until the budget is spent or the value of
        the root is known exactly; returns (best move, diagnostics)."""
        done = 0
        while not self.terminated:
            if iterations is not None and done >= iterations:
                break
            if deadline is not None and time.perf_counter() >= deadline:
                break
            self.step()
            done += 1
        if self.root.status == LEAF:
            return None, self.diag
        return self.best_move(), self.diag

    # -- reroot --------------------------------------------------------------

    def reroot(self, move) -> "SearchState":
        """Make the chosen child's subtree the new search state.

        The orientation re-anchors so the mover at the new root is the
        maximizer: posteriors and prior means flip to their complements,
        while U, Z and s are invariant under the exchange of players.
        """
        root = self.root
        idx = None
        for i, c in enumerate(root.children):
            if c.move == move:
                idx = i
                break
        if idx is None:
            raise ValueError(f"unknown move {move!r} at the search root")
        new_root = root.children[idx]
        self.flip = not self.flip
        stack = [new_root]
        while stack:
            n = stack.pop()
            n.r_phi = -n.r_phi
            n.m_phi = -n.m_phi
            n.turn_max = not n.turn_max
            stack.extend(n.children)
        new_root.parent = None
        new_root.move = None
        new_root.u_phi = INF
        new_root.u_log = 0.0
        self.root = new_root

        if new_root.status == FRONTIER:
            # nothing retained below: restart with one playout, keeping the
            # stored prior as the continuation of the chain
            self.terminated = False
            self._step_from(new_root)
            return self
        if new_root.status == LEAF:
            self.terminated = True
            return self
        # sibling context of the old root no longer applies
        self._refresh(new_root)
        self.terminated = math.isinf(new_root.r_phi)
        return self


# ---------------------------------------------------------------------------
# spec-level operation aliases


def init_search(root: Position, prior, rng: Stream, policy: DrawPolicy = DrawPolicy(), **kw) -> SearchState:
    return SearchState(root, prior, rng, policy, **kw)


def select_frontier(state: SearchState) -> Node:
    return state.select_frontier()


def step(state: SearchState) -> SearchState:
    state.step()
    return state


def run(state: SearchState, iterations: int | None = None, deadline: float | None = None):
    return state.run(iterations=iterations, deadline=deadline)


def reroot(state: SearchState, move) -> SearchState:
    return state.reroot(move)


# ---------------------------------------------------------------------------
# audit helpers (test support)


def audit_state(state: SearchState, rel_tol: float = 1e-9) -> None:
    """Verify the (R, U, Z) recursions and status invariants everywhere."""

    def close(a, b):
        if math.isinf(a) or math.isinf(b):
            return a == b
        return abs(a - b) <= rel_tol * max(1.0, abs(a), abs(b))

    def visit(n: Node):
        if n.status == FRONTIER:
            assert not n.children
            assert n.r_phi == n.m_phi and n.z_log == n.s_log
            return
        if n.status == LEAF:
            assert math.isinf(n.r_phi) and n.z_log == -INF
            return
        assert n.children
        vals = [(-c.r_phi if n.turn_max else c.r_phi) for c in n.children]
        pre = [INF] * (len(vals) + 1)
        for i, v in enumerate(vals):
            pre[i + 1] = phi_mul(pre[i], v)
        suf = [INF] * (len(vals) + 1)
        for i in range(len(vals) - 1, -1, -1):
            suf[i] = phi_mul(vals[i], suf[i + 1])
        r = -pre[-1] if n.turn_max else pre[-1]
        assert close(n.r_phi, r), f"R recursion broken at {n.path}"
        z = -INF
        for i, c in enumerate(n.children):
            u = phi_mul(pre[i], suf[i + 1])
            assert close(c.u_phi, u), f"U recursion broken at {c.path}"
            z = max(z, 2.0 * c.u_log + c.z_log)
        assert close(n.z_log, z), f"Z recursion broken at {n.path}"
        # Z = log 0 iff R is 0 or 1, and the decided value is exact
        assert (n.z_log == -INF) == math.isinf(n.r_phi)
        for c in n.children:
            visit(c)

    visit(state.root)


def collect_nodes(state: SearchState) -> list[Node]:
    out = []
    stack = [state.root]
    while stack:
        n = stack.pop()
        out.append(n)
        stack.extend(n.children)
    return out
