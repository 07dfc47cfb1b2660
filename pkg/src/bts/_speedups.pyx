# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled search cores (Pearl / Galton-Watson / Connect-Four games).

These re-implement the pure-Python engines node for node: identical
arithmetic (same libm calls in the same order, no FMA contraction),
identical random streams and identical tie-breaking, so a fixed seed
produces the same search in either backend.  The pure modules remain the
readable reference; this one exists because self-play experiments run
tens of millions of iterations.
"""

import math

import numpy as np

from libc.math cimport expm1, exp, isinf, log, log1p
from libc.string cimport memcpy

cdef double INF = float("inf")
cdef double NEG_INF = float("-inf")
cdef double TIE_TOL = 1e-12
cdef double LN2 = 0.6931471805599453094172321214581766
cdef double INV_2_53 = 1.0 / 9007199254740992.0

cdef unsigned long long GOLDEN = 0x9E3779B97F4A7C15ULL
cdef unsigned long long OUTCOME_SALT = 0xD1B54A32D192ED03ULL
cdef unsigned long long LITTER_SALT = 0x8BB84B93962EACC9ULL

DEF MAXD = 64

cdef int ST_FRONTIER = 0
cdef int ST_INTERNAL = 1
cdef int ST_LEAF = 2


# ---------------------------------------------------------------------------
# primitives (bit-identical to bts.rng / bts.logodds)

cdef inline unsigned long long mix64(unsigned long long x) nogil:
    x ^= x >> 30
    x *= 0xBF58476D1CE4E5B9ULL
    x ^= x >> 27
    x *= 0x94D049BB133111EBULL
    x ^= x >> 31
    return x


cdef inline unsigned long long path_child(unsigned long long h, int index) nogil:
    return mix64(h ^ ((<unsigned long long>(index + 1)) * GOLDEN))


cdef inline double unit_from(unsigned long long h, unsigned long long salt) nogil:
    return <double>(mix64(h ^ salt) >> 11) * INV_2_53


cdef inline double phi_mul(double u, double v) nogil:
    cdef double t
    if u < v:
        t = u
        u = v
        v = t
    if v == INF:
        return INF
    if u < 0.0:
        return u + v - log(1.0 + exp(u) + exp(v))
    return v - log(1.0 + exp(-u) + exp(v - u))


cdef inline double log_from_phi(double u) nogil:
    if u < 0.0:
        return u - log1p(exp(u))
    return -log1p(exp(-u))


cdef inline double phi_pow_root(double u, int d) nogil:
    cdef double ell
    if d == 1 or u == INF or u == NEG_INF:
        return u
    ell = log_from_phi(u) / d
    if ell > -LN2:
        return ell - log(-expm1(ell))
    return ell - log1p(-exp(ell))


cdef inline double phi_inv(double u) nogil:
    cdef double e
    if u >= 0.0:
        return 1.0 / (1.0 + exp(-u))
    e = exp(u)
    return e / (1.0 + e)


# ---------------------------------------------------------------------------
# game cores

cdef int KIND_PEARL = 0
cdef int KIND_GW = 1
cdef int KIND_C4 = 2


cdef class CGame:
    cdef int kind
    # pearl / gw
    cdef int K
    cdef int d
    cdef double p
    cdef unsigned long long root_h
    cdef int root_depth
    cdef double[:, ::1] gw_cum
    cdef long long[:, ::1] gw_cnt
    cdef int[::1] gw_len
    cdef double[::1] gw_q
    cdef signed char[::1] gw_q_known
    # c4
    cdef int cols, rows, connect, inverse, draw_to
    cdef signed char[::1] root_board
    cdef int[::1] root_heights
    cdef int root_term, root_value_
    # walk state
    cdef int wdepth
    cdef unsigned long long wh
    cdef signed char[::1] wboard
    cdef int[::1] wheights
    cdef int wnmoves
    cdef int wterm
    cdef int wvalue  # mapped binary value, valid when wterm

    # -- construction (python level) ---------------------------------------

    @staticmethod
    def pearl(int d, int K, double p, unsigned long long seed):
        cdef CGame g = CGame()
        if d > MAXD:
            raise ValueError("degree too large for the compiled core")
        g.kind = KIND_PEARL
        g.d = d
        g.K = K
        g.p = p
        g.root_h = mix64(seed)
        g.root_depth = 0
        return g

    @staticmethod
    def gw(int K, object laws, object q, unsigned long long seed):
        # laws: list over depth of [(count, prob)...]; cumulative sums are
        # built here with plain sequential additions to match the pure code
        cdef CGame g = CGame()
        g.kind = KIND_GW
        g.K = K
        width = max(len(law) for law in laws)
        cum = np.zeros((K + 1, width), dtype=np.float64)
        cnt = np.zeros((K + 1, width), dtype=np.int64)
        ln = np.zeros(K + 1, dtype=np.int32)
        for k, law in enumerate(laws):
            if max(c for c, _ in law) > MAXD:
                raise ValueError("litter too large for the compiled core")
            acc = 0.0
            for i, (c, prob) in enumerate(law):
                acc += prob
                cum[k, i] = acc
                cnt[k, i] = c
            ln[k] = len(law)
        g.gw_cum = cum
        g.gw_cnt = cnt
        g.gw_len = ln
        qa = np.zeros(K + 1, dtype=np.float64)
        qk = np.zeros(K + 1, dtype=np.int8)
        for k, val in enumerate(q):
            if val is not None:
                qa[k] = val
                qk[k] = 1
        g.gw_q = qa
        g.gw_q_known = qk
        g.root_h = mix64(seed)
        g.root_depth = 0
        return g

    @staticmethod
    def c4(int cols, int rows, int connect, int inverse, int draw_to):
        cdef CGame g = CGame()
        if cols > MAXD:
            raise ValueError("board too wide for the compiled core")
        g.kind = KIND_C4
        g.cols = cols
        g.rows = rows
        g.connect = connect
        g.inverse = inverse
        g.draw_to = draw_to
        g.root_board = np.zeros(cols * rows, dtype=np.int8)
        g.root_heights = np.zeros(cols, dtype=np.int32)
        g.wboard = np.zeros(cols * rows, dtype=np.int8)
        g.wheights = np.zeros(cols, dtype=np.int32)
        g.root_depth = 0
        g.root_term = 0
        g.root_value_ = 0
        return g

    # -- litter / outcome draws ---------------------------------------------

    cdef inline int gw_litter(self, int depth, unsigned long long h) nogil:
        cdef double u
        cdef int i, n
        if depth >= self.K:
            return 0
        u = unit_from(h, LITTER_SALT)
        n = self.gw_len[depth]
        for i in range(n):
            if u < self.gw_cum[depth, i]:
                return <int>self.gw_cnt[depth, i]
        return <int>self.gw_cnt[depth, n - 1]

    cdef inline int tree_leaf_value(self, int depth, unsigned long long h) except -1:
        cdef double q
        if self.kind == KIND_PEARL:
            return 1 if unit_from(h, OUTCOME_SALT) < self.p else 0
        if not self.gw_q_known[depth]:
            raise ValueError("model has no leaf probability at this depth")
        q = self.gw_q[depth]
        return 1 if unit_from(h, OUTCOME_SALT) < q else 0

    cdef inline int c4_aligned(self, signed char* board, int col, int row, int who) nogil:
        cdef int need = self.connect
        cdef int dc, dr, count, c, r, sign, k
        cdef int dirs[4][2]
        dirs[0][0] = 0; dirs[0][1] = 1
        dirs[1][0] = 1; dirs[1][1] = 0
        dirs[2][0] = 1; dirs[2][1] = 1
        dirs[3][0] = 1; dirs[3][1] = -1
        for k in range(4):
            dc = dirs[k][0]
            dr = dirs[k][1]
            count = 1
            for sign in range(-1, 2, 2):
                c = col + sign * dc
                r = row + sign * dr
                while 0 <= c < self.cols and 0 <= r < self.rows:
                    if board[c * self.rows + r] != who:
                        break
                    count += 1
                    c += sign * dc
                    r += sign * dr
            if count >= need:
                return 1
        return 0

    # -- walk ---------------------------------------------------------------

    cdef void reset_walk(self) except *:
        cdef int i
        self.wdepth = self.root_depth
        if self.kind == KIND_C4:
            memcpy(&self.wboard[0], &self.root_board[0], self.cols * self.rows)
            for i in range(self.cols):
                self.wheights[i] = self.root_heights[i]
            self.wterm = self.root_term
            self.wvalue = self.root_value_
            self.wnmoves = 0
            if not self.wterm:
                for i in range(self.cols):
                    if self.wheights[i] < self.rows:
                        self.wnmoves += 1
        else:
            self.wh = self.root_h
            if self.kind == KIND_PEARL:
                self.wterm = 1 if self.wdepth >= self.K else 0
                self.wnmoves = 0 if self.wterm else self.d
            else:
                self.wnmoves = self.gw_litter(self.wdepth, self.wh)
                self.wterm = 1 if self.wnmoves == 0 else 0
            if self.wterm:
                self.wvalue = self.tree_leaf_value(self.wdepth, self.wh)

    cdef inline int walk_label(self, int i) nogil:
        # label of the i-th legal move at the current walk position
        cdef int c, seen
        if self.kind != KIND_C4:
            return i
        seen = 0
        for c in range(self.cols):
            if self.wheights[c] < self.rows:
                if seen == i:
                    return c
                seen += 1
        return -1

    cdef void walk_apply(self, int label) except *:
        cdef int who, row, c
        if self.kind == KIND_C4:
            who = 1 if (self.wdepth % 2 == 0) else 2  # 1 = J1 (first mover)
            row = self.wheights[label]
            self.wboard[label * self.rows + row] = who
            self.wheights[label] = row + 1
            self.wdepth += 1
            if self.c4_aligned(&self.wboard[0], label, row, who):
                self.wterm = 1
                if self.inverse:
                    who = 3 - who
                self.wvalue = 1 if who == 1 else 0
                self.wnmoves = 0
                return
            if self.wdepth == self.cols * self.rows:
                self.wterm = 1
                self.wvalue = self.draw_to
                self.wnmoves = 0
                return
            self.wterm = 0
            self.wnmoves = 0
            for c in range(self.cols):
                if self.wheights[c] < self.rows:
                    self.wnmoves += 1
            return
        self.wh = path_child(self.wh, label)
        self.wdepth += 1
        if self.kind == KIND_PEARL:
            self.wterm = 1 if self.wdepth >= self.K else 0
            self.wnmoves = 0 if self.wterm else self.d
        else:
            self.wnmoves = self.gw_litter(self.wdepth, self.wh)
            self.wterm = 1 if self.wnmoves == 0 else 0
        if self.wterm:
            self.wvalue = self.tree_leaf_value(self.wdepth, self.wh)

    def advance_root(self, int label):
        """Apply a move to the root state (after a real game move)."""
        self.reset_walk()
        self.walk_apply(label)
        cdef int i
        self.root_depth = self.wdepth
        if self.kind == KIND_C4:
            memcpy(&self.root_board[0], &self.wboard[0], self.cols * self.rows)
            for i in range(self.cols):
                self.root_heights[i] = self.wheights[i]
            self.root_term = self.wterm
            self.root_value_ = self.wvalue
        else:
            self.root_h = self.wh


# ---------------------------------------------------------------------------
# shared arena plumbing

cdef int PRIOR_SYM = 0
cdef int PRIOR_TABLE = 1
cdef int PRIOR_TABLE2 = 2


cdef class BossCore:
    cdef CGame game
    cdef int prior_kind
    cdef double sym_b
    cdef int sym_pc
    cdef double root_m_phi, root_s_log
    cdef double[::1] tab_m      # phi(m) by absolute depth (abs orientation)
    cdef double[::1] tab_s      # log s by absolute depth
    cdef double[:, ::1] tab2_m  # gw2: [depth, litter]
    cdef double[:, ::1] tab2_s
    cdef signed char[:, ::1] tab2_seen
    cdef int tab_max_depth, tab2_max_litter
    cdef public long long unseen_litter_queries

    cdef unsigned long long rng_state
    cdef int flip
    cdef public int terminated
    cdef public long long iterations
    cdef public long long nodes_created
    cdef public long long frozen_iterations

    # arena
    cdef long long cap, used
    cdef object _arrs
    cdef signed char[::1] status
    cdef int[::1] parent
    cdef int[::1] first_child
    cdef short[::1] n_children
    cdef short[::1] move
    cdef int[::1] depth
    cdef double[::1] m_phi
    cdef double[::1] s_log
    cdef double[::1] r_phi
    cdef double[::1] u_phi
    cdef double[::1] u_log
    cdef double[::1] z_log

    cdef int record
    cdef object traj
    cdef object leaf_paths_
    cdef object root_path

    def __init__(self, CGame game, int prior_kind, dict prior_data, unsigned long long seed, int record):
        self.game = game
        self.prior_kind = prior_kind
        self.rng_state = seed
        self.flip = 0
        self.terminated = 0
        self.iterations = 0
        self.frozen_iterations = 0
        self.unseen_litter_queries = 0
        self.record = record
        self.traj = [] if record else None
        self.leaf_paths_ = [] if record else None
        self.root_path = []

        if prior_kind == PRIOR_SYM:
            self.sym_b = prior_data["b"]
            self.sym_pc = 1 if prior_data.get("pearl_consistent") else 0
            self.root_m_phi = prior_data["m_phi"]
            self.root_s_log = 0.0
        elif prior_kind == PRIOR_TABLE:
            self.tab_m = prior_data["m_phi"]
            self.tab_s = prior_data["s_log"]
            self.tab_max_depth = len(prior_data["m_phi"]) - 1
        else:
            self.tab2_m = prior_data["m_phi"]
            self.tab2_s = prior_data["s_log"]
            self.tab2_seen = prior_data["seen"]
            self.tab_max_depth = prior_data["m_phi"].shape[0] - 1
            self.tab2_max_litter = prior_data["m_phi"].shape[1] - 1

        self._alloc(4096)
        self.used = 0
        self.nodes_created = 0
        # root node
        self.game.reset_walk()
        cdef long long root = self._new_node(-1, -1, self.game.wdepth)
        self._assign_root_prior(root)
        self._playout_from(<int>root)

    # -- memory --------------------------------------------------------------

    cdef void _alloc(self, long long cap) except *:
        arrs = {
            "status": np.zeros(cap, dtype=np.int8),
            "parent": np.full(cap, -1, dtype=np.int32),
            "first_child": np.full(cap, -1, dtype=np.int32),
            "n_children": np.zeros(cap, dtype=np.int16),
            "move": np.full(cap, -1, dtype=np.int16),
            "depth": np.zeros(cap, dtype=np.int32),
            "m_phi": np.zeros(cap, dtype=np.float64),
            "s_log": np.zeros(cap, dtype=np.float64),
            "r_phi": np.zeros(cap, dtype=np.float64),
            "u_phi": np.zeros(cap, dtype=np.float64),
            "u_log": np.zeros(cap, dtype=np.float64),
            "z_log": np.zeros(cap, dtype=np.float64),
        }
        self._bind(arrs, cap)

    cdef void _bind(self, dict arrs, long long cap) except *:
        self._arrs = arrs
        self.cap = cap
        self.status = arrs["status"]
        self.parent = arrs["parent"]
        self.first_child = arrs["first_child"]
        self.n_children = arrs["n_children"]
        self.move = arrs["move"]
        self.depth = arrs["depth"]
        self.m_phi = arrs["m_phi"]
        self.s_log = arrs["s_log"]
        self.r_phi = arrs["r_phi"]
        self.u_phi = arrs["u_phi"]
        self.u_log = arrs["u_log"]
        self.z_log = arrs["z_log"]

    cdef void _grow(self, long long need) except *:
        cdef long long cap = self.cap
        while cap < need:
            cap *= 2
        arrs = {}
        for name, arr in self._arrs.items():
            grown = np.empty(cap, dtype=arr.dtype)
            if name in ("parent", "first_child", "move"):
                grown.fill(-1)
            grown[: self.used] = arr[: self.used]
            arrs[name] = grown
        self._bind(arrs, cap)

    cdef long long _new_node(self, int parent, int move, int depth) except -1:
        if self.used + 1 > self.cap:
            self._grow(self.used + 1)
        cdef long long i = self.used
        self.used += 1
        self.nodes_created += 1
        self.status[i] = ST_FRONTIER
        self.parent[i] = parent
        self.first_child[i] = -1
        self.n_children[i] = 0
        self.move[i] = move
        self.depth[i] = depth
        return i

    # -- priors ---------------------------------------------------------------

    cdef void _assign_root_prior(self, long long node) except *:
        cdef int k = self.depth[node]
        cdef double m, s
        if self.prior_kind == PRIOR_SYM:
            m = self.root_m_phi
            s = self.root_s_log
        elif self.prior_kind == PRIOR_TABLE:
            if k > self.tab_max_depth:
                raise KeyError("prior tables have no entry at this depth")
            m = self.tab_m[k]
            if self.flip:
                m = -m
            s = self.tab_s[k]
        else:
            m = 0.0
            s = 0.0
        self.m_phi[node] = m
        self.s_log[node] = s
        self.r_phi[node] = m
        self.u_phi[node] = INF
        self.u_log[node] = 0.0
        self.z_log[node] = s

    cdef void _assign_child_prior(self, long long child, long long par, int d) except *:
        cdef int k = self.depth[child]
        cdef int parent_max, dd
        cdef double m, s, g
        if self.prior_kind == PRIOR_SYM:
            parent_max = 1 if ((self.depth[par] - self.game.root_depth) % 2 == 0) else 0
            if parent_max:
                m = -phi_pow_root(-self.m_phi[par], d)
                g = log_from_phi(-self.m_phi[par])
            else:
                m = phi_pow_root(self.m_phi[par], d)
                g = log_from_phi(self.m_phi[par])
            if d == 1:
                s = self.s_log[par]
            elif self.sym_pc:
                s = -2.0 * (d - 1) / <double>d * g + self.s_log[par]
            elif self.sym_b == 0.0:
                s = self.s_log[par]
            else:
                s = self.sym_b * (d - 1) * g + self.s_log[par]
        elif self.prior_kind == PRIOR_TABLE:
            if k > self.tab_max_depth:
                raise KeyError("prior tables have no entry at this depth")
            m = self.tab_m[k]
            if self.flip:
                m = -m
            s = self.tab_s[k]
        else:
            if k > self.tab_max_depth:
                raise KeyError("prior tables have no entry at this depth")
            dd = d if d <= self.tab2_max_litter else self.tab2_max_litter
            if not self.tab2_seen[k, dd]:
                self.unseen_litter_queries += 1
            m = self.tab2_m[k, dd]
            if self.flip:
                m = -m
            s = self.tab2_s[k, dd]
        self.m_phi[child] = m
        self.s_log[child] = s
        self.r_phi[child] = m
        self.u_phi[child] = INF
        self.u_log[child] = 0.0
        self.z_log[child] = s

    # -- rng -------------------------------------------------------------------

    cdef inline unsigned long long _next_u64(self):
        self.rng_state += GOLDEN
        return mix64(self.rng_state)

    cdef inline int _below(self, int n):
        return <int>(self._next_u64() % <unsigned long long>n)

    # -- core updates ------------------------------------------------------------

    cdef void _refresh(self, long long p) except *:
        cdef int d = self.n_children[p]
        cdef long long fc = self.first_child[p]
        cdef int tm = 1 if ((self.depth[p] - self.game.root_depth) % 2 == 0) else 0
        cdef double vals[MAXD]
        cdef double pre[MAXD + 1]
        cdef double suf[MAXD + 1]
        cdef double r, z, u, sc
        cdef int i
        cdef long long c
        for i in range(d):
            c = fc + i
            vals[i] = -self.r_phi[c] if tm else self.r_phi[c]
        pre[0] = INF
        for i in range(d):
            pre[i + 1] = phi_mul(pre[i], vals[i])
        suf[d] = INF
        for i in range(d - 1, -1, -1):
            suf[i] = phi_mul(vals[i], suf[i + 1])
        r = -pre[d] if tm else pre[d]
        z = NEG_INF
        for i in range(d):
            c = fc + i
            u = phi_mul(pre[i], suf[i + 1])
            if u != self.u_phi[c]:
                self.u_phi[c] = u
                self.u_log[c] = log_from_phi(u)
            sc = 2.0 * self.u_log[c] + self.z_log[c]
            if sc > z:
                z = sc
        self.r_phi[p] = r
        self.z_log[p] = z

    cdef int _argmax_scores(self, double* scores, int d) except -1:
        cdef double best = NEG_INF
        cdef int ties[MAXD]
        cdef int i, n = 0
        for i in range(d):
            if scores[i] > best:
                best = scores[i]
        for i in range(d):
            if scores[i] >= best - TIE_TOL:
                ties[n] = i
                n += 1
        if n == 1:
            return ties[0]
        return ties[self._below(n)]

    cdef long long _select(self) except -1:
        """Descend on U^2 Z; leaves the walk at the returned node."""
        cdef long long node = 0
        cdef long long fc, c
        cdef int d, i, pick
        cdef double scores[MAXD]
        self.game.reset_walk()
        while self.status[node] == ST_INTERNAL:
            d = self.n_children[node]
            fc = self.first_child[node]
            for i in range(d):
                c = fc + i
                scores[i] = 2.0 * self.u_log[c] + self.z_log[c]
            pick = self._argmax_scores(scores, d)
            node = fc + pick
            self.game.walk_apply(self.move[node])
        if self.status[node] == ST_LEAF:
            raise RuntimeError("descent reached a visited leaf; state corrupt")
        return node

    cdef void _playout_from(self, long long z) except *:
        cdef CGame game = self.game
        cdef long long node = z
        cdef long long fc, child, walkup, x
        cdef int d, i, label, value
        cdef double before_r = self.r_phi[0]
        cdef double before_z = self.z_log[0]
        cdef int fresh = 1 if self.used <= 1 else 0

        while not game.wterm:
            d = game.wnmoves
            if self.used + d > self.cap:
                self._grow(self.used + d)
            fc = self.used
            for i in range(d):
                label = game.walk_label(i)
                child = self._new_node(<int>node, label, game.wdepth + 1)
                self._assign_child_prior(child, node, d)
            self.first_child[node] = <int>fc
            self.n_children[node] = <short>d
            self.status[node] = ST_INTERNAL
            i = self._below(d) if d > 1 else 0
            node = fc + i
            game.walk_apply(self.move[node])

        value = game.wvalue
        if self.flip:
            value = 1 - value
        self.status[node] = ST_LEAF
        self.r_phi[node] = INF if value else NEG_INF
        self.z_log[node] = NEG_INF
        self.iterations += 1
        if self.leaf_paths_ is not None:
            # path from the true game start: root prefix + branch labels
            rev = []
            walkup = node
            while walkup != 0:
                rev.append(self.move[walkup])
                walkup = self.parent[walkup]
            self.leaf_paths_.append(tuple(list(self.root_path) + rev[::-1]))

        x = node
        while x != 0:
            x = self.parent[x]
            self._refresh(x)
        self.terminated = 1 if isinf(self.r_phi[0]) else 0
        if self.traj is not None:
            self.traj.append(self.r_phi[0])
        if (not self.terminated) and (not fresh) and self.r_phi[0] == before_r and self.z_log[0] == before_z:
            self.frozen_iterations += 1

    # -- public API --------------------------------------------------------------

    def run(self, long long budget):
        cdef long long done = 0
        while done < budget and not self.terminated:
            self._playout_from(self._select())
            done += 1
        return done

    def best_move(self):
        cdef long long fc = self.first_child[0]
        cdef int d = self.n_children[0]
        cdef double scores[MAXD]
        cdef int i
        if d == 0:
            raise RuntimeError("root has no explored children")
        for i in range(d):
            scores[i] = self.r_phi[fc + i]
        return self.move[fc + self._argmax_scores(scores, d)]

    def root_value(self):
        return phi_inv(self.r_phi[0])

    def root_value_phi(self):
        return self.r_phi[0]

    def r_trajectory(self):
        if self.traj is None:
            return None
        return [phi_inv(x) for x in self.traj]

    def leaf_paths(self):
        return self.leaf_paths_

    def node_count(self):
        return self.used

    def advance(self, int label):
        """Reroot to the child reached by ``label``; returns iterations spent."""
        cdef long long fc = self.first_child[0]
        cdef int d = self.n_children[0]
        cdef long long new_root = -1
        cdef int i
        for i in range(d):
            if self.move[fc + i] == label:
                new_root = fc + i
                break
        if new_root < 0:
            raise ValueError("unknown move at the search root")
        self.flip = 1 - self.flip
        self.game.advance_root(label)
        self.root_path.append(label)
        self._repack(new_root)
        if self.status[0] == ST_FRONTIER:
            self.terminated = 0
            self.game.reset_walk()
            self._playout_from(0)
            return 1
        if self.status[0] == ST_LEAF:
            self.terminated = 1
            return 0
        self._refresh(0)
        self.terminated = 1 if isinf(self.r_phi[0]) else 0
        return 0

    cdef void _repack(self, long long new_root) except *:
        """Copy the subtree below ``new_root`` into fresh arrays, flipping
        the orientation of R and m (U, Z, s are invariant)."""
        old = self._arrs
        cdef signed char[::1] o_status = old["status"]
        cdef int[::1] o_parent = old["parent"]
        cdef int[::1] o_first = old["first_child"]
        cdef short[::1] o_nch = old["n_children"]
        cdef short[::1] o_move = old["move"]
        cdef int[::1] o_depth = old["depth"]
        cdef double[::1] o_m = old["m_phi"]
        cdef double[::1] o_s = old["s_log"]
        cdef double[::1] o_r = old["r_phi"]
        cdef double[::1] o_u = old["u_phi"]
        cdef double[::1] o_ul = old["u_log"]
        cdef double[::1] o_z = old["z_log"]

        self._alloc(max(4096, self.cap))
        cdef long long used_old = self.used
        self.used = 0

        # BFS keeps each litter contiguous
        cdef long long[::1] queue = np.empty(used_old, dtype=np.int64)
        cdef long long qh = 0, qt = 0
        cdef long long me, src, fc_old, fc_new
        cdef int d, i

        me = self._new_node(-1, -1, o_depth[new_root])
        self.status[me] = o_status[new_root]
        self.m_phi[me] = -o_m[new_root]
        self.s_log[me] = o_s[new_root]
        self.r_phi[me] = -o_r[new_root]
        self.u_phi[me] = INF
        self.u_log[me] = 0.0
        self.z_log[me] = o_z[new_root]
        self.nodes_created -= 1  # repack copies are not new nodes
        queue[qt] = new_root
        qt += 1
        cdef long long[::1] newidx = np.full(used_old, -1, dtype=np.int64)
        newidx[new_root] = 0

        while qh < qt:
            src = queue[qh]
            qh += 1
            me = newidx[src]
            d = o_nch[src]
            if d == 0:
                continue
            fc_old = o_first[src]
            if self.used + d > self.cap:
                self._grow(self.used + d)
            fc_new = self.used
            for i in range(d):
                self._new_node(<int>me, o_move[fc_old + i], o_depth[fc_old + i])
                self.nodes_created -= 1
            self.first_child[me] = <int>fc_new
            self.n_children[me] = <short>d
            for i in range(d):
                self.status[fc_new + i] = o_status[fc_old + i]
                self.m_phi[fc_new + i] = -o_m[fc_old + i]
                self.s_log[fc_new + i] = o_s[fc_old + i]
                self.r_phi[fc_new + i] = -o_r[fc_old + i]
                self.u_phi[fc_new + i] = o_u[fc_old + i]
                self.u_log[fc_new + i] = o_ul[fc_old + i]
                self.z_log[fc_new + i] = o_z[fc_old + i]
                newidx[fc_old + i] = fc_new + i
                queue[qt] = fc_old + i
                qt += 1


cdef class MctsCore:
    cdef CGame game
    cdef double a, b
    cdef int modified
    cdef unsigned long long rng_state
    cdef int flip
    cdef public long long iterations
    cdef public long long nodes_created
    cdef public int terminated  # always 0; kept for interface parity

    cdef long long cap, used
    cdef object _arrs
    cdef signed char[::1] status
    cdef int[::1] parent
    cdef int[::1] first_child
    cdef short[::1] n_children
    cdef short[::1] move
    cdef int[::1] depth
    cdef long long[::1] C
    cdef long long[::1] W

    def __init__(self, CGame game, double a, double b, int modified, unsigned long long seed):
        if a <= 0 or b <= 0:
            raise ValueError("selection constants a, b must be positive")
        self.game = game
        self.a = a
        self.b = b
        self.modified = modified
        self.rng_state = seed
        self.flip = 0
        self.iterations = 0
        self.terminated = 0
        self._alloc(4096)
        self.used = 0
        self.nodes_created = 0
        self.game.reset_walk()
        cdef long long root = self._new_node(-1, -1, self.game.wdepth)
        if self.game.wterm:
            self.status[root] = ST_LEAF
            self.iterations += 1
        else:
            self._expand_and_rollout(root)
            self.iterations += 1

    cdef void _alloc(self, long long cap) except *:
        arrs = {
            "status": np.zeros(cap, dtype=np.int8),
            "parent": np.full(cap, -1, dtype=np.int32),
            "first_child": np.full(cap, -1, dtype=np.int32),
            "n_children": np.zeros(cap, dtype=np.int16),
            "move": np.full(cap, -1, dtype=np.int16),
            "depth": np.zeros(cap, dtype=np.int32),
            "C": np.zeros(cap, dtype=np.int64),
            "W": np.zeros(cap, dtype=np.int64),
        }
        self._bind(arrs, cap)

    cdef void _bind(self, dict arrs, long long cap) except *:
        self._arrs = arrs
        self.cap = cap
        self.status = arrs["status"]
        self.parent = arrs["parent"]
        self.first_child = arrs["first_child"]
        self.n_children = arrs["n_children"]
        self.move = arrs["move"]
        self.depth = arrs["depth"]
        self.C = arrs["C"]
        self.W = arrs["W"]

    cdef void _grow(self, long long need) except *:
        cdef long long cap = self.cap
        while cap < need:
            cap *= 2
        arrs = {}
        for name, arr in self._arrs.items():
            grown = np.empty(cap, dtype=arr.dtype)
            if name in ("parent", "first_child", "move"):
                grown.fill(-1)
            grown[: self.used] = arr[: self.used]
            arrs[name] = grown
        self._bind(arrs, cap)

    cdef long long _new_node(self, int parent, int move, int depth) except -1:
        if self.used + 1 > self.cap:
            self._grow(self.used + 1)
        cdef long long i = self.used
        self.used += 1
        self.nodes_created += 1
        self.status[i] = ST_FRONTIER
        self.parent[i] = parent
        self.first_child[i] = -1
        self.n_children[i] = 0
        self.move[i] = move
        self.depth[i] = depth
        self.C[i] = 0
        self.W[i] = 0
        return i

    cdef inline unsigned long long _next_u64(self):
        self.rng_state += GOLDEN
        return mix64(self.rng_state)

    cdef inline int _below(self, int n):
        return <int>(self._next_u64() % <unsigned long long>n)

    cdef inline double _phi(self, long long node, int parent_max):
        cdef double v
        if parent_max:
            v = <double>self.W[node]
        else:
            v = <double>(self.C[node] - self.W[node])
        return (v + self.a) / (<double>self.C[node] + self.b)

    cdef int _pick(self, long long fc, int d, int parent_max) except -1:
        cdef double scores[MAXD]
        cdef double best = NEG_INF
        cdef int ties[MAXD]
        cdef int i, n = 0
        for i in range(d):
            scores[i] = self._phi(fc + i, parent_max)
            if scores[i] > best:
                best = scores[i]
        for i in range(d):
            if scores[i] >= best - TIE_TOL:
                ties[n] = i
                n += 1
        if n == 1:
            return ties[0]
        return ties[self._below(n)]

    cdef void _bump(self, long long node, int value) noexcept:
        while node >= 0:
            self.C[node] += 1
            self.W[node] += value
            node = self.parent[node]

    cdef void _materialize(self, long long node) except *:
        cdef CGame game = self.game
        cdef int d = game.wnmoves
        cdef int i, label
        if self.used + d > self.cap:
            self._grow(self.used + d)
        cdef long long fc = self.used
        for i in range(d):
            label = game.walk_label(i)
            self._new_node(<int>node, label, game.wdepth + 1)
        self.first_child[node] = <int>fc
        self.n_children[node] = <short>d
        self.status[node] = ST_INTERNAL

    cdef void _expand_and_rollout(self, long long node) except *:
        """Growth below a non-terminal tree leaf; the walk must be at it."""
        cdef CGame game = self.game
        cdef long long fc, child
        cdef int i, value
        if self.modified:
            while not game.wterm:
                self._materialize(node)
                i = self._below(game.wnmoves) if game.wnmoves > 1 else 0
                node = self.first_child[node] + i
                game.walk_apply(self.move[node])
            self.status[node] = ST_LEAF
            value = game.wvalue
            if self.flip:
                value = 1 - value
            self._bump(node, value)
        else:
            self._materialize(node)
            i = self._below(game.wnmoves) if game.wnmoves > 1 else 0
            child = self.first_child[node] + i
            game.walk_apply(self.move[child])
            while not game.wterm:
                i = self._below(game.wnmoves) if game.wnmoves > 1 else 0
                game.walk_apply(game.walk_label(i))
            value = game.wvalue
            if self.flip:
                value = 1 - value
            self._bump(child, value)

    cdef void _iterate(self) except *:
        cdef CGame game = self.game
        cdef long long node = 0
        cdef int d, pick, value
        if self.status[0] == ST_LEAF:
            self.iterations += 1
            return
        game.reset_walk()
        while self.status[node] == ST_INTERNAL:
            d = self.n_children[node]
            pick = self._pick(self.first_child[node], d,
                              1 if ((self.depth[node] - game.root_depth) % 2 == 0) else 0)
            node = self.first_child[node] + pick
            game.walk_apply(self.move[node])
        if self.status[node] == ST_LEAF or game.wterm:
            self.status[node] = ST_LEAF
            value = game.wvalue
            if self.flip:
                value = 1 - value
            self._bump(node, value)
        else:
            self._expand_and_rollout(node)
        self.iterations += 1

    def run(self, long long budget):
        cdef long long done = 0
        while done < budget:
            self._iterate()
            done += 1
        return done

    def best_move(self):
        cdef int d = self.n_children[0]
        if d == 0:
            raise RuntimeError("root has no explored children")
        return self.move[self.first_child[0] + self._pick(self.first_child[0], d, 1)]

    def node_count(self):
        return self.used

    def advance(self, int label):
        cdef long long fc = self.first_child[0]
        cdef int d = self.n_children[0]
        cdef long long new_root = -1
        cdef int i
        for i in range(d):
            if self.move[fc + i] == label:
                new_root = fc + i
                break
        if new_root < 0:
            raise ValueError("unknown move at the search root")
        self.flip = 1 - self.flip
        self.game.advance_root(label)
        self._repack(new_root)
        if self.status[0] == ST_FRONTIER:
            self.game.reset_walk()
            if self.game.wterm:
                self.status[0] = ST_LEAF
                return 0
            self._expand_and_rollout(0)
            self.iterations += 1
            return 1
        return 0

    cdef void _repack(self, long long new_root) except *:
        old = self._arrs
        cdef signed char[::1] o_status = old["status"]
        cdef int[::1] o_first = old["first_child"]
        cdef short[::1] o_nch = old["n_children"]
        cdef short[::1] o_move = old["move"]
        cdef int[::1] o_depth = old["depth"]
        cdef long long[::1] o_C = old["C"]
        cdef long long[::1] o_W = old["W"]

        self._alloc(max(4096, self.cap))
        cdef long long used_old = self.used
        self.used = 0

        cdef long long[::1] queue = np.empty(used_old, dtype=np.int64)
        cdef long long[::1] newidx = np.full(used_old, -1, dtype=np.int64)
        cdef long long qh = 0, qt = 0
        cdef long long me, src, fc_old, fc_new
        cdef int d, i

        me = self._new_node(-1, -1, o_depth[new_root])
        self.nodes_created -= 1
        self.status[me] = o_status[new_root]
        self.C[me] = o_C[new_root]
        self.W[me] = o_C[new_root] - o_W[new_root]
        queue[qt] = new_root
        qt += 1
        newidx[new_root] = 0

        while qh < qt:
            src = queue[qh]
            qh += 1
            me = newidx[src]
            d = o_nch[src]
            if d == 0:
                continue
            fc_old = o_first[src]
            if self.used + d > self.cap:
                self._grow(self.used + d)
            fc_new = self.used
            for i in range(d):
                self._new_node(<int>me, o_move[fc_old + i], o_depth[fc_old + i])
                self.nodes_created -= 1
            self.first_child[me] = <int>fc_new
            self.n_children[me] = <short>d
            for i in range(d):
                self.status[fc_new + i] = o_status[fc_old + i]
                self.C[fc_new + i] = o_C[fc_old + i]
                self.W[fc_new + i] = o_C[fc_old + i] - o_W[fc_old + i]
                newidx[fc_old + i] = fc_new + i
                queue[qt] = fc_old + i
                qt += 1


# ---------------------------------------------------------------------------
# python-facing factory helpers


def supports(game_kind, engine_kind, family=None):
    if game_kind not in ("pearl", "gw", "c4"):
        return False
    if engine_kind in ("mcts", "mctsinf"):
        return True
    if engine_kind == "boss":
        return family in ("sym", "gw", "gw2", "pearl-exact")
    return False


def _build_game(game, realization_seed):
    kind = game.kind
    if kind == "pearl":
        cfg = game.params["cfg"]
        seed = cfg.seed if realization_seed is None else realization_seed
        return CGame.pearl(cfg.d, cfg.K, cfg.p, seed & ((1 << 64) - 1))
    if kind == "gw":
        model = game.params["model"]
        seed = model.seed if realization_seed is None else realization_seed
        laws = [list(law) for law in model.mu]
        return CGame.gw(model.K, laws, list(model.q), seed & ((1 << 64) - 1))
    cfg = game.params["cfg"]
    from .game_core import Player

    draw_to = 1 if cfg.draw_policy.map_draw_to is Player.J1 else 0
    return CGame.c4(cfg.columns, cfg.rows, cfg.connect, 1 if cfg.inverse else 0, draw_to)


def _phi_of(m):
    if m <= 0.0:
        return float("-inf")
    if m >= 1.0:
        return float("inf")
    return math.log(m) - math.log1p(-m)


def _tables_to_arrays(tables):
    K = tables.max_depth
    m = np.empty(K + 1, dtype=np.float64)
    s = np.empty(K + 1, dtype=np.float64)
    for k in range(K + 1):
        mv, sv = tables.m[k], tables.s[k]
        m[k] = _phi_of(mv)
        s[k] = math.log(sv) if sv > 0.0 else float("-inf")
    return {"m_phi": m, "s_log": s}


def _tables2_to_arrays(tables):
    K = tables.max_depth
    dmax = max(d for (_, d) in tables.m)
    m = np.zeros((K + 1, dmax + 1), dtype=np.float64)
    s = np.zeros((K + 1, dmax + 1), dtype=np.float64)
    seen = np.zeros((K + 1, dmax + 1), dtype=np.int8)
    for k in range(K + 1):
        ds = sorted(d for (kk, d) in tables.m if kk == k)
        for d in range(dmax + 1):
            if not ds:
                continue
            # same nearest-observed rule as the pure tables
            best = min(ds, key=lambda x: (abs(x - d), x))
            mv, sv = tables.m[(k, best)], tables.s[(k, best)]
            m[k, d] = _phi_of(mv)
            s[k, d] = math.log(sv) if sv > 0.0 else float("-inf")
            seen[k, d] = 1 if d in ds else 0
    return {"m_phi": m, "s_log": s, "seen": seen}


def make_boss(game, realization_seed, params, seed, record_trajectory=False):
    cgame = _build_game(game, realization_seed)
    family = params["family"]
    if family == "sym":
        data = {
            "b": params["b"],
            "pearl_consistent": params.get("pearl_consistent", False),
            "m_phi": _phi_of(params["a"]),
        }
        return BossCore(cgame, PRIOR_SYM, data, seed & ((1 << 64) - 1), 1 if record_trajectory else 0)
    if family == "gw":
        return BossCore(
            cgame, PRIOR_TABLE, _tables_to_arrays(params["tables"]), seed & ((1 << 64) - 1),
            1 if record_trajectory else 0,
        )
    if family == "gw2":
        return BossCore(
            cgame, PRIOR_TABLE2, _tables2_to_arrays(params["tables"]), seed & ((1 << 64) - 1),
            1 if record_trajectory else 0,
        )
    raise ValueError(f"unsupported boss family {family!r}")


def make_mcts(game, realization_seed, a, b, modified, seed):
    cgame = _build_game(game, realization_seed)
    return MctsCore(cgame, a, b, 1 if modified else 0, seed & ((1 << 64) - 1))
