"""Placing paragraph boxes on a skeleton derivation.

Once every implication is fixed, what remains is to decide where the ``§``
boxes go.  The search assigns a *level* to every node of the term tree: the
root sits at level 0, and the difference between a child's level and its
parent's says how many boxes are opened (positive) or closed (negative) on
that edge.  A negative difference leaves a hole: the subterm below is typed
outside the boxes and enters them through ``§``-eliminations.

Levels determine the number of paragraphs at every type position only up to
linear equations, one per rule.  Those equations are solved incrementally
with a union-find structure that keeps integer offsets between members and
can be rolled back when the search backtracks.  A position whose class is
anchored to a constant (the top of every function type is 0) must stay
non-negative; every other class takes its smallest non-negative solution.

A complete level assignment is turned into a derivation script that the
NDLAL checker re-validates, so a bug in the search can only lose solutions,
never produce a wrong one.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Optional

from .. import derivation as D
from .. import terms as T
from ..formulas import Imp, Lin, Par, TVar, Type, pars, strip_pars
from ..syntax import fresh_name
from .bang import BangDeriv


class SearchBudgetExceeded(RuntimeError):
    pass


class OffsetUnionFind:
    """Classes of integer unknowns with known differences: ``val(x) = val(y) + k``.

    No path compression, so every union can be undone in O(1).
    """

    def __init__(self):
        self.parent: list = []
        self.off: list = []  # val(x) = val(parent[x]) + off[x]
        self.size: list = []
        self.minoff: list = []  # per root: least offset of a member relative to the root
        self.log: list = []
        self.zero = self.new()

    def new(self) -> int:
        i = len(self.parent)
        self.parent.append(i)
        self.off.append(0)
        self.size.append(1)
        self.minoff.append(0)
        return i

    def find(self, x: int):
        k = 0
        while self.parent[x] != x:
            k += self.off[x]
            x = self.parent[x]
        return x, k

    def union(self, x: int, y: int, k: int) -> bool:
        """Record ``val(x) = val(y) + k``; False (and no change) on a contradiction."""
        rx, ox = self.find(x)
        ry, oy = self.find(y)
        if rx == ry:
            return ox == oy + k
        d = oy + k - ox  # val(rx) = val(ry) + d
        if self.size[rx] > self.size[ry]:
            rx, ry, d = ry, rx, -d
        # attach rx below ry
        self.log.append((rx, ry, self.minoff[ry]))
        self.parent[rx] = ry
        self.off[rx] = d
        self.size[ry] += self.size[rx]
        self.minoff[ry] = min(self.minoff[ry], self.minoff[rx] + d)
        rz, oz = self.find(self.zero)
        if rz == ry and self.minoff[ry] < oz:
            self.undo(len(self.log) - 1)
            return False
        return True

    def mark(self) -> int:
        return len(self.log)

    def undo(self, mark: int):
        while len(self.log) > mark:
            rx, ry, old = self.log.pop()
            self.parent[rx] = rx
            self.off[rx] = 0
            self.size[ry] -= self.size[rx]
            self.minoff[ry] = old

    def value(self, x: int) -> int:
        r, k = self.find(x)
        rz, oz = self.find(self.zero)
        base = -oz if r == rz else -self.minoff[r]
        return base + k


class _Pos:
    """A type position: atom or implication, with an unknown number of paragraphs on top."""

    __slots__ = ("uid", "kind", "atom", "arg", "res")

    def __init__(self, uid, kind, atom=None, arg=None, res=None):
        self.uid, self.kind, self.atom, self.arg, self.res = uid, kind, atom, arg, res


@dataclass
class Frame:
    kind: str  # '!' for the argument of a non-linear application, '§' otherwise
    doors: list = field(default_factory=list)  # (inner name, scrutinee derivation)
    nonlinear: list = field(default_factory=list)


class ConstructionError(RuntimeError):
    pass


@dataclass
class Placement:
    """One successful level assignment and the derivation built from it."""

    levels: dict  # node id -> level
    script: D.Deriv
    type: Type
    judgement: D.Judgement
    boxes: dict  # path of each non-linear application -> boxes around its argument


class ParagraphSearch:
    def __init__(self, bd: BangDeriv, level_cap: int = 8, budget: int = 200_000, expected: Optional[Type] = None):
        self.bd = bd
        self.table = bd.table
        self.nodes = self.table.nodes
        self.level_cap = level_cap
        self.budget = budget
        self.steps = 0
        self.truncated = False
        self.uf = OffsetUnionFind()
        self.pos = {n.id: self._alloc(bd.skeletons[n.id]) for n in self.nodes}
        self.bpos = {k: self._alloc(s) for k, s in bd.binder_skeletons.items()}
        self.ok = self._static_equations()
        if self.ok and expected is not None:
            self.ok = self._pin(self.pos[0], expected)
        self._prepare_scope()

    # -- positions and static equations ------------------------------------

    def _alloc(self, skel: Type) -> _Pos:
        uid = self.uf.new()
        if isinstance(skel, TVar):
            return _Pos(uid, "atom", atom=skel.name)
        kind = "imp" if isinstance(skel, Imp) else "lin"
        return _Pos(uid, kind, arg=self._alloc(skel.arg), res=self._alloc(skel.res))

    def _link_children(self, p: _Pos, q: _Pos) -> bool:
        if p.kind != q.kind or p.atom != q.atom:
            return False
        if p.kind == "atom":
            return True
        return self._link(p.arg, q.arg) and self._link(p.res, q.res)

    def _link(self, p: _Pos, q: _Pos) -> bool:
        return self.uf.union(p.uid, q.uid, 0) and self._link_children(p, q)

    def _static_equations(self) -> bool:
        uf = self.uf
        for n in self.nodes:
            here = self.pos[n.id]
            if n.kind == "abs":
                b = n.children[0]
                if not uf.union(here.uid, uf.zero, 0):
                    return False
                if not self._link(here.arg, self.bpos[n.id]):
                    return False
                if not self._link_children(here.res, self.pos[b]):
                    return False
            elif n.kind == "app":
                f, a = n.children
                fpos = self.pos[f]
                if fpos.kind == "atom":
                    return False
                if not self._link(fpos.res, here):
                    return False
                if not self._link_children(fpos.arg, self.pos[a]):
                    return False
            else:
                if not self._link_children(self.bpos[self.bd.binder_key(n.id)], here):
                    return False
        return True

    def _pin(self, p: _Pos, a: Type) -> bool:
        """Fix the paragraph counts of the root type to those of ``a``."""
        k, body = strip_pars(a)
        if not self.uf.union(p.uid, self.uf.zero, k):
            return False
        if p.kind == "atom":
            return isinstance(body, TVar) and body.name == p.atom
        if not isinstance(body, Imp if p.kind == "imp" else Lin):
            return False
        return self._pin(p.arg, body.arg) and self._pin(p.res, body.res)

    # -- search -------------------------------------------------------------

    def _prepare_scope(self):
        self.scope = {n.id: set() for n in self.nodes}
        for n in self.nodes:
            if n.kind == "var" and n.binder is not None:
                j = n.id
                while j != n.binder:
                    self.scope[j].add(n.binder)
                    j = self.nodes[j].parent
        self.order = self._preorder()

    def _preorder(self):
        out, stack = [], [0]
        while stack:
            i = stack.pop()
            out.append(i)
            stack.extend(reversed(self.nodes[i].children))
        return out

    def _binder_level(self, key, levels) -> int:
        return 0 if isinstance(key, str) else levels[key]

    def _candidates(self, c: int, lp: int, floor: int, budget: int):
        n = self.nodes[c]
        parent = self.nodes[n.parent]
        bang = n.edge == T.ARG and parent.id in self.bd.bang_apps
        cap = self.level_cap
        if n.edge == T.FUN:
            if n.kind != "app":
                shifts = [0]
            else:
                shifts = [-k for k in range(0, lp - floor + 1)]
            return [(s, 0) for s in shifts if floor <= lp + s <= cap]
        if bang:
            if n.kind == "var":
                shifts = [1]
            else:
                shifts = range(1, budget + 2)
            return [(s, s - 1) for s in shifts if floor <= lp + s <= cap and s - 1 <= budget]
        if n.kind == "var":
            nonlinear = self.bd.binder_key(c) in self.bd.nonlinear
            shifts = [0, 1] if nonlinear else [0]
        elif n.kind == "abs":
            shifts = range(0, budget + 1)
        else:
            shifts = list(range(0, budget + 1))
            if n.edge == T.ARG or not parent.occurrences:
                shifts += [-k for k in range(1, lp - floor + 1)]
        return [(s, max(s, 0)) for s in shifts if floor <= lp + s <= cap and max(s, 0) <= budget]

    def _edge_equation(self, c: int, s: int) -> bool:
        n = self.nodes[c]
        p = self.nodes[n.parent]
        uf = self.uf
        if p.kind == "abs":
            return uf.union(self.pos[p.id].res.uid, self.pos[c].uid, s)
        if n.edge == T.FUN:
            return uf.union(self.pos[c].uid, uf.zero, -s)
        fpos = self.pos[p.children[0]]
        k = s - 1 if p.id in self.bd.bang_apps else s
        return uf.union(fpos.arg.uid, self.pos[c].uid, k)

    def _node_checks(self, c: int, levels: dict) -> bool:
        n = self.nodes[c]
        bd = self.bd
        if n.kind == "var":
            key = bd.binder_key(c)
            lv = self._binder_level(key, levels)
            nonlinear = key in bd.nonlinear
            gap = levels[c] - lv
            if nonlinear and gap < 1:
                return False
            return self.uf.union(self.bpos[key].uid, self.pos[c].uid, gap - (1 if nonlinear else 0))
        if n.kind == "app" and c in bd.bang_apps:
            o = bd.bang_arg_occurrence.get(c)
            if o is not None and self._binder_level(bd.binder_key(o), levels) != levels[c]:
                return False
        return True

    def level_assignments(self, boxes: int) -> Iterator[dict]:
        """Level assignments using exactly ``boxes`` optional boxes.

        The union-find state matches the yielded assignment until the
        generator is resumed, so callers read types (or build the script)
        before asking for the next one.  Stops quietly, setting
        ``truncated``, once the step budget is spent.
        """
        if not self.ok or self.truncated:
            return
        try:
            yield from self._dfs(self.order, 1, {0: 0}, {0: 0}, boxes)
        except SearchBudgetExceeded:
            return

    def judgement_key(self) -> tuple:
        """The conclusion the current assignment will produce: type and free-variable entries."""
        entries = []
        for name in sorted(self.table.free):
            zone = "G" if name in self.bd.nonlinear else "D"
            entries.append((name, zone, self.type_at(self.bpos[name])))
        return (self.type_at(self.pos[0]), tuple(entries))

    def _dfs(self, order, idx, levels, bang_floor, budget):
        if idx == len(order):
            if budget == 0:
                yield dict(levels)
            return
        self.steps += 1
        if self.steps > self.budget:
            self.truncated = True
            raise SearchBudgetExceeded
        c = order[idx]
        n = self.nodes[c]
        lp = levels[n.parent]
        bf = bang_floor[n.parent]
        if n.edge == T.ARG and n.parent in self.bd.bang_apps:
            bf = max(bf, lp + 1)
        floor = max([bf] + [levels[v] for v in self.scope[c]])
        for s, cost in self._candidates(c, lp, floor, budget):
            mark = self.uf.mark()
            levels[c] = lp + s
            bang_floor[c] = bf
            if self._edge_equation(c, s) and self._node_checks(c, levels):
                yield from self._dfs(order, idx + 1, levels, bang_floor, budget - cost)
            self.uf.undo(mark)
            del levels[c]
            del bang_floor[c]

    # -- derivation construction ---------------------------------------------

    def type_at(self, p: _Pos) -> Type:
        if p.kind == "atom":
            base = TVar(p.atom)
        else:
            ctor = Imp if p.kind == "imp" else Lin
            base = ctor(self.type_at(p.arg), self.type_at(p.res))
        return pars(base, self.uf.value(p.uid))

    def build(self, levels: dict) -> D.Deriv:
        return _Builder(self, levels).run()


class _Builder:
    def __init__(self, search: ParagraphSearch, levels: dict):
        self.s = search
        self.levels = levels
        self.nodes = search.nodes
        self.bd = search.bd
        self.avoid = set(T.bound_names(search.table.term)) | set(search.table.term.fv)
        self.avoid |= {n.occ for n in self.nodes if n.kind == "var"}
        self.stack_len: dict = {}

    def fresh(self, base: str) -> str:
        name = fresh_name(base + "_1", self.avoid)
        self.avoid.add(name)
        return name

    def sigma(self, i: int) -> Type:
        return self.s.type_at(self.s.pos[i])

    def run(self) -> D.Deriv:
        d = self.node(0, [])
        for name in sorted(self.s.table.free):
            occ = self.s.table.free[name]
            if len(occ) > 1:
                d = D.cntr_all(d, [self.nodes[o].occ for o in occ], name)
        return d

    def node(self, i: int, stack: list) -> D.Deriv:
        n = self.nodes[i]
        if n.kind == "var":
            return self.var(n, stack)
        if n.kind == "app":
            f, a = n.children
            df = self.edge(i, f, stack)
            da = self.edge(i, a, stack)
            return D.imp_e(df, da) if i in self.bd.bang_apps else D.lin_e(df, da)
        self.stack_len[i] = len(stack)
        d = self.edge(i, n.children[0], stack)
        x = n.var
        nonlinear = i in self.bd.nonlinear
        occ = [self.nodes[o].occ for o in n.occurrences]
        if not occ:
            d = D.weak(d, x, self.s.type_at(self.s.bpos[i]), "nonlinear" if nonlinear else "linear")
        elif len(occ) > 1:
            d = D.cntr_all(d, occ, x)
        return D.imp_i(x, d) if nonlinear else D.lin_i(x, d)

    def var(self, n, stack: list) -> D.Deriv:
        key = self.bd.binder_key(n.id)
        base = 0 if isinstance(key, str) else self.stack_len[key]
        crossing = stack[base:]
        nonlinear = key in self.bd.nonlinear
        t = self.sigma(n.id)
        m = len(crossing)
        names = [n.occ]
        for i, frame in enumerate(crossing):
            inner_type = pars(t, m - 1 - i)
            if i == 0 and nonlinear:
                if frame.kind == "§":
                    frame.nonlinear.append(n.occ)
                names.append(n.occ)
                continue
            if frame.kind == "!":
                raise ConstructionError(f"variable {n.var} would cross a non-linear argument box")
            inner = self.fresh(n.occ)
            frame.doors.append((inner, D.id_(names[-1], Par(inner_type))))
            names.append(inner)
        return D.id_(names[-1], t)

    def edge(self, p: int, c: int, stack: list) -> D.Deriv:
        s = self.levels[c] - self.levels[p]
        if s == 0:
            return self.node(c, stack)
        if s > 0:
            bang = self.nodes[c].edge == T.ARG and p in self.bd.bang_apps
            frames = [Frame("!" if bang and k == 0 else "§") for k in range(s)]
            d = self.node(c, stack + frames)
            for frame in reversed(frames):
                d = self.close(frame, d)
            return d
        k = -s
        popped = stack[len(stack) - k :]
        filler = self.node(c, stack[: len(stack) - k])
        seen_k, _ = strip_pars(self.sigma(c))
        if seen_k < k:
            raise ConstructionError("hole type has too few paragraphs")
        seen = self.sigma(c)
        for _ in range(k):
            seen = seen.body
        names = [self.fresh("h") for _ in range(k)]
        for j in range(k):
            frame = popped[k - 1 - j]
            scrut = filler if j == k - 1 else D.id_(names[j + 1], pars(seen, j + 1))
            frame.doors.append((names[j], scrut))
        return D.id_(names[0], seen)

    def close(self, frame: Frame, d: D.Deriv) -> D.Deriv:
        if frame.kind == "!":
            if frame.doors or frame.nonlinear:
                raise ConstructionError("non-linear argument box with doors")
            return d
        d = D.par_i(d, nonlinear=frame.nonlinear)
        for inner, scrut in frame.doors:
            d = D.par_e(scrut, inner, d)
        return d


def place_paragraphs(
    bd: BangDeriv,
    level_cap: int = 8,
    max_boxes: Optional[int] = None,
    limit: Optional[int] = None,
    budget: int = 200_000,
) -> list:
    """Typings of the skeleton derivation ``bd`` obtained by placing paragraph boxes.

    Returns a list of :class:`Placement`, one per distinct conclusion, with
    the typings that need fewer optional boxes first.  Levels never exceed
    ``level_cap``; ``max_boxes`` bounds the number of optional boxes (beyond
    the one every non-linear argument needs) and defaults to ``level_cap``;
    ``budget`` caps the number of search steps.
    """
    search = ParagraphSearch(bd, level_cap, budget)
    seen: set = set()
    out = []
    for b in range(level_cap + 1 if max_boxes is None else max_boxes + 1):
        for placement in placements_with(search, b, seen):
            out.append(placement)
            if limit is not None and len(out) >= limit:
                return out
    return out


def placements_with(search: ParagraphSearch, boxes: int, seen: set) -> Iterator[Placement]:
    """New typings (conclusions not in ``seen``) using exactly ``boxes`` optional boxes."""
    bd = search.bd
    target = search.table.original
    for levels in search.level_assignments(boxes):
        key = search.judgement_key()
        if key in seen:
            continue
        seen.add(key)
        script = search.build(levels)
        j = D.check_ndlal(script)
        if not T.alpha_eq(j.term, target):
            raise ConstructionError("constructed derivation has the wrong subject")
        box_levels = {
            "/".join(search.nodes[p].path) or "root": levels[search.nodes[p].children[1]] - levels[p]
            for p in sorted(bd.bang_apps)
        }
        yield Placement(dict(levels), script, j.type, j, box_levels)
