"""Bounded enumeration of finite FS/MIPC models and countermodel search.

The candidate stream is deterministic and canonical: models are ordered
by world count, then total point count, then lexicographically by the
integer encodings of the order relation, the point sets, the relations
and the valuation (in that significance order).  Duplicate isomorphs
are partly avoided by construction: world ids respect the order, and
point ids appear in first-use order; no general graph canonicalisation
is attempted.

The search is sound for refutation only.  A returned certificate is
re-validated and re-evaluated through an independent evaluator before
being handed out; an exhausted result only means no countermodel exists
within the budget (including any candidate or time cap) and never
claims validity.
"""

from __future__ import annotations

import dataclasses
import os
import time
from dataclasses import dataclass
from typing import Iterator

from .formula import AND, BOT, BOX, DIA, IMP, OR, VAR, Formula, subformulas, varset
from .reduction import PositiveEmbedding, OneVarSubstitution, positive_embed, star
from .semantics import (FS, KINDS, MIPC, FiniteFSModel, TableContext,
                        bits_of, eval_formula, eval_formula_plain,
                        iter_monotone_valuations, pair_space, supersets_asc,
                        validate_model)

TIME_CAP_ENV = "IMRED_TIME_CAP_MS"

# Certificates re-checked by the plain (non-memoized) evaluator when the
# expanded tree is at most this big; anything larger would multiply under
# nested implications, so the memoized evaluator is used instead.
_PLAIN_RECHECK_LIMIT = 20_000


@dataclass(frozen=True)
class SearchBudget:
    """Bounds for model enumeration.

    ``max_worlds``/``max_points`` bound the frame, ``var_bound`` the
    number of enumerated variables.  ``max_candidates`` and
    ``time_cap_ms`` stop the search early; both are optional, and a
    missing time cap falls back to the IMRED_TIME_CAP_MS environment
    variable at search time.
    """

    max_worlds: int
    max_points: int
    var_bound: int
    max_candidates: int | None = None
    time_cap_ms: float | None = None

    def __post_init__(self) -> None:
        if self.max_worlds < 1 or self.max_points < 1:
            raise ValueError("budgets need at least one world and one point")
        if self.var_bound < 0:
            raise ValueError("variable bound must be >= 0")
        for cap in (self.max_candidates, self.time_cap_ms):
            if cap is not None and cap <= 0:
                raise ValueError("caps must be positive when present")


@dataclass(frozen=True)
class SearchStats:
    """What a search actually did; carried by every result."""

    models_tested: int
    frames_tested: int
    elapsed_ms: float
    stop: str  # "countermodel" | "exhausted" | "candidate-cap" | "time-cap"
    budget: SearchBudget


@dataclass(frozen=True)
class RefutationResult:
    """Countermodel certificate or an exhaustion marker.

    ``refuted`` distinguishes the two outcomes; a certificate always
    re-validates and re-evaluates to false at (world, point).
    """

    countermodel: FiniteFSModel | None
    world: int | None
    point: int | None
    stats: SearchStats

    @property
    def refuted(self) -> bool:
        return self.countermodel is not None


def _posets(n_worlds: int) -> list[tuple[int, ...]]:
    """All partial orders on 0..n-1 whose ids respect the order, as up-masks.

    Edges only point from smaller to larger ids, so every poset shows up
    in at least one such labelling and antisymmetry holds by
    construction.  Distinct edge sets with the same closure are merged.
    """
    slots = [(u, v) for u in range(n_worlds) for v in range(u + 1, n_worlds)]
    seen: set[tuple[int, ...]] = set()
    for choice in range(1 << len(slots)):
        up = [1 << w for w in range(n_worlds)]
        for bit, (u, v) in enumerate(slots):
            if (choice >> bit) & 1:
                up[u] |= 1 << v
        for w in reversed(range(n_worlds)):  # successors already closed
            acc = up[w]
            for v in bits_of(acc):
                if v != w:
                    acc |= up[v]
            up[w] = acc
        seen.add(tuple(up))
    return sorted(seen)


def _delta_assignments(n_worlds: int, up: tuple[int, ...],
                       max_points: int) -> list[tuple[tuple[int, ...], int]]:
    """All monotone point-set assignments with canonical first-use ids.

    Returns (delta masks, pool size) pairs.  Every world holds the union
    of its predecessors' points, any subset of previously introduced
    points, and a block of fresh consecutive ids, capped at
    ``max_points`` points per world and never empty.
    """
    out: list[tuple[tuple[int, ...], int]] = []
    masks = [0] * n_worlds

    def go(w: int, used: int) -> None:
        if w == n_worlds:
            out.append((tuple(masks), used))
            return
        lower = 0
        for u in range(w):
            if (up[u] >> w) & 1:
                lower |= masks[u]
        base_count = lower.bit_count()
        if base_count > max_points:
            return
        old_free = ((1 << used) - 1) & ~lower
        for extra in supersets_asc(0, old_free):
            count = base_count + extra.bit_count()
            if count > max_points:
                continue
            for fresh in range(max_points - count + 1):
                mask = lower | extra | (((1 << fresh) - 1) << used)
                if mask == 0:
                    continue
                masks[w] = mask
                go(w + 1, used + fresh)
        masks[w] = 0

    go(0, 0)
    return out


@dataclass(frozen=True)
class _Frame:
    n_worlds: int
    n_points: int
    total_points: int
    up: tuple[int, ...]
    delta: tuple[int, ...]
    spaces: tuple[int, ...]  # per-world full pair mask over delta


def _frames(n_worlds: int, max_points: int) -> list[_Frame]:
    frames = []
    for up in _posets(n_worlds):
        for delta, used in _delta_assignments(n_worlds, up, max_points):
            n_points = max(1, used)
            frames.append(_Frame(
                n_worlds=n_worlds, n_points=n_points,
                total_points=sum(m.bit_count() for m in delta), up=up,
                delta=delta,
                spaces=tuple(pair_space(m, n_points) for m in delta)))
    frames.sort(key=lambda f: (f.total_points, f.up, f.delta))
    return frames


def _srel_stream(frame: _Frame, kind: str) -> Iterator[tuple[int, ...]]:
    """Monotone relation assignments, ascending; MIPC forces totality."""
    if kind == MIPC:
        return iter((frame.spaces,))
    n = frame.n_worlds
    masks = [0] * n

    def go(w: int) -> Iterator[tuple[int, ...]]:
        if w == n:
            yield tuple(masks)
            return
        lower = 0
        for u in range(w):
            if (frame.up[u] >> w) & 1:
                lower |= masks[u]
        for m in supersets_asc(lower, frame.spaces[w]):
            masks[w] = m
            yield from go(w + 1)
        masks[w] = 0

    return go(0)


def _stream(budget: SearchBudget, kind: str) -> Iterator[
        tuple[_Frame, TableContext, tuple[int, ...], tuple[tuple[int, ...], ...]]]:
    """All candidates in canonical order as (frame, ctx, srel, val) tuples."""
    if kind not in KINDS:
        raise ValueError(f"unknown model kind {kind!r}")
    for n in range(1, budget.max_worlds + 1):
        for frame in _frames(n, budget.max_points):
            for srel in _srel_stream(frame, kind):
                ctx = TableContext(frame.n_worlds, frame.n_points, frame.up,
                                   frame.delta, srel)
                for val in iter_monotone_valuations(
                        frame.n_worlds, frame.up, frame.delta,
                        budget.var_bound):
                    yield frame, ctx, srel, val


def _materialise(frame: _Frame, srel: tuple[int, ...],
                 val: tuple[tuple[int, ...], ...], kind: str,
                 var_bound: int) -> FiniteFSModel:
    return FiniteFSModel(
        kind=kind, n_worlds=frame.n_worlds, n_points=frame.n_points,
        up=frame.up, delta=frame.delta, srel=srel, nvars=var_bound, val=val,
        world_names=tuple(f"w{w}" for w in range(frame.n_worlds)),
        point_names=tuple(f"x{x}" for x in range(frame.n_points)))


def enumerate_models(budget: SearchBudget, kind: str = FS) -> Iterator[FiniteFSModel]:
    """Every model within the frame/point/variable budget, canonical order.

    Candidate and time caps are ignored here; callers wanting a bounded
    prefix can slice the stream.  Every yielded model is valid by
    construction.
    """
    for frame, _ctx, srel, val in _stream(budget, kind):
        yield _materialise(frame, srel, val, kind, budget.var_bound)


class _Compiled:
    """Postorder array form of a formula DAG for the hot evaluation loop."""

    __slots__ = ("nodes", "kinds", "vars", "left", "right", "root")

    def __init__(self, phi: Formula):
        nodes = list(subformulas(phi))
        position = {id(node): k for k, node in enumerate(nodes)}
        self.nodes = nodes
        self.kinds = [node.kind for node in nodes]
        self.vars = [node.var for node in nodes]
        self.left = [position[id(node.left)] if node.left is not None else -1
                     for node in nodes]
        self.right = [position[id(node.right)] if node.right is not None else -1
                      for node in nodes]
        self.root = position[id(phi)]


def _masks_for(compiled: _Compiled, ctx: TableContext,
               val: tuple[tuple[int, ...], ...],
               cached: dict[Formula, int] | None) -> list[int]:
    P = ctx.n_points
    pairs = ctx.pairs
    srow = ctx.srow
    req = ctx.req
    ups = ctx.ups
    masks = [0] * len(compiled.nodes)
    for k, kind in enumerate(compiled.kinds):
        node = compiled.nodes[k]
        if cached is not None and node.shared:
            hit = cached.get(node)
            if hit is not None:
                masks[k] = hit
                continue
        if kind == VAR:
            p = compiled.vars[k]
            mask = 0
            if p <= len(val):
                row = val[p - 1]
                for w in range(ctx.n_worlds):
                    mask |= row[w] << (w * P)
        elif kind == BOT:
            mask = 0
        elif kind == AND:
            mask = masks[compiled.left[k]] & masks[compiled.right[k]]
        elif kind == OR:
            mask = masks[compiled.left[k]] | masks[compiled.right[k]]
        elif kind == IMP:
            holds = ~masks[compiled.left[k]] | masks[compiled.right[k]]
            mask = 0
            for w, x in pairs:
                need = req[w][x]
                if holds & need == need:
                    mask |= 1 << (w * P + x)
        elif kind == DIA:
            child = masks[compiled.left[k]]
            mask = 0
            for w, x in pairs:
                if (child >> (w * P)) & srow[w][x]:
                    mask |= 1 << (w * P + x)
        else:
            child = masks[compiled.left[k]]
            mask = 0
            for w, x in pairs:
                for v in ups[w]:
                    if srow[v][x] & ~(child >> (v * P)):
                        break
                else:
                    mask |= 1 << (w * P + x)
        masks[k] = mask
        if cached is not None and node.shared:
            cached[node] = mask
    return masks


def _recheck_certificate(model: FiniteFSModel, w: int, x: int, phi: Formula) -> None:
    violations = validate_model(model)
    if violations:
        raise RuntimeError(
            "enumerator produced an invalid model: "
            + "; ".join(str(v) for v in violations))
    if phi.tree_size <= _PLAIN_RECHECK_LIMIT:
        holds = eval_formula_plain(model, w, x, phi)
    else:
        holds = eval_formula(model, w, x, phi)
    if holds:
        raise RuntimeError(
            "certificate failed the independent re-evaluation; the table "
            "evaluator and the recursive evaluator disagree")


def find_countermodel(phi: Formula, budget: SearchBudget, kind: str = FS,
                      table_cache: dict | None = None) -> RefutationResult:
    """First model in canonical order falsifying ``phi`` somewhere.

    The formula's variables must fit the budget's variable bound.  The
    returned certificate names the least (world, point) pair at which
    the formula fails and has been re-validated and re-evaluated.  An
    exhausted result carries statistics including whether a candidate or
    time cap stopped the search early.

    ``table_cache`` may be shared between searches: per-model truth
    masks of long-lived subterms (family formulas) are stored under the
    model's canonical encoding, which makes repeated searches over
    substituted outputs cheap.  Results never depend on the cache.
    """
    top = max(varset(phi), default=0)
    if top > budget.var_bound:
        raise ValueError(
            f"formula uses p{top} but the budget allows {budget.var_bound} variables")
    time_cap = budget.time_cap_ms
    if time_cap is None:
        env = os.environ.get(TIME_CAP_ENV)
        if env:
            time_cap = float(env)
    compiled = _Compiled(phi)
    if table_cache is not None and not any(n.shared for n in compiled.nodes):
        table_cache = None  # nothing reusable in this formula
    started = time.perf_counter()
    tested = 0
    frames_seen: set[tuple] = set()
    stop = "exhausted"
    for frame, ctx, srel, val in _stream(budget, kind):
        if budget.max_candidates is not None and tested >= budget.max_candidates:
            stop = "candidate-cap"
            break
        if time_cap is not None and tested % 256 == 0 and \
                (time.perf_counter() - started) * 1000.0 > time_cap:
            stop = "time-cap"
            break
        tested += 1
        frames_seen.add((frame.up, frame.delta))
        cached = None
        if table_cache is not None:
            key = (kind, frame.n_worlds, frame.up, frame.delta, srel, val)
            cached = table_cache.setdefault(key, {})
        masks = _masks_for(compiled, ctx, val, cached)
        root = masks[compiled.root]
        if root & ctx.space == ctx.space:
            continue
        missing = ctx.space & ~root
        for w, x in ctx.pairs:
            if (missing >> (w * ctx.n_points + x)) & 1:
                break
        model = _materialise(frame, srel, val, kind, budget.var_bound)
        _recheck_certificate(model, w, x, phi)
        elapsed = (time.perf_counter() - started) * 1000.0
        return RefutationResult(
            countermodel=model, world=w, point=x,
            stats=SearchStats(models_tested=tested,
                              frames_tested=len(frames_seen),
                              elapsed_ms=elapsed, stop="countermodel",
                              budget=budget))
    elapsed = (time.perf_counter() - started) * 1000.0
    return RefutationResult(
        countermodel=None, world=None, point=None,
        stats=SearchStats(models_tested=tested, frames_tested=len(frames_seen),
                          elapsed_ms=elapsed, stop=stop, budget=budget))


CONSISTENT = "consistent"
SOFT_MISS = "soft-miss"
CONTRADICTION = "contradiction"


def classify_pair(input_result: RefutationResult,
                  output_result: RefutationResult) -> str:
    """Directional agreement of an input/output search pair.

    consistent: both refuted, or input not refuted and output not
    refuted.  soft-miss: input refuted but the output search came back
    empty-handed (a budget artefact, not a translation failure).
    contradiction: output refuted although the input search found
    nothing; still only soft evidence, because an exhausted input search
    is not a validity proof.
    """
    if input_result.refuted:
        return CONSISTENT if output_result.refuted else SOFT_MISS
    return CONTRADICTION if output_result.refuted else CONSISTENT


@dataclass(frozen=True)
class ConsistencyReport:
    """Outcome of one translation-consistency probe."""

    input: Formula
    embedding: PositiveEmbedding
    substitution: OneVarSubstitution
    input_result: RefutationResult
    positive_result: RefutationResult
    one_var_result: RefutationResult
    positive_outcome: str
    one_var_outcome: str

    @property
    def contradiction(self) -> bool:
        return CONTRADICTION in (self.positive_outcome, self.one_var_outcome)


def check_translation_consistency(phi: Formula, budget_in: SearchBudget,
                                  budget_out: SearchBudget, kind: str = FS,
                                  table_cache: dict | None = None) -> ConsistencyReport:
    """Probe both translation stages against the bounded oracle.

    Searches for countermodels of the input (under ``budget_in``), of
    its positive form and of the one-variable form (both under
    ``budget_out``, with the variable bound adjusted to each target
    formula).  Classification is per :func:`classify_pair`; bounded
    search being refutation-only, no outcome here can establish a
    translation failure by itself.
    """
    embedding = positive_embed(phi)
    subst = star(embedding.positive_form)
    input_result = find_countermodel(phi, budget_in, kind)
    positive_budget = dataclasses.replace(
        budget_out, var_bound=max(varset(embedding.positive_form), default=0))
    positive_result = find_countermodel(embedding.positive_form,
                                        positive_budget, kind,
                                        table_cache=table_cache)
    one_var_budget = dataclasses.replace(
        budget_out, var_bound=max(varset(subst.result), default=0))
    one_var_result = find_countermodel(subst.result, one_var_budget, kind,
                                       table_cache=table_cache)
    return ConsistencyReport(
        input=phi, embedding=embedding, substitution=subst,
        input_result=input_result, positive_result=positive_result,
        one_var_result=one_var_result,
        positive_outcome=classify_pair(input_result, positive_result),
        one_var_outcome=classify_pair(input_result, one_var_result))
