"""Amalgamation constructions, stage-wise limit building, and verifiers.

The class amalgamators realize each class's explicit recipe on the
union of the arm universes and verify the result's membership.  The
limit builder grows a substructure chain by satisfying embedding
extension tasks through amalgamation, recording a replayable
transcript.  The verifiers measure finite stages against the extension
and homogeneity properties, reporting defects instead of failing.
"""

from __future__ import annotations

import hashlib
import itertools
import json
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from math import comb

from .algebra import Chain, make_from_table
from .errors import AmalgamationError, BudgetError
from .logic import SIG_LT
from .structure import (
    GradedStructure,
    Morphism,
    _consistent_extension,
    binary_structure,
    canonical_form,
    extend_embedding,
    find_embeddings,
    free_union,
    fresh_names,
    generated_substructure,
    is_embedding,
    is_substructure,
    rename,
    restrict,
    structure_from_text,
    structure_to_text,
)

__all__ = [
    "VFormation",
    "AmalgamStats",
    "align_v_formation",
    "verify_amalgam",
    "search_amalgam",
    "amalgamate_k1",
    "amalgamate_k2",
    "amalgamate_k3",
    "k0_jep",
    "k1_jep",
    "k2_jep",
    "k3_jep",
    "jep_union",
    "LimitState",
    "Transcript",
    "build_limit",
    "replay_transcript",
    "check_extension_property",
    "check_homogeneity",
    "defect_classes",
    "back_and_forth_isomorphism",
    "random_weighted_graph",
    "check_random_graph_property",
]


@dataclass(frozen=True)
class VFormation:
    """A shared base embedded as a literal substructure of two arms.

    The arms must intersect exactly in the base's elements; use
    ``align_v_formation`` to rename an arbitrary second arm into shape.
    """

    base: GradedStructure
    arm1: GradedStructure
    arm2: GradedStructure

    def __post_init__(self):
        if not is_substructure(self.base, self.arm1):
            raise ValueError("base is not a substructure of the first arm")
        if not is_substructure(self.base, self.arm2):
            raise ValueError("base is not a substructure of the second arm")
        shared = set(self.arm1.universe) & set(self.arm2.universe)
        if shared != set(self.base.universe):
            raise ValueError("arms must intersect exactly in the base")


@dataclass
class AmalgamStats:
    """Counts how often an amalgamator ran and used its fallback search."""

    calls: int = 0
    fallbacks: int = 0


def align_v_formation(base: GradedStructure, arm1: GradedStructure,
                      arm2: GradedStructure, embedding: dict) -> VFormation:
    """Build a v-formation from an embedding of the base into arm2.

    arm2 is renamed so the embedding image carries the base's ids and
    everything else is fresh relative to arm1.
    """
    inverse = {embedding[b]: b for b in base.universe}
    taken = set(arm1.universe) | set(arm2.universe) | set(base.universe)
    rest = [e for e in arm2.universe if e not in inverse]
    news = fresh_names("y", len(rest), taken)
    mapping = dict(inverse)
    mapping.update(zip(rest, news))
    return VFormation(base, arm1, rename(arm2, mapping))


def verify_amalgam(spec, v: VFormation, witness: GradedStructure) -> bool:
    return (
        spec.membership(witness)
        and is_substructure(v.arm1, witness)
        and is_substructure(v.arm2, witness)
    )


def _amalgam_frame(v: VFormation):
    """Union universe, within-arm values, and the unassigned cross pairs."""
    if v.arm1.signature != SIG_LT:
        raise ValueError("amalgamation recipes are defined over the one-binary-predicate signature")
    base_set = set(v.base.universe)
    ext1 = [e for e in v.arm1.universe if e not in base_set]
    ext2 = [e for e in v.arm2.universe if e not in base_set]
    universe = v.arm1.universe + tuple(ext2)
    values = dict(v.arm2.pred_interp["<"])
    values.update(v.arm1.pred_interp["<"])
    cross = [(a, b) for a in ext1 for b in ext2]
    return universe, values, cross


def amalgamate_k1(v: VFormation, stats: AmalgamStats | None = None) -> GradedStructure:
    """Simple union of two weighted graphs over their shared part.

    Mixed pairs get the bottom value in both directions, which keeps
    the result loopless and symmetric; membership is verified anyway.
    """
    if stats is not None:
        stats.calls += 1
    universe, values, cross = _amalgam_frame(v)
    bot = v.arm1.chain.bot
    for a, b in cross:
        values[(a, b)] = bot
        values[(b, a)] = bot
    out = binary_structure(v.arm1.chain, universe, values, name="amalgam")
    from .classes import k1_member

    if not k1_member(out):
        raise AmalgamationError("simple union of weighted graphs lost membership")
    return out


def _crisp_position(arm: GradedStructure, listing: list[str], x: str) -> int:
    """How many listed base elements sit (in the filter) below x in the arm."""
    ch = arm.chain
    lt = arm.pred_interp["<"]
    return sum(1 for a in listing if ch.in_filter(lt[(a, x)]))


def amalgamate_k2(v: VFormation, stats: AmalgamStats | None = None) -> GradedStructure:
    """Interleave two graded total preorders around their shared base.

    The base is listed along the filter cut of its relation; each new
    element takes the block index given by how many base elements sit
    below it, first-arm elements preceding second-arm elements inside a
    block.  Cross pairs get the filter threshold in the forward
    direction and the falsum constant backward.  If the verified result
    leaves the class (ties between arms and base can do that), an
    exhaustive completion search over the cross values takes over.
    """
    if stats is not None:
        stats.calls += 1
    from .classes import k2_member

    universe, values, cross = _amalgam_frame(v)
    chain = v.arm1.chain
    ch_lt = v.base.pred_interp["<"]

    def strictly_below(a: str) -> int:
        return sum(
            1
            for b in v.base.universe
            if chain.in_filter(ch_lt[(b, a)]) and not chain.in_filter(ch_lt[(a, b)])
        )

    listing = sorted(v.base.universe, key=lambda a: (strictly_below(a), v.base.index(a)))
    pos1 = {x: _crisp_position(v.arm1, listing, x) for x, _ in cross}
    pos2 = {y: _crisp_position(v.arm2, listing, y) for _, y in cross}
    for x, y in cross:
        if pos1[x] <= pos2[y]:
            values[(x, y)] = chain.one
            values[(y, x)] = chain.zero
        else:
            values[(y, x)] = chain.one
            values[(x, y)] = chain.zero
    out = binary_structure(chain, universe, values, name="amalgam")
    if k2_member(out):
        return out
    if stats is not None:
        stats.fallbacks += 1
    found = search_amalgam(v, k2_member)
    if found is None:
        raise AmalgamationError("no total-preorder amalgam exists on the union universe")
    return found


def amalgamate_k3(v: VFormation, stats: AmalgamStats | None = None) -> GradedStructure:
    """Cross rule for threshold partial orders.

    A mixed pair is pushed into the filter exactly when a base witness
    sits between its endpoints at the filter level; otherwise it takes
    the falsum constant.  The output is verified; failure is a fatal
    diagnostic, since the construction is supposed to work always.
    """
    if stats is not None:
        stats.calls += 1
    universe, values, cross = _amalgam_frame(v)
    chain = v.arm1.chain
    lt1 = v.arm1.pred_interp["<"]
    lt2 = v.arm2.pred_interp["<"]
    for a, b in cross:
        forward = any(
            chain.in_filter(lt1[(a, x)]) and chain.in_filter(lt2[(x, b)])
            for x in v.base.universe
        )
        backward = any(
            chain.in_filter(lt1[(x, a)]) and chain.in_filter(lt2[(b, x)])
            for x in v.base.universe
        )
        values[(a, b)] = chain.one if forward else chain.zero
        values[(b, a)] = chain.one if backward else chain.zero
    out = binary_structure(chain, universe, values, name="amalgam")
    from .classes import k3_member

    if not k3_member(out):
        raise AmalgamationError("threshold-order cross rule lost membership")
    return out


def search_amalgam(v: VFormation, membership, cap: int = 10**6) -> GradedStructure | None:
    """Exhaustive completion search over the cross values, first hit wins.

    All amalgam constructions here live on the union of the arm
    universes, so only the mixed pairs are open; every assignment of
    chain values to them (both directions) is tried in rank order.
    """
    universe, values, cross = _amalgam_frame(v)
    chain = v.arm1.chain
    slots = [p for pair in cross for p in (pair, (pair[1], pair[0]))]
    count = chain.size ** len(slots)
    if count > cap:
        raise BudgetError(f"{count} cross assignments exceed the cap of {cap}")
    for combo in itertools.product(range(chain.size), repeat=len(slots)):
        trial = dict(values)
        trial.update(zip(slots, combo))
        out = binary_structure(chain, universe, trial, name="amalgam")
        if membership(out):
            return out
    return None


def _empty_like(m: GradedStructure) -> GradedStructure:
    return binary_structure(m.chain, (), {}, name="empty")


def _jep_via_amalgam(amalgamator, m1: GradedStructure, m2: GradedStructure) -> GradedStructure:
    taken = set(m1.universe) | set(m2.universe)
    overlap = [e for e in m2.universe if e in set(m1.universe)]
    if overlap:
        news = fresh_names("u", len(overlap), taken)
        m2 = rename(m2, dict(zip(overlap, news)))
    return amalgamator(VFormation(_empty_like(m1), m1, m2))


def k0_jep(m1: GradedStructure, m2: GradedStructure) -> GradedStructure:
    """Common extension of two graded preorders: disjoint union with
    mixed pairs at the falsum constant; membership is verified."""
    from .classes import k0_member

    out = free_union(m1, m2, m1.chain.zero)
    if not k0_member(out):
        raise AmalgamationError("free union with falsum cross values lost preorder membership")
    return out


def k1_jep(m1: GradedStructure, m2: GradedStructure) -> GradedStructure:
    return _jep_via_amalgam(amalgamate_k1, m1, m2)


def k2_jep(m1: GradedStructure, m2: GradedStructure) -> GradedStructure:
    return _jep_via_amalgam(amalgamate_k2, m1, m2)


def k3_jep(m1: GradedStructure, m2: GradedStructure) -> GradedStructure:
    return _jep_via_amalgam(amalgamate_k3, m1, m2)


def jep_union(members, spec, verify: bool = True) -> GradedStructure:
    """Fold a list of members into one structure by iterated joint extension.

    Starting from the first member, each next one is renamed apart and
    joined in; every input then embeds into the result, so the result's
    age at the input sizes covers the inputs.
    """
    members = list(members)
    if not members:
        raise ValueError("need at least one member")
    if spec.joint_extension is None:
        raise ValueError(f"class {spec.name} has no joint-extension constructor")
    current = members[0]
    for m in members[1:]:
        current = spec.joint_extension(current, m)
    if verify:
        for i, m in enumerate(members):
            if not find_embeddings(m, current, limit=1):
                raise AmalgamationError(f"input {i} does not embed into the joint union")
    return current


# --- stage-wise limit construction ---


@dataclass
class Task:
    """A pending extension demand: grow f's image from n to a copy of nprime."""

    mapping: dict
    n: GradedStructure
    nprime: GradedStructure


@dataclass
class LimitState:
    """Bookkeeping for the stage construction."""

    stage: int
    current: GradedStructure
    pending: list[Task] = field(default_factory=list)
    fresh_counter: int = 0


@dataclass
class Event:
    stage: int
    base_ids: tuple[str, ...]
    arm_text: str


@dataclass
class Transcript:
    """Replayable record of one limit build."""

    class_name: str
    chain: Chain
    budget: int
    stages: int
    shuffle_seed: int | None
    initial_text: str
    events: list[Event] = field(default_factory=list)

    def to_json(self) -> str:
        payload = {
            "class": self.class_name,
            "chain": {
                "name": self.chain.name,
                "size": self.chain.size,
                "one": self.chain.one,
                "zero": self.chain.zero,
                "conj": [list(row) for row in self.chain.conj_table],
            },
            "budget": self.budget,
            "stages": self.stages,
            "shuffle_seed": self.shuffle_seed,
            "initial": self.initial_text,
            "events": [
                {"stage": e.stage, "base": list(e.base_ids), "arm": e.arm_text}
                for e in self.events
            ],
        }
        return json.dumps(payload, indent=2, sort_keys=True)

    @staticmethod
    def from_json(text: str) -> "Transcript":
        payload = json.loads(text)
        cdata = payload["chain"]
        chain = make_from_table(cdata["size"], cdata["conj"], one=cdata["one"],
                                zero=cdata["zero"], name=cdata["name"])
        return Transcript(
            class_name=payload["class"],
            chain=chain,
            budget=payload["budget"],
            stages=payload["stages"],
            shuffle_seed=payload["shuffle_seed"],
            initial_text=payload["initial"],
            events=[
                Event(e["stage"], tuple(e["base"]), e["arm"])
                for e in payload["events"]
            ],
        )


def _extension_pairs(spec, chain, size_budget, shuffle_seed):
    """Members and the (proper substructure, member) demand pairs, in order."""
    from .classes import enumerate_class

    members = list(enumerate_class(spec, chain, size_budget))
    if shuffle_seed is not None:
        random.Random(shuffle_seed).shuffle(members)
    pairs = []
    for nprime in members:
        for ssize in range(1, len(nprime.universe)):
            for subset in itertools.combinations(nprime.universe, ssize):
                n = restrict(nprime, subset)
                if spec.membership(n):
                    pairs.append((n, nprime))
    return members, pairs


def _amalgamate_for(spec, v: VFormation, stats: AmalgamStats) -> GradedStructure:
    if spec.amalgamate is not None:
        return spec.amalgamate(v, stats=stats)
    found = search_amalgam(v, spec.membership)
    if found is None:
        raise AmalgamationError("no amalgam found by completion search")
    return found


def build_limit(spec, chain: Chain, stages: int, size_budget: int,
                shuffle_seed: int | None = None):
    """Grow a substructure chain satisfying all bounded extension tasks.

    Stage i enumerates every embedding of a member into the current
    structure together with every member extension of its source, then
    satisfies each unsatisfied task by one amalgamation; every task seen
    at stage i is realized in stage i+1.  Deterministic given the
    member enumeration order (permutable via ``shuffle_seed``).

    Returns (stage structures, transcript).
    """
    if stages < 0:
        raise ValueError("stages must be non-negative")
    members, pairs = _extension_pairs(spec, chain, size_budget, shuffle_seed)
    if not members:
        raise ValueError(f"class {spec.name} has no members within the budget")
    current = members[0]
    transcript = Transcript(
        class_name=spec.name,
        chain=chain,
        budget=size_budget,
        stages=stages,
        shuffle_seed=shuffle_seed,
        initial_text=structure_to_text(current),
    )
    stage_list = [current]
    stats = AmalgamStats()
    for stage in range(stages):
        tasks = []
        for n, nprime in pairs:
            for f in find_embeddings(n, current):
                tasks.append(Task(f.mapping, n, nprime))
        state = LimitState(stage=stage, current=current, pending=tasks)
        for pos, task in enumerate(tasks):
            if extend_embedding(task.nprime, state.current, task.mapping, limit=1):
                continue
            base = restrict(state.current, set(task.mapping.values()))
            new_elems = [e for e in task.nprime.universe if e not in task.n.universe]
            fresh = fresh_names(
                "n", len(new_elems),
                set(state.current.universe) | set(task.nprime.universe),
            )
            ren = {e: task.mapping[e] for e in task.n.universe}
            ren.update(zip(new_elems, fresh))
            arm = rename(task.nprime, ren)
            v = VFormation(base, state.current, arm)
            try:
                state.current = _amalgamate_for(spec, v, stats)
            except AmalgamationError as exc:
                raise AmalgamationError(
                    f"stage {stage}: {exc} ({len(tasks) - pos - 1} tasks pending)"
                ) from exc
            transcript.events.append(Event(stage, tuple(base.universe), structure_to_text(arm)))
            if not extend_embedding(task.nprime, state.current, task.mapping, limit=1):
                raise AmalgamationError(f"stage {stage}: amalgam did not satisfy its task")
        current = state.current
        stage_list.append(current)
    return stage_list, transcript


def replay_transcript(transcript: Transcript):
    """Re-run the recorded amalgamation sequence; returns the stages."""
    from .classes import get_class

    spec = get_class(transcript.class_name)
    chain = transcript.chain
    current = structure_from_text(transcript.initial_text, chain=chain)
    stage_list = [current]
    stats = AmalgamStats()
    events = list(transcript.events)
    for stage in range(transcript.stages):
        for event in (e for e in events if e.stage == stage):
            arm = structure_from_text(event.arm_text, chain=chain)
            base = restrict(current, event.base_ids)
            v = VFormation(base, current, arm)
            current = _amalgamate_for(spec, v, stats)
        stage_list.append(current)
    return stage_list


# --- verifiers ---


def _parallel_map(fn, items, jobs: int):
    if jobs <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


@dataclass(frozen=True)
class ExtensionDefect:
    n_form: bytes
    nprime_form: bytes
    mapping: tuple

    def render(self) -> str:
        nd = hashlib.sha256(self.n_form).hexdigest()[:12]
        pd = hashlib.sha256(self.nprime_form).hexdigest()[:12]
        pairs = " ".join(f"{a}->{b}" for a, b in self.mapping)
        return f"extension defect: {nd} into {pd} at {pairs}"


def check_extension_property(m: GradedStructure, spec, k: int,
                             within=None, jobs: int = 1) -> list[ExtensionDefect]:
    """Embeddings of members into m that fail to extend to some member extension.

    ``within`` restricts the embeddings' images to a subset of m's
    universe; extensions may still use all of m.
    """
    from .classes import enumerate_class

    members = enumerate_class(spec, m.chain, k)
    allowed = set(within) if within is not None else None
    instances = []
    for nprime in members:
        form_np = canonical_form(nprime)
        for ssize in range(1, len(nprime.universe)):
            for subset in itertools.combinations(nprime.universe, ssize):
                n = restrict(nprime, subset)
                if not spec.membership(n):
                    continue
                form_n = canonical_form(n)
                for f in find_embeddings(n, m):
                    if allowed is not None and any(v not in allowed for v in f.mapping.values()):
                        continue
                    instances.append((form_n, form_np, n, nprime, f.mapping))

    def check(inst):
        form_n, form_np, n, nprime, mapping = inst
        if extend_embedding(nprime, m, mapping, limit=1):
            return None
        return ExtensionDefect(form_n, form_np, tuple(sorted(mapping.items())))

    results = _parallel_map(check, instances, jobs)
    return [r for r in results if r is not None]


@dataclass(frozen=True)
class HomogeneityDefect:
    source_form: bytes
    target_form: bytes
    mapping: tuple

    def render(self) -> str:
        pairs = " ".join(f"{a}->{b}" for a, b in self.mapping)
        return f"homogeneity defect: {pairs} extends to no automorphism"


def check_homogeneity(m: GradedStructure, k: int) -> list[HomogeneityDefect]:
    """Partial isomorphisms between k-generated substructures of m that
    extend to no automorphism.  Exact for finite m."""
    defects = []
    subs = []
    for size in range(1, min(k, len(m.universe)) + 1):
        for subset in itertools.combinations(m.universe, size):
            subs.append(generated_substructure(m, subset))
    for a in subs:
        for b in subs:
            if len(a.universe) != len(b.universe):
                continue
            for g in find_embeddings(a, b):
                if not extend_embedding(m, m, g.mapping, limit=1):
                    defects.append(HomogeneityDefect(
                        canonical_form(a),
                        canonical_form(b),
                        tuple(sorted(g.mapping.items())),
                    ))
    return defects


def defect_classes(defects) -> set:
    """Group defects by the isomorphism types they relate."""
    return {(d.source_form, d.target_form) for d in defects}


def back_and_forth_isomorphism(m: GradedStructure, n: GradedStructure) -> Morphism | None:
    """Isomorphism via alternating extension steps, or None.

    Odd steps pull in the next unmatched element of m, even steps the
    next unmatched element of n, backtracking over partners.
    """
    if len(m.universe) != len(n.universe):
        return None

    def grow(mapping, inverse):
        if len(mapping) == len(m.universe):
            mor = Morphism(m, n, dict(mapping))
            return mor if is_embedding(mor) else None
        if len(mapping) % 2 == 0:
            src = next(e for e in m.universe if e not in mapping)
            for dst in n.universe:
                if dst in inverse:
                    continue
                if not _consistent_extension(m, n, mapping, src, dst):
                    continue
                mapping[src] = dst
                inverse[dst] = src
                found = grow(mapping, inverse)
                if found:
                    return found
                del mapping[src]
                del inverse[dst]
        else:
            dst = next(e for e in n.universe if e not in inverse)
            for src in m.universe:
                if src in mapping:
                    continue
                if not _consistent_extension(m, n, mapping, src, dst):
                    continue
                mapping[src] = dst
                inverse[dst] = src
                found = grow(mapping, inverse)
                if found:
                    return found
                del mapping[src]
                del inverse[dst]
        return None

    return grow({}, {})


# --- the random weighted graph ---


def random_weighted_graph(chain: Chain, rounds: int,
                          max_candidates: int = 10**6) -> GradedStructure:
    """Deterministic witness construction for the weighted-graph limit.

    Starts from one vertex; round r adds, for every nonempty subset X
    of the existing vertices with |X| <= r and every map from X to the
    chain, one fresh vertex matching that map symmetrically and sitting
    at bottom against everything else.  Vertex ids carry their round:
    ``v0``, then ``r1w0``, ``r2w0``, and so on.
    """
    if rounds < 1:
        raise ValueError("rounds must be at least 1")
    if chain.one == chain.bot:
        raise ValueError("filter contains bottom, so no loopless structures exist")
    bot = chain.bot
    vertices = ["v0"]
    values = {("v0", "v0"): bot}

    def add_vertex(name, profile):
        for u in vertices:
            w = profile.get(u, bot)
            values[(name, u)] = w
            values[(u, name)] = w
        values[(name, name)] = bot
        vertices.append(name)

    for r in range(1, rounds + 1):
        existing = list(vertices)
        total = sum(
            comb(len(existing), s) * chain.size ** s
            for s in range(1, min(r, len(existing)) + 1)
        )
        if total > max_candidates:
            raise BudgetError(
                f"round {r} would add {total} vertices, over the cap of {max_candidates}"
            )
        counter = 0
        for s in range(1, min(r, len(existing)) + 1):
            for X in itertools.combinations(existing, s):
                for fv in itertools.product(range(chain.size), repeat=s):
                    add_vertex(f"r{r}w{counter}", dict(zip(X, fv)))
                    counter += 1
    return binary_structure(chain, vertices, values, name="randgraph")


@dataclass(frozen=True)
class WitnessDefect:
    subset: tuple[str, ...]
    wanted: tuple[int, ...]

    def render(self) -> str:
        if not self.subset:
            return "witness defect: no vertex outside the empty set"
        pairs = " ".join(f"{a}:{v}" for a, v in zip(self.subset, self.wanted))
        return f"witness defect: no vertex matching {pairs}"


def check_random_graph_property(m: GradedStructure, max_x: int, within=None,
                                max_candidates: int = 10**6,
                                jobs: int = 1) -> list[WitnessDefect]:
    """Subset-map demands with no matching witness vertex.

    For every subset X of ``within`` (default: the whole universe) with
    at most ``max_x`` elements and every map from X to the chain,
    checks that some vertex outside X matches the map symmetrically.
    """
    from .classes import k1_member

    if not k1_member(m):
        raise ValueError("structure is not a weighted graph (loopless symmetric)")
    chain = m.chain
    pool = list(within) if within is not None else list(m.universe)
    for e in pool:
        if e not in m.universe:
            raise ValueError(f"element {e!r} not in universe")
    total = sum(comb(len(pool), s) * chain.size ** s for s in range(max_x + 1))
    if total > max_candidates:
        raise BudgetError(f"{total} demands exceed the cap of {max_candidates}")
    lt = m.pred_interp["<"]
    demands = [
        (X, fv)
        for s in range(max_x + 1)
        for X in itertools.combinations(pool, s)
        for fv in itertools.product(range(chain.size), repeat=s)
    ]

    def check(demand):
        X, fv = demand
        excluded = set(X)
        for w in m.universe:
            if w in excluded:
                continue
            if all(lt[(w, a)] == fv[i] and lt[(a, w)] == fv[i] for i, a in enumerate(X)):
                return None
        return WitnessDefect(X, fv)

    results = _parallel_map(check, demands, jobs)
    return [r for r in results if r is not None]
