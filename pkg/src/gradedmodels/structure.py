"""Finite graded structures over a fixed chain.

Universes are ordered tuples of opaque string ids; predicate
interpretations are total maps from element tuples to ranks, function
interpretations are total maps to elements.  Structures are immutable
values; renaming is explicit.  All operations here are pure.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace

from .algebra import Chain
from .errors import FileFormatError, NotAChainError
from .logic import SIG_LT, Signature

__all__ = [
    "GradedStructure",
    "Morphism",
    "make_structure",
    "binary_structure",
    "is_substructure",
    "is_embedding",
    "find_embeddings",
    "extend_embedding",
    "is_isomorphic",
    "canonical_form",
    "generated_substructure",
    "restrict",
    "rename",
    "age",
    "union_of_chain",
    "free_union",
    "structure_from_text",
    "structure_to_text",
]


def _check_element_id(eid: str) -> str:
    if not eid or any(ch.isspace() for ch in eid) or "=" in eid:
        raise ValueError(f"bad element id {eid!r}")
    return eid


@dataclass(frozen=True)
class GradedStructure:
    chain: Chain
    signature: Signature
    universe: tuple[str, ...]
    pred_interp: dict
    func_interp: dict
    name: str = field(default="s", compare=False)

    def __post_init__(self):
        seen = set()
        for eid in self.universe:
            _check_element_id(eid)
            if eid in seen:
                raise ValueError(f"duplicate element id {eid!r}")
            seen.add(eid)
        for pname, arity in self.signature.predicates:
            interp = self.pred_interp.get(pname)
            if interp is None:
                raise ValueError(f"missing interpretation for predicate {pname!r}")
            if len(interp) != len(self.universe) ** arity:
                raise ValueError(f"interpretation of {pname!r} is not total")
            for t, v in interp.items():
                if len(t) != arity or any(e not in seen for e in t):
                    raise ValueError(f"bad tuple {t!r} for predicate {pname!r}")
                self.chain.check_rank(v)
        for fname, arity in self.signature.functions:
            interp = self.func_interp.get(fname)
            if interp is None:
                raise ValueError(f"missing interpretation for function {fname!r}")
            if len(interp) != len(self.universe) ** arity:
                raise ValueError(f"interpretation of {fname!r} is not total")
            for t, v in interp.items():
                if len(t) != arity or any(e not in seen for e in t) or v not in seen:
                    raise ValueError(f"bad entry {t!r} -> {v!r} for function {fname!r}")

    def __len__(self) -> int:
        return len(self.universe)

    def value(self, pred: str, *elems: str) -> int:
        return self.pred_interp[pred][elems]

    def index(self, eid: str) -> int:
        return self.universe.index(eid)

    def __repr__(self) -> str:
        return f"GradedStructure({self.name!r}, |M|={len(self.universe)})"


@dataclass
class Morphism:
    """A universe map from source into target, claimed to be an embedding."""

    source: GradedStructure
    target: GradedStructure
    mapping: dict

    def __call__(self, eid: str) -> str:
        return self.mapping[eid]


def make_structure(chain, universe, values=None, *, signature=SIG_LT, default=None,
                   functions=None, name="s") -> GradedStructure:
    """Build a structure from sparse values.

    ``values`` maps (pred_name, element_tuple) to ranks; tuples not
    listed get ``default`` (required when anything is left out).
    """
    universe = tuple(universe)
    values = dict(values or {})
    pred_interp = {}
    for pname, arity in signature.predicates:
        interp = {}
        for t in itertools.product(universe, repeat=arity):
            key = (pname, t)
            if key in values:
                interp[t] = values.pop(key)
            else:
                if default is None:
                    raise ValueError(f"no value for {pname}{t} and no default given")
                interp[t] = default
        pred_interp[pname] = interp
    if values:
        raise ValueError(f"values given for unknown tuples: {sorted(values)[:3]}")
    func_interp = {}
    for fname, arity in signature.functions:
        table = (functions or {}).get(fname)
        if table is None:
            raise ValueError(f"missing function table for {fname!r}")
        func_interp[fname] = {tuple(t): v for t, v in table.items()}
    return GradedStructure(chain, signature, universe, pred_interp, func_interp, name=name)


def binary_structure(chain, elements, values=None, default=None, name="s") -> GradedStructure:
    """Structure over the one-binary-predicate signature; keys are id pairs."""
    vals = {("<", tuple(k)): v for k, v in (values or {}).items()}
    return make_structure(chain, elements, vals, signature=SIG_LT, default=default, name=name)


def _require_compatible(m: GradedStructure, n: GradedStructure):
    if m.chain != n.chain:
        raise ValueError("structures are valued on different chains")
    if m.signature != n.signature:
        raise ValueError("structures have different signatures")


def is_substructure(m: GradedStructure, n: GradedStructure) -> bool:
    """Universe containment with equal function values and atomic values.

    Equality of atomic values extends to every quantifier-free formula
    by compositionality, so checking atoms is sufficient.
    """
    _require_compatible(m, n)
    big = set(n.universe)
    if any(e not in big for e in m.universe):
        return False
    for fname, arity in m.signature.functions:
        fm, fn = m.func_interp[fname], n.func_interp[fname]
        for t in itertools.product(m.universe, repeat=arity):
            if fm[t] != fn[t]:
                return False
    for pname, arity in m.signature.predicates:
        pm, pn = m.pred_interp[pname], n.pred_interp[pname]
        for t in itertools.product(m.universe, repeat=arity):
            if pm[t] != pn[t]:
                return False
    return True


def is_embedding(mor: Morphism) -> bool:
    m, n, f = mor.source, mor.target, mor.mapping
    _require_compatible(m, n)
    if set(f) != set(m.universe):
        return False
    images = list(f.values())
    targets = set(n.universe)
    if len(set(images)) != len(images) or any(v not in targets for v in images):
        return False
    for fname, arity in m.signature.functions:
        fm, fn = m.func_interp[fname], n.func_interp[fname]
        for t in itertools.product(m.universe, repeat=arity):
            if f[fm[t]] != fn[tuple(f[e] for e in t)]:
                return False
    for pname, arity in m.signature.predicates:
        pm, pn = m.pred_interp[pname], n.pred_interp[pname]
        for t in itertools.product(m.universe, repeat=arity):
            if pm[t] != pn[tuple(f[e] for e in t)]:
                return False
    return True


def _consistent_extension(m, n, partial, new_src, new_dst) -> bool:
    """Check atomic values on all tuples over dom(partial) + new_src that involve new_src."""
    assigned = list(partial) + [new_src]
    trial = dict(partial)
    trial[new_src] = new_dst
    for pname, arity in m.signature.predicates:
        pm, pn = m.pred_interp[pname], n.pred_interp[pname]
        for t in itertools.product(assigned, repeat=arity):
            if new_src not in t:
                continue
            if pm[t] != pn[tuple(trial[e] for e in t)]:
                return False
    return True


def _embedding_search(m, n, seed, order, limit, results):
    """Backtracking over injective maps in deterministic order."""
    if len(seed) == len(m.universe):
        mor = Morphism(m, n, dict(seed))
        if is_embedding(mor):
            results.append(mor)
        return limit is None or len(results) < limit
    src = order[len(seed)]
    used = set(seed.values())
    for dst in n.universe:
        if dst in used:
            continue
        if not _consistent_extension(m, n, seed, src, dst):
            continue
        seed[src] = dst
        more = _embedding_search(m, n, seed, order, limit, results)
        del seed[src]
        if not more:
            return False
    return True


def find_embeddings(m: GradedStructure, n: GradedStructure, limit: int | None = None) -> list[Morphism]:
    """All embeddings of m into n, complete up to ``limit`` results.

    Candidates are explored in universe order on both sides, so the
    result order is stable.
    """
    _require_compatible(m, n)
    if len(m.universe) > len(n.universe):
        return []
    results: list[Morphism] = []
    order = [e for e in m.universe]
    _embedding_search(m, n, {}, order, limit, results)
    return results


def extend_embedding(m: GradedStructure, n: GradedStructure, fixed: dict,
                     limit: int | None = 1) -> list[Morphism]:
    """Embeddings of m into n extending the partial map ``fixed``."""
    _require_compatible(m, n)
    if len(m.universe) > len(n.universe):
        return []
    seed = {}
    targets = set(n.universe)
    for src, dst in fixed.items():
        if src not in m.universe or dst not in targets:
            return []
        seed[src] = dst
    if len(set(seed.values())) != len(seed):
        return []
    # Validate the seed on atoms among already-fixed elements.
    fixed_elems = list(seed)
    for pname, arity in m.signature.predicates:
        pm, pn = m.pred_interp[pname], n.pred_interp[pname]
        for t in itertools.product(fixed_elems, repeat=arity):
            if pm[t] != pn[tuple(seed[e] for e in t)]:
                return []
    order = list(seed) + [e for e in m.universe if e not in seed]
    results: list[Morphism] = []
    _embedding_search(m, n, seed, order, limit, results)
    return results


def is_isomorphic(m: GradedStructure, n: GradedStructure) -> Morphism | None:
    """An onto embedding between m and n, or None."""
    if len(m.universe) != len(n.universe):
        return None
    found = find_embeddings(m, n, limit=1)
    return found[0] if found else None


def _element_profile(m: GradedStructure, eid: str):
    """An isomorphism-invariant fingerprint of one element."""
    prof = []
    for pname, arity in m.signature.predicates:
        interp = m.pred_interp[pname]
        prof.append(interp[(eid,) * arity])
        for pos in range(arity):
            vals = sorted(
                v for t, v in interp.items() if t[pos] == eid
            )
            prof.append(tuple(vals))
    for fname, arity in m.signature.functions:
        interp = m.func_interp[fname]
        prof.append(1 if interp.get((eid,) * arity) == eid else 0)
        prof.append(sum(1 for v in interp.values() if v == eid))
    return tuple(prof)


def _serialize_under(m: GradedStructure, perm: tuple[str, ...]):
    index = {e: i for i, e in enumerate(perm)}
    parts = [len(perm)]
    for pname, arity in m.signature.predicates:
        interp = m.pred_interp[pname]
        parts.append(tuple(
            interp[tuple(perm[i] for i in idx)]
            for idx in itertools.product(range(len(perm)), repeat=arity)
        ))
    for fname, arity in m.signature.functions:
        interp = m.func_interp[fname]
        parts.append(tuple(
            index[interp[tuple(perm[i] for i in idx)]]
            for idx in itertools.product(range(len(perm)), repeat=arity)
        ))
    return tuple(parts)


def canonical_form(m: GradedStructure) -> bytes:
    """A total isomorphism invariant: equal forms iff isomorphic.

    Minimizes the serialized interpretation tables over element
    orderings.  Elements are first grouped by an invariant profile and
    only orderings listing the profile groups in sorted profile order
    are tried; the grouping is itself invariant, so the minimum over
    this restricted set is still a complete invariant.
    """
    groups: dict = {}
    for e in m.universe:
        groups.setdefault(_element_profile(m, e), []).append(e)
    ordered_groups = [groups[k] for k in sorted(groups.keys(), key=repr)]
    best = None
    for perm_parts in itertools.product(*(itertools.permutations(g) for g in ordered_groups)):
        perm = tuple(itertools.chain.from_iterable(perm_parts))
        key = _serialize_under(m, perm)
        if best is None or key < best:
            best = key
    return repr(best).encode("utf-8")


def generated_substructure(m: GradedStructure, generators) -> GradedStructure:
    """Smallest substructure containing the generators, closed under functions."""
    gens = list(generators)
    members = set()
    for g in gens:
        if g not in m.universe:
            raise ValueError(f"generator {g!r} not in universe")
        members.add(g)
    changed = True
    while changed:
        changed = False
        for fname, arity in m.signature.functions:
            interp = m.func_interp[fname]
            for t in itertools.product(sorted(members, key=m.index), repeat=arity):
                v = interp[t]
                if v not in members:
                    members.add(v)
                    changed = True
    return restrict(m, members)


def restrict(m: GradedStructure, elements) -> GradedStructure:
    """Induced substructure on a subset closed under functions."""
    keep = set(elements)
    for e in keep:
        if e not in m.universe:
            raise ValueError(f"element {e!r} not in universe")
    universe = tuple(e for e in m.universe if e in keep)
    pred_interp = {}
    for pname, arity in m.signature.predicates:
        interp = m.pred_interp[pname]
        pred_interp[pname] = {
            t: interp[t] for t in itertools.product(universe, repeat=arity)
        }
    func_interp = {}
    for fname, arity in m.signature.functions:
        interp = m.func_interp[fname]
        table = {}
        for t in itertools.product(universe, repeat=arity):
            v = interp[t]
            if v not in keep:
                raise ValueError(f"subset not closed under {fname!r}: {t} -> {v}")
            table[t] = v
        func_interp[fname] = table
    return GradedStructure(m.chain, m.signature, universe, pred_interp, func_interp, name=m.name)


def rename(m: GradedStructure, mapping: dict) -> GradedStructure:
    """Relabel elements; ids not in the mapping are kept."""
    full = {e: mapping.get(e, e) for e in m.universe}
    if len(set(full.values())) != len(full):
        raise ValueError("renaming is not injective")
    universe = tuple(full[e] for e in m.universe)
    pred_interp = {
        pname: {tuple(full[e] for e in t): v for t, v in interp.items()}
        for pname, interp in m.pred_interp.items()
    }
    func_interp = {
        fname: {tuple(full[e] for e in t): full[v] for t, v in interp.items()}
        for fname, interp in m.func_interp.items()
    }
    return GradedStructure(m.chain, m.signature, universe, pred_interp, func_interp, name=m.name)


def fresh_names(base: str, count: int, taken) -> list[str]:
    """Deterministic ids base0, base1, ... skipping anything in taken."""
    taken = set(taken)
    out = []
    i = 0
    while len(out) < count:
        cand = f"{base}{i}"
        if cand not in taken:
            out.append(cand)
            taken.add(cand)
        i += 1
    return out


def age(m: GradedStructure, k: int) -> set[bytes]:
    """Canonical forms of all substructures generated by at most k elements."""
    if k < 1:
        raise ValueError("k must be at least 1")
    forms = set()
    for size in range(1, min(k, len(m.universe)) + 1):
        for subset in itertools.combinations(m.universe, size):
            forms.add(canonical_form(generated_substructure(m, subset)))
    return forms


def union_of_chain(structures) -> GradedStructure:
    """Union of a verified substructure chain (its last element)."""
    structures = list(structures)
    if not structures:
        raise ValueError("empty chain of structures")
    for i in range(len(structures) - 1):
        if not is_substructure(structures[i], structures[i + 1]):
            raise NotAChainError(i)
    return structures[-1]


def free_union(m1: GradedStructure, m2: GradedStructure, cross_value: int) -> GradedStructure:
    """Disjoint union with every mixed tuple valued ``cross_value``.

    Only defined for relational signatures; m2 is renamed away from m1
    if their universes overlap.
    """
    _require_compatible(m1, m2)
    if m1.signature.functions:
        raise ValueError("free union is not defined for signatures with functions")
    m1.chain.check_rank(cross_value)
    overlap = set(m1.universe) & set(m2.universe)
    if overlap:
        taken = set(m1.universe) | set(m2.universe)
        news = fresh_names("u", len(overlap), taken)
        m2 = rename(m2, dict(zip(sorted(overlap, key=m2.index), news)))
    universe = m1.universe + m2.universe
    part1 = set(m1.universe)
    pred_interp = {}
    for pname, arity in m1.signature.predicates:
        i1, i2 = m1.pred_interp[pname], m2.pred_interp[pname]
        interp = {}
        for t in itertools.product(universe, repeat=arity):
            inside1 = all(e in part1 for e in t)
            inside2 = all(e not in part1 for e in t)
            if inside1:
                interp[t] = i1[t]
            elif inside2:
                interp[t] = i2[t]
            else:
                interp[t] = cross_value
        pred_interp[pname] = interp
    return GradedStructure(m1.chain, m1.signature, universe, pred_interp, {}, name=m1.name)


# --- file format ---


def structure_to_text(m: GradedStructure, chain_ref: str | None = None) -> str:
    """Serialize to the line format; deterministic byte-for-byte.

    The default rank is the most frequent value (ties to the smallest),
    and only non-default tuples get explicit lines.  Signatures other
    than the standard one-binary-predicate one are declared on a
    ``predicates`` line; function symbols are not supported by the
    format.
    """
    if m.signature.functions:
        raise FileFormatError("structure files do not support function symbols")
    ref = chain_ref if chain_ref is not None else m.chain.name
    lines = [f"structure {m.name} chain={ref}"]
    if m.signature != SIG_LT:
        decl = " ".join(f"{p}:{a}" for p, a in m.signature.predicates)
        lines.append(f"predicates {decl}")
    lines.append("elements " + " ".join(m.universe) if m.universe else "elements")
    counts: dict[int, int] = {}
    for pname, _ in m.signature.predicates:
        for v in m.pred_interp[pname].values():
            counts[v] = counts.get(v, 0) + 1
    default = min(sorted(counts, key=lambda v: (-counts[v], v))[:1] or [0])
    lines.append(f"default {default}")
    for pname, arity in m.signature.predicates:
        interp = m.pred_interp[pname]
        for t in itertools.product(m.universe, repeat=arity):
            v = interp[t]
            if v != default:
                lines.append(f"{pname} {' '.join(t)} = {v}")
    return "\n".join(lines) + "\n"


def structure_from_text(text: str, chain: Chain | None = None,
                        resolver=None) -> GradedStructure:
    """Parse the structure line format.

    The chain is taken from the header reference via ``resolver``
    unless one is passed in directly.  Unknown line shapes and values
    for undeclared elements are rejected.
    """
    lines = [ln for ln in (raw.strip() for raw in text.splitlines()) if ln]
    if not lines:
        raise FileFormatError("empty structure file")
    head = lines[0].split()
    if len(head) != 3 or head[0] != "structure" or not head[2].startswith("chain="):
        raise FileFormatError(f"bad structure header: {lines[0]!r}")
    name = head[1]
    ref = head[2][len("chain="):]
    if chain is None:
        if resolver is None:
            from .algebra import resolve_chain as resolver  # noqa: PLC0415
        chain = resolver(ref)
    idx = 1
    signature = SIG_LT
    if idx < len(lines) and lines[idx].startswith("predicates"):
        decls = lines[idx].split()[1:]
        preds = []
        for d in decls:
            pname, _, ar = d.rpartition(":")
            if not pname or not ar.isdigit():
                raise FileFormatError(f"bad predicate declaration: {d!r}")
            preds.append((pname, int(ar)))
        signature = Signature(predicates=tuple(preds))
        idx += 1
    if idx >= len(lines) or lines[idx].split()[:1] != ["elements"]:
        raise FileFormatError("missing elements line")
    elements = tuple(lines[idx].split()[1:])
    idx += 1
    if idx >= len(lines) or not lines[idx].startswith("default "):
        raise FileFormatError("missing default line")
    try:
        default = int(lines[idx].split()[1])
    except (IndexError, ValueError):
        raise FileFormatError(f"bad default line: {lines[idx]!r}") from None
    chain.check_rank(default)
    idx += 1
    values = {}
    known = set(elements)
    arities = dict(signature.predicates)
    for ln in lines[idx:]:
        parts = ln.split()
        if len(parts) < 4 or parts[-2] != "=":
            raise FileFormatError(f"bad value line: {ln!r}")
        pname = parts[0]
        if pname not in arities:
            raise FileFormatError(f"unknown predicate {pname!r} in line {ln!r}")
        elems = tuple(parts[1:-2])
        if len(elems) != arities[pname]:
            raise FileFormatError(f"wrong arity for {pname!r} in line {ln!r}")
        for e in elems:
            if e not in known:
                raise FileFormatError(f"undeclared element {e!r} in line {ln!r}")
        try:
            rank = int(parts[-1])
        except ValueError:
            raise FileFormatError(f"bad rank in line {ln!r}") from None
        chain.check_rank(rank)
        values[(pname, elems)] = rank
    return make_structure(chain, elements, values, signature=signature,
                          default=default, name=name)
