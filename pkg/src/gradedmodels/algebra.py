"""Finite residuated chains of truth values.

A chain holds ranks 0..n-1 ordered as the lattice order, a commutative
monoid operation ``conj`` with neutral element ``one``, the residuum
``res`` derived from it, and the two distinguished constants ``one``
(threshold of the designated filter) and ``zero`` (the falsum constant,
whose position in the chain is unconstrained).  Meet and join are min
and max of ranks.  Chains are immutable and safe to share.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

from .errors import ChainTableError, FileFormatError

__all__ = [
    "Chain",
    "make_lukasiewicz",
    "make_godel",
    "make_from_table",
    "boolean_chain",
    "resolve_chain",
    "chain_from_text",
    "chain_to_text",
]

# Axioms are checked in this fixed order; the first failure is reported.
AXIOM_ORDER = (
    "neutrality",
    "monotonicity",
    "commutativity",
    "associativity",
    "residuation",
)


@dataclass(frozen=True)
class Chain:
    """A validated finite residuated chain.

    ``conj_table[a][b]`` is the monoid operation; ``res_table[a][c]`` is
    the largest b with conj(a, b) <= c, which exists for every a, c once
    the table passes validation.
    """

    size: int
    conj_table: tuple[tuple[int, ...], ...]
    one: int
    zero: int
    name: str = field(default="chain", compare=False)
    res_table: tuple[tuple[int, ...], ...] = field(default=(), compare=False)

    @property
    def bot(self) -> int:
        return 0

    @property
    def top(self) -> int:
        return self.size - 1

    def ranks(self) -> range:
        return range(self.size)

    def check_rank(self, a: int) -> int:
        if not isinstance(a, int) or not 0 <= a < self.size:
            raise ValueError(f"rank {a!r} out of range for chain of size {self.size}")
        return a

    def conj(self, a: int, b: int) -> int:
        return self.conj_table[self.check_rank(a)][self.check_rank(b)]

    def res(self, a: int, c: int) -> int:
        return self.res_table[self.check_rank(a)][self.check_rank(c)]

    def meet(self, a: int, b: int) -> int:
        return min(self.check_rank(a), self.check_rank(b))

    def join(self, a: int, b: int) -> int:
        return max(self.check_rank(a), self.check_rank(b))

    def in_filter(self, a: int) -> bool:
        return self.check_rank(a) >= self.one

    def leq(self, a: int, b: int) -> bool:
        return self.check_rank(a) <= self.check_rank(b)

    def __repr__(self) -> str:
        return f"Chain({self.name!r}, size={self.size}, one={self.one}, zero={self.zero})"


def _find_axiom_failure(size: int, table, one: int) -> tuple[str, tuple, str] | None:
    """Return (axiom, witness, detail) for the first failed axiom, or None.

    The scan follows AXIOM_ORDER so that reported failures are stable.
    """
    rng = range(size)
    for x in rng:
        if table[one][x] != x:
            return ("neutrality", (one, x), f"{one}*{x} = {table[one][x]}, expected {x}")
    for a in rng:
        for b in range(size - 1):
            if table[a][b] > table[a][b + 1]:
                return (
                    "monotonicity",
                    (a, b, b + 1),
                    f"{a}*{b} = {table[a][b]} > {table[a][b + 1]} = {a}*{b + 1}",
                )
            if table[b][a] > table[b + 1][a]:
                return (
                    "monotonicity",
                    (b, b + 1, a),
                    f"{b}*{a} = {table[b][a]} > {table[b + 1][a]} = {b + 1}*{a}",
                )
    for a in rng:
        for b in range(a + 1, size):
            if table[a][b] != table[b][a]:
                return ("commutativity", (a, b), f"{a}*{b} = {table[a][b]} != {table[b][a]} = {b}*{a}")
    for a in rng:
        for b in rng:
            ab = table[a][b]
            row_a = table[a]
            row_ab = table[ab]
            for c in rng:
                if row_ab[c] != row_a[table[b][c]]:
                    return (
                        "associativity",
                        (a, b, c),
                        f"({a}*{b})*{c} = {row_ab[c]} != {row_a[table[b][c]]} = {a}*({b}*{c})",
                    )
    # With monotonicity in place, residua exist iff a*0 = 0 for every a.
    for a in rng:
        if table[a][0] != 0:
            return ("residuation", (a, 0), f"{a}*0 = {table[a][0]} != 0, so res({a}, c) is undefined for small c")
    return None


def _build_res_table(size: int, table) -> tuple[tuple[int, ...], ...]:
    res = []
    for a in range(size):
        row = []
        for c in range(size):
            best = 0
            for b in range(size):
                if table[a][b] <= c:
                    best = b
            row.append(best)
        res.append(tuple(row))
    return tuple(res)


def make_from_table(size: int, conj_table, one: int, zero: int, name: str = "chain") -> Chain:
    """Validate a conjunction table and build a chain from it.

    Validation exhaustively checks neutrality of ``one``, monotonicity,
    commutativity, associativity, and existence of residua, raising
    ChainTableError naming the first failed axiom with a witness.
    """
    if size < 2:
        raise ValueError(f"chain size must be at least 2, got {size}")
    table = tuple(tuple(row) for row in conj_table)
    if len(table) != size or any(len(row) != size for row in table):
        raise ValueError(f"conjunction table must be {size}x{size}")
    for row in table:
        for v in row:
            if not isinstance(v, int) or not 0 <= v < size:
                raise ValueError(f"table entry {v!r} is not a rank below {size}")
    if not 0 <= one < size:
        raise ValueError(f"one={one} is not a rank below {size}")
    if not 0 <= zero < size:
        raise ValueError(f"zero={zero} is not a rank below {size}")
    failure = _find_axiom_failure(size, table, one)
    if failure is not None:
        raise ChainTableError(*failure)
    return Chain(
        size=size,
        conj_table=table,
        one=one,
        zero=zero,
        name=name,
        res_table=_build_res_table(size, table),
    )


def make_lukasiewicz(n: int) -> Chain:
    """Lukasiewicz chain on n ranks: a*b = max(0, a+b-(n-1)), one = top."""
    if n < 2:
        raise ValueError(f"chain size must be at least 2, got {n}")
    table = [[max(0, a + b - (n - 1)) for b in range(n)] for a in range(n)]
    name = "bool" if n == 2 else f"luk:{n}"
    return make_from_table(n, table, one=n - 1, zero=0, name=name)


def make_godel(n: int) -> Chain:
    """Godel chain on n ranks: a*b = min(a, b), one = top."""
    if n < 2:
        raise ValueError(f"chain size must be at least 2, got {n}")
    table = [[min(a, b) for b in range(n)] for a in range(n)]
    return make_from_table(n, table, one=n - 1, zero=0, name=f"godel:{n}")


def boolean_chain() -> Chain:
    """The two-element chain (ranks 0 and 1, one = 1)."""
    return make_lukasiewicz(2)


def chain_to_text(chain: Chain) -> str:
    lines = [f"chain {chain.name} {chain.size} one={chain.one} zero={chain.zero}"]
    for row in chain.conj_table:
        lines.append(" ".join(str(v) for v in row))
    return "\n".join(lines) + "\n"


def chain_from_text(text: str) -> Chain:
    """Parse the line-oriented chain format.

    Header ``chain <name> <n> one=<r> zero=<r>`` followed by n rows of n
    space-separated ranks.  Trailing garbage is rejected.
    """
    lines = [ln for ln in (raw.strip() for raw in text.splitlines()) if ln]
    if not lines:
        raise FileFormatError("empty chain file")
    head = lines[0].split()
    if len(head) != 5 or head[0] != "chain":
        raise FileFormatError(f"bad chain header: {lines[0]!r}")
    name = head[1]
    try:
        size = int(head[2])
    except ValueError:
        raise FileFormatError(f"bad chain size: {head[2]!r}") from None
    params = {}
    for part in head[3:]:
        key, _, val = part.partition("=")
        if key not in ("one", "zero") or not val:
            raise FileFormatError(f"bad chain header field: {part!r}")
        try:
            params[key] = int(val)
        except ValueError:
            raise FileFormatError(f"bad rank in header field: {part!r}") from None
    if set(params) != {"one", "zero"}:
        raise FileFormatError("chain header must set one= and zero= exactly once")
    if len(lines) != 1 + size:
        raise FileFormatError(f"expected {size} table rows, found {len(lines) - 1}")
    table = []
    for i, ln in enumerate(lines[1:]):
        parts = ln.split()
        if len(parts) != size:
            raise FileFormatError(f"table row {i} has {len(parts)} entries, expected {size}")
        try:
            table.append([int(p) for p in parts])
        except ValueError:
            raise FileFormatError(f"non-integer entry in table row {i}: {ln!r}") from None
    return make_from_table(size, table, one=params["one"], zero=params["zero"], name=name)


def resolve_chain(ref: str) -> Chain:
    """Resolve a chain reference: ``bool``, ``luk:<n>``, ``godel:<n>``, or a file path."""
    if ref == "bool":
        return boolean_chain()
    for prefix, maker in (("luk:", make_lukasiewicz), ("godel:", make_godel)):
        if ref.startswith(prefix):
            try:
                n = int(ref[len(prefix):])
            except ValueError:
                raise FileFormatError(f"bad chain reference: {ref!r}") from None
            return maker(n)
    if not os.path.exists(ref):
        raise FileFormatError(f"unknown chain reference and no such file: {ref!r}")
    with open(ref, "r", encoding="utf-8") as fh:
        chain = chain_from_text(fh.read())
    return Chain(
        size=chain.size,
        conj_table=chain.conj_table,
        one=chain.one,
        zero=chain.zero,
        name=ref,
        res_table=chain.res_table,
    )
