"""Chain constructors, axiom validation, and the residuation law."""

import random

import pytest

from gradedmodels.algebra import (
    chain_from_text,
    chain_to_text,
    make_from_table,
    make_godel,
    make_lukasiewicz,
    resolve_chain,
)
from gradedmodels.errors import ChainTableError, FileFormatError

from conftest import U3_ROWS


def res_by_scan(chain, a, c):
    """Independent oracle: largest b with a*b <= c, by direct scan."""
    best = None
    for b in range(chain.size):
        if chain.conj_table[a][b] <= c:
            best = b
    return best


def test_boolean_chain_forced():
    ch = make_lukasiewicz(2)
    assert ch.conj(1, 1) == 1
    assert ch.conj(1, 0) == 0
    assert ch.one == 1 and ch.zero == 0


def test_luk3_defining_formula():
    ch = make_lukasiewicz(3)
    assert ch.conj(1, 1) == max(0, 1 + 1 - 2) == 0
    assert ch.conj(2, 1) == 1


def test_luk3_res_matches_scan_oracle():
    ch = make_lukasiewicz(3)
    assert res_by_scan(ch, 2, 1) == 1
    assert ch.res(2, 1) == 1
    for a in ch.ranks():
        for c in ch.ranks():
            assert ch.res(a, c) == res_by_scan(ch, a, c)


def test_luk3_res_from_zero_is_top():
    ch = make_lukasiewicz(3)
    for c in ch.ranks():
        assert ch.res(0, c) == 2


def test_luk3_filter():
    ch = make_lukasiewicz(3)
    assert ch.in_filter(2)
    assert not ch.in_filter(1)


def test_godel_basics():
    g3 = make_godel(3)
    assert g3.conj(2, 1) == 1
    assert g3.res(2, 1) == res_by_scan(g3, 2, 1) == 1
    assert g3.res(1, 2) == res_by_scan(g3, 1, 2) == 2
    g4 = make_godel(4)
    for a in g4.ranks():
        for c in g4.ranks():
            if a <= c:
                assert g4.res(a, c) == g4.top


def test_u3_table_is_valid(u3):
    assert u3.one == 1
    assert u3.res(2, 1) == res_by_scan(u3, 2, 1) == 0


def test_u3_wrong_one_reports_neutrality():
    with pytest.raises(ChainTableError) as err:
        make_from_table(3, U3_ROWS, one=2, zero=0)
    assert err.value.axiom == "neutrality"
    # the witness really does violate neutrality of the claimed unit
    a, x = err.value.witness
    assert a == 2 and U3_ROWS[a][x] != x


def test_u3_row_swap_reports_monotonicity():
    rows = [list(r) for r in U3_ROWS]
    rows[2][0], rows[2][1] = rows[2][1], rows[2][0]
    with pytest.raises(ChainTableError) as err:
        make_from_table(3, rows, one=1, zero=0)
    assert err.value.axiom == "monotonicity"


def test_too_small_chain_rejected():
    with pytest.raises(ValueError):
        make_lukasiewicz(1)
    with pytest.raises(ValueError):
        make_godel(0)
    with pytest.raises(ValueError):
        make_from_table(1, [[0]], one=0, zero=0)


def test_out_of_range_rank_rejected(luk3):
    with pytest.raises(ValueError):
        luk3.conj(3, 0)
    with pytest.raises(ValueError):
        luk3.res(0, -1)
    with pytest.raises(ValueError):
        luk3.in_filter(5)


def mini_axiom_failures(size, table, one):
    """Test-side oracle listing every axiom the table actually violates."""
    rng = range(size)
    failed = set()
    if any(table[one][x] != x for x in rng):
        failed.add("neutrality")
    for a in rng:
        for b in range(size - 1):
            if table[a][b] > table[a][b + 1] or table[b][a] > table[b + 1][a]:
                failed.add("monotonicity")
    if any(table[a][b] != table[b][a] for a in rng for b in rng):
        failed.add("commutativity")
    for a in rng:
        for b in rng:
            for c in rng:
                if table[table[a][b]][c] != table[a][table[b][c]]:
                    failed.add("associativity")
    if any(table[a][0] != 0 for a in rng):
        failed.add("residuation")
    return failed


def test_twenty_mutated_tables_rejected_with_correct_axiom(luk4, u3):
    """Mutations of valid tables are rejected naming a genuinely failed axiom."""
    rng = random.Random(20240501)
    bases = [luk4, u3, make_godel(4)]
    rejected = 0
    tried = 0
    while rejected < 20 and tried < 500:
        tried += 1
        base = bases[tried % len(bases)]
        rows = [list(r) for r in base.conj_table]
        i = rng.randrange(base.size)
        j = rng.randrange(base.size)
        delta = rng.choice([-1, 1])
        rows[i][j] = (rows[i][j] + delta) % base.size
        actually_failed = mini_axiom_failures(base.size, rows, base.one)
        if not actually_failed:
            continue
        with pytest.raises(ChainTableError) as err:
            make_from_table(base.size, rows, one=base.one, zero=base.zero)
        assert err.value.axiom in actually_failed
        rejected += 1
    assert rejected == 20


@pytest.mark.parametrize("maker", [
    lambda: make_lukasiewicz(2),
    lambda: make_lukasiewicz(3),
    lambda: make_lukasiewicz(4),
    lambda: make_lukasiewicz(6),
    lambda: make_godel(3),
    lambda: make_godel(4),
    lambda: make_godel(6),
    lambda: make_from_table(3, U3_ROWS, one=1, zero=0),
])
def test_adjunction_all_triples(maker):
    ch = maker()
    for a in ch.ranks():
        for b in ch.ranks():
            for c in ch.ranks():
                assert (ch.conj(a, b) <= c) == (b <= ch.res(a, c))


@pytest.mark.parametrize("maker", [
    lambda: make_lukasiewicz(4),
    lambda: make_godel(4),
    lambda: make_from_table(3, U3_ROWS, one=1, zero=0),
])
def test_res_reflexivity_and_order_law(maker):
    ch = maker()
    for a in ch.ranks():
        assert ch.res(a, a) >= ch.one
        for b in ch.ranks():
            assert (a <= b) == ch.in_filter(ch.res(a, b))


def test_linearity_sanity(u3, luk4):
    for ch in (u3, luk4):
        one = ch.one
        for a in ch.ranks():
            for b in ch.ranks():
                lhs = max(min(ch.res(a, b), one), min(ch.res(b, a), one))
                assert lhs == one


@pytest.mark.parametrize("n", [2, 3, 5])
def test_builtin_chains_roundtrip_through_validator(n):
    for built in (make_lukasiewicz(n), make_godel(n)):
        again = make_from_table(built.size, built.conj_table, one=built.one, zero=built.zero)
        assert again.conj_table == built.conj_table
        assert again.res_table == built.res_table


def test_chain_file_roundtrip(tmp_path, u3):
    text = chain_to_text(u3)
    assert chain_from_text(text) == u3
    path = tmp_path / "u3.chain"
    path.write_text(text, encoding="utf-8")
    loaded = resolve_chain(str(path))
    assert loaded == u3
    assert loaded.name == str(path)


def test_chain_file_rejects_garbage(u3):
    text = chain_to_text(u3) + "0 0 0\n"
    with pytest.raises(FileFormatError):
        chain_from_text(text)
    with pytest.raises(FileFormatError):
        chain_from_text("chain broken\n")
    with pytest.raises(FileFormatError):
        chain_from_text("chain x 2 one=1 zero=0\n0 0\n0 x\n")


def test_resolve_chain_refs():
    assert resolve_chain("bool").size == 2
    assert resolve_chain("luk:4").conj(3, 3) == 3
    assert resolve_chain("godel:3").conj(2, 1) == 1
    with pytest.raises(FileFormatError):
        resolve_chain("luk:x")
    with pytest.raises(FileFormatError):
        resolve_chain("no-such-chain")
