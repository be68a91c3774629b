"""Reference execution engine for bitmap join indexes on tiny tables.

This is a correctness oracle and demo, not a storage engine: tables are
in-memory lists of tuples, bitmaps are tuples of 0/1 over fact row positions.
A bitmap join index on a dimension attribute keeps, per attribute value, the
bitmap of fact rows whose foreign key joins a dimension row carrying that
value.  Evaluation ORs bitmaps within one attribute (any of these values) and
ANDs across attributes.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence


class EngineError(ValueError):
    """Bad table data or an evaluation over a missing index."""


@dataclass(frozen=True)
class MiniTable:
    name: str
    columns: tuple[str, ...]
    rows: tuple[tuple, ...]

    def __post_init__(self) -> None:
        if len(set(c.lower() for c in self.columns)) != len(self.columns):
            raise EngineError(f"table {self.name}: duplicate column names")
        for r in self.rows:
            if len(r) != len(self.columns):
                raise EngineError(f"table {self.name}: row arity mismatch: {r!r}")

    @classmethod
    def from_csv(cls, text: str, name: str) -> "MiniTable":
        reader = csv.reader(io.StringIO(text))
        try:
            header = next(reader)
        except StopIteration:
            raise EngineError(f"table {name}: empty CSV") from None
        rows = tuple(tuple(r) for r in reader if r)
        return cls(name=name, columns=tuple(h.strip() for h in header), rows=rows)

    def col(self, name: str) -> int:
        for i, c in enumerate(self.columns):
            if c.lower() == name.lower():
                return i
        raise EngineError(f"table {self.name}: no column {name!r}")

    def values(self, name: str) -> list:
        i = self.col(name)
        return [r[i] for r in self.rows]


Bitmap = tuple[int, ...]


@dataclass(frozen=True)
class BitmapJoinIndex:
    fact: str
    dimension: str
    attribute: str                      # dimension attribute name
    bitmaps: Mapping[object, Bitmap]    # attribute value -> fact-row bitmap
    n_rows: int

    def bitmap_for(self, values: Iterable[object]) -> Bitmap:
        """OR of the bitmaps of the given values (absent value = all zeros)."""
        acc = [0] * self.n_rows
        for v in values:
            bm = self.bitmaps.get(v)
            if bm:
                acc = [a | b for a, b in zip(acc, bm)]
        return tuple(acc)


def build_bji(fact: MiniTable, dim: MiniTable, fact_fk: str, dim_key: str,
              dim_attr: str) -> BitmapJoinIndex:
    """Precompute the fact-dimension join as per-value bitmaps.

    Duplicate dimension keys are an error; a fact foreign key matching no
    dimension row yields zero bits in every bitmap.
    """
    keys = dim.values(dim_key)
    if len(set(keys)) != len(keys):
        dupes = sorted({k for k in keys if keys.count(k) > 1})
        raise EngineError(f"dimension {dim.name}: duplicate keys {dupes!r}")
    attr_of_key = dict(zip(keys, dim.values(dim_attr)))
    fk = fact.values(fact_fk)
    n = len(fact.rows)
    bitmaps: dict[object, list[int]] = {v: [0] * n
                                        for v in set(attr_of_key.values())}
    for pos, k in enumerate(fk):
        v = attr_of_key.get(k)
        if v is not None:
            bitmaps[v][pos] = 1
    return BitmapJoinIndex(fact=fact.name, dimension=dim.name,
                           attribute=dim_attr,
                           bitmaps={v: tuple(bm) for v, bm in bitmaps.items()},
                           n_rows=n)


def evaluate(indexes: Mapping[str, BitmapJoinIndex],
             conditions: Mapping[str, Sequence[object]]) -> Bitmap:
    """Fact rows matching all conditions; per attribute, any listed value.

    ``conditions`` maps an attribute name to its accepted values.  Every
    attribute must have an index; sizes must agree.
    """
    if not conditions:
        raise EngineError("no conditions to evaluate")
    acc: list[int] | None = None
    for attr, values in sorted(conditions.items()):
        idx = indexes.get(attr)
        if idx is None:
            raise EngineError(f"no bitmap join index for attribute {attr!r}")
        bm = idx.bitmap_for(values)
        if acc is None:
            acc = list(bm)
        elif len(bm) != len(acc):
            raise EngineError("bitmap length mismatch across indexes")
        else:
            acc = [a & b for a, b in zip(acc, bm)]
    assert acc is not None
    return tuple(acc)


def selected_rows(bitmap: Bitmap) -> list[int]:
    return [i for i, b in enumerate(bitmap) if b]


def naive_join_oracle(fact: MiniTable, dims: Mapping[str, tuple[MiniTable, str, str]],
                      conditions: Mapping[str, Sequence[object]]) -> Bitmap:
    """Answer the same question by actually joining, for cross-checking.

    ``dims`` maps an attribute name to (dimension table, fact FK column,
    dimension key column).
    """
    n = len(fact.rows)
    acc = [1] * n
    for attr, values in conditions.items():
        if attr not in dims:
            raise EngineError(f"no join route for attribute {attr!r}")
        dim, fact_fk, dim_key = dims[attr]
        keymap = dict(zip(dim.values(dim_key), dim.values(attr)))
        fk = fact.values(fact_fk)
        accepted = set(values)
        for pos in range(n):
            if keymap.get(fk[pos]) not in accepted:
                acc[pos] = 0
    return tuple(acc)


# ---------------------------------------------------------------------------
# demo instance: a 12-row sales fact joined to customer, product and time
# dimensions; row 1 belongs to a Poitiers customer
# ---------------------------------------------------------------------------

DEMO_CLIENT_CSV = """\
CID,Nom,Ville
1,Dupont,Poitiers
2,Martin,Paris
3,Bernard,Nantes
4,Petit,Poitiers
"""

DEMO_PRODUIT_CSV = """\
PID,Type
10,Jouet
11,Beaute
12,Cuisine
"""

DEMO_TEMPS_CSV = """\
TID,Mois
100,Mars
101,Juin
102,Aout
"""

DEMO_VENTES_CSV = """\
RID,CID,PID,TID,Montant
1,1,10,100,120
2,2,11,101,75
3,3,12,100,200
4,4,10,102,40
5,1,11,100,310
6,2,12,101,95
7,3,10,100,60
8,4,11,101,150
9,1,12,102,80
10,2,10,100,220
11,1,11,101,55
12,3,12,100,130
"""


def demo_tables() -> tuple[MiniTable, MiniTable, MiniTable, MiniTable]:
    """(fact, client, produit, temps) for the walkthrough and tests."""
    fact = MiniTable.from_csv(DEMO_VENTES_CSV, "VENTES")
    client = MiniTable.from_csv(DEMO_CLIENT_CSV, "CLIENT")
    produit = MiniTable.from_csv(DEMO_PRODUIT_CSV, "PRODUIT")
    temps = MiniTable.from_csv(DEMO_TEMPS_CSV, "TEMPS")
    return fact, client, produit, temps
