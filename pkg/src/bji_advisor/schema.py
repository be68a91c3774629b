"""Star-schema catalog: tables, attributes, joins, page arithmetic.

Catalogs load from a JSON document with top-level keys ``page_size``,
``rowid_bits``, ``tables``, ``attributes`` and ``joins``.  Explicit page counts
in the catalog win over the ceil(rows*width/page_size) estimate so benchmark
statistics can be reproduced exactly.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from typing import Optional

log = logging.getLogger(__name__)

DEFAULT_ROWID_BITS = 80  # 10-byte row identifier


class CatalogError(ValueError):
    """Raised when a catalog document violates a validation rule."""


@dataclass(frozen=True)
class TableStats:
    name: str
    role: str  # "fact" | "dimension"
    rows: int
    tuple_width: int
    pages: Optional[int] = None

    def __post_init__(self) -> None:
        if self.role not in ("fact", "dimension"):
            raise CatalogError(f"table {self.name}: unknown role {self.role!r}")
        if self.rows < 0:
            raise CatalogError(f"table {self.name}: negative row count")
        if self.tuple_width <= 0:
            raise CatalogError(f"table {self.name}: tuple width must be positive")
        if self.pages is not None and self.rows > 0 and self.pages < 1:
            raise CatalogError(f"table {self.name}: pages must be >= 1")


@dataclass(frozen=True)
class AttributeStats:
    table: str
    name: str
    cardinality: int
    is_key: bool = False

    def __post_init__(self) -> None:
        if self.cardinality < 1:
            raise CatalogError(f"attribute {self.table}.{self.name}: cardinality < 1")

    @property
    def qualified(self) -> str:
        return f"{self.table}.{self.name}"


@dataclass(frozen=True)
class Join:
    fact_attr: str  # qualified "table.attr"
    dim_attr: str


def pages_of(t: TableStats, page_size: int) -> int:
    """Explicit page count when supplied, else ceil(rows * width / page_size)."""
    if page_size <= 0:
        raise CatalogError("page size must be positive")
    if t.pages is not None:
        return t.pages
    if t.rows == 0:
        return 0
    return math.ceil(t.rows * t.tuple_width / page_size)


@dataclass(frozen=True)
class StarSchema:
    tables: dict[str, TableStats]
    attributes: tuple[AttributeStats, ...]  # catalog declaration order
    joins: tuple[Join, ...]
    page_size: int
    rowid_bits: int = DEFAULT_ROWID_BITS

    def __post_init__(self) -> None:
        if self.page_size <= 0:
            raise CatalogError("missing or invalid page_size")
        if self.rowid_bits <= 0:
            raise CatalogError("rowid_bits must be positive")
        facts = [t for t in self.tables.values() if t.role == "fact"]
        if len(facts) != 1:
            raise CatalogError(
                f"exactly one fact table required, found {[t.name for t in facts]}")
        index = {}
        for a in self.attributes:
            if a.table not in self.tables:
                raise CatalogError(f"attribute {a.qualified}: unknown table {a.table}")
            if a.qualified.lower() in index:
                raise CatalogError(f"duplicate attribute {a.qualified}")
            index[a.qualified.lower()] = a
            owner = self.tables[a.table]
            if owner.rows > 0 and a.cardinality > owner.rows:
                # the worked-example catalog legitimately exceeds this bound
                log.warning("attribute %s: cardinality %d exceeds table rows %d",
                            a.qualified, a.cardinality, owner.rows)
        object.__setattr__(self, "_by_qualified", index)
        fact = facts[0]
        for j in self.joins:
            fa = index.get(j.fact_attr.lower())
            da = index.get(j.dim_attr.lower())
            if fa is None or da is None:
                raise CatalogError(f"join {j.fact_attr} = {j.dim_attr}: unknown endpoint")
            if fa.table == da.table:
                raise CatalogError(f"join {j.fact_attr} = {j.dim_attr} is self-referential")
            if self.tables[da.table].role != "dimension":
                raise CatalogError(f"join dim side {j.dim_attr} is not on a dimension")
            if not da.is_key:
                raise CatalogError(f"join dim side {j.dim_attr} must be a key")

    # -- lookups -----------------------------------------------------------
    @property
    def fact(self) -> TableStats:
        return next(t for t in self.tables.values() if t.role == "fact")

    def attribute(self, qualified: str) -> AttributeStats:
        a = self._by_qualified.get(qualified.lower())
        if a is None:
            raise CatalogError(f"unknown attribute {qualified}")
        return a

    def find_attribute(self, name: str, table: Optional[str] = None) -> AttributeStats:
        """Resolve a (possibly unqualified) column name, case-insensitively."""
        if table is not None:
            return self.attribute(f"{table}.{name}")
        hits = [a for a in self.attributes if a.name.lower() == name.lower()]
        if not hits:
            raise CatalogError(f"unknown attribute {name}")
        if len(hits) > 1:
            raise CatalogError(
                f"ambiguous attribute {name}: " + ", ".join(a.qualified for a in hits))
        return hits[0]

    def has_attribute(self, name: str) -> bool:
        return any(a.name.lower() == name.lower() for a in self.attributes)

    def table_pages(self, name: str) -> int:
        return pages_of(self.tables[name], self.page_size)

    def is_indexable(self, a: AttributeStats) -> bool:
        """Non-key attribute of a dimension table."""
        return (not a.is_key) and self.tables[a.table].role == "dimension"

    def dim_joins(self, dim: str) -> list[Join]:
        """Join links whose key side lives on ``dim``."""
        return [j for j in self.joins if self.attribute(j.dim_attr).table == dim]

    def join_path(self, dim: str) -> Optional[list[Join]]:
        """Chain of join links from the fact table to ``dim`` (BFS), if any."""
        target = dim
        # edges: source table -> (join, dest table)
        adj: dict[str, list[tuple[Join, str]]] = {}
        for j in self.joins:
            src = self.attribute(j.fact_attr).table
            dst = self.attribute(j.dim_attr).table
            adj.setdefault(src, []).append((j, dst))
        frontier = [(self.fact.name, [])]
        seen = {self.fact.name}
        while frontier:
            table, path = frontier.pop(0)
            if table == target:
                return path
            for j, dst in adj.get(table, []):
                if dst not in seen:
                    seen.add(dst)
                    frontier.append((dst, path + [j]))
        return None

    def to_document(self) -> dict:
        return {
            "page_size": self.page_size,
            "rowid_bits": self.rowid_bits,
            "tables": [
                {"name": t.name, "role": t.role, "rows": t.rows,
                 "tuple_width": t.tuple_width,
                 **({"pages": t.pages} if t.pages is not None else {})}
                for t in self.tables.values()
            ],
            "attributes": [
                {"table": a.table, "name": a.name, "cardinality": a.cardinality,
                 "is_key": a.is_key}
                for a in self.attributes
            ],
            "joins": [{"fact_attr": j.fact_attr, "dim_attr": j.dim_attr}
                      for j in self.joins],
        }


def load_catalog(text: str) -> StarSchema:
    """Parse and fully validate a JSON catalog document."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CatalogError(f"catalog is not valid JSON: {exc}") from exc
    if "page_size" not in doc:
        raise CatalogError("missing page_size")
    tables: dict[str, TableStats] = {}
    for t in doc.get("tables", []):
        ts = TableStats(name=t["name"], role=t["role"], rows=int(t["rows"]),
                        tuple_width=int(t["tuple_width"]),
                        pages=int(t["pages"]) if "pages" in t else None)
        if ts.name in tables:
            raise CatalogError(f"duplicate table {ts.name}")
        tables[ts.name] = ts
    attrs: list[AttributeStats] = []
    for a in doc.get("attributes", []):
        table = a["table"]
        if table not in tables:
            raise CatalogError(f"attribute {table}.{a['name']}: unknown table {table}")
        card = a.get("cardinality")
        if card is None:
            if a.get("is_key"):
                card = max(1, tables[table].rows)  # keys default to row count
            else:
                raise CatalogError(
                    f"attribute {table}.{a['name']}: cardinality required")
        attrs.append(AttributeStats(table=table, name=a["name"],
                                    cardinality=int(card),
                                    is_key=bool(a.get("is_key", False))))
    joins = tuple(Join(j["fact_attr"], j["dim_attr"]) for j in doc.get("joins", []))
    return StarSchema(tables=tables, attributes=tuple(attrs), joins=joins,
                      page_size=int(doc["page_size"]),
                      rowid_bits=int(doc.get("rowid_bits", DEFAULT_ROWID_BITS)))


def load_catalog_file(path) -> StarSchema:
    with open(path, "r", encoding="utf-8") as fh:
        return load_catalog(fh.read())
