"""Canonical sparse LP container and the entity <-> index bookkeeping.

An :class:`LpProblem` is ``min c'x + offset`` subject to one row per
constraint ``a_i x {<=, >=, =} b_i`` and column bounds ``lb <= x <= ub``.
The matrix is held as a triplet stream in assembly order so that two builds
of the same scenario produce identical arrays.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Any, Dict, Hashable, List, Optional, Tuple

import numpy as np
import scipy.sparse as sp

LE, GE, EQ = "L", "G", "E"
SENSES = (LE, GE, EQ)

Key = Tuple[Hashable, ...]


class VariableIndex:
    """Bidirectional map between model entities and LP column/row ids.

    Column keys are ``(name, *subscripts)``, e.g. ``("g", "AT", 3, "ng_cc", "el", "gas")``.
    Row keys are ``(family, *subscripts)``, e.g. ``("clear_el", "AT", 3)``.
    """

    def __init__(self) -> None:
        self._col_keys: List[Key] = []
        self._col_ids: Dict[Key, int] = {}
        self._row_keys: List[Key] = []
        self._row_ids: Dict[Key, int] = {}

    def add_col(self, key: Key) -> int:
        if key in self._col_ids:
            raise KeyError(f"duplicate column {key!r}")
        self._col_ids[key] = len(self._col_keys)
        self._col_keys.append(key)
        return self._col_ids[key]

    def add_row(self, key: Key) -> int:
        if key in self._row_ids:
            raise KeyError(f"duplicate row {key!r}")
        self._row_ids[key] = len(self._row_keys)
        self._row_keys.append(key)
        return self._row_ids[key]

    def col(self, *key: Hashable) -> int:
        return self._col_ids[tuple(key)]

    def row(self, *key: Hashable) -> int:
        return self._row_ids[tuple(key)]

    def has_col(self, *key: Hashable) -> bool:
        return tuple(key) in self._col_ids

    def has_row(self, *key: Hashable) -> bool:
        return tuple(key) in self._row_ids

    def col_key(self, j: int) -> Key:
        return self._col_keys[j]

    def row_key(self, i: int) -> Key:
        return self._row_keys[i]

    @property
    def n_cols(self) -> int:
        return len(self._col_keys)

    @property
    def n_rows(self) -> int:
        return len(self._row_keys)

    def cols_named(self, name: str) -> Dict[Key, int]:
        return {k: j for k, j in self._col_ids.items() if k[0] == name}

    def rows_named(self, family: str) -> Dict[Key, int]:
        return {k: i for k, i in self._row_ids.items() if k[0] == family}

    def col_keys(self) -> List[Key]:
        return list(self._col_keys)

    def row_keys(self) -> List[Key]:
        return list(self._row_keys)


def key_label(key: Key) -> str:
    return key[0] + "[" + ",".join(str(k) for k in key[1:]) + "]"


@dataclass
class LpProblem:
    rows: np.ndarray
    cols: np.ndarray
    vals: np.ndarray
    senses: np.ndarray
    rhs: np.ndarray
    c: np.ndarray
    lb: np.ndarray
    ub: np.ndarray
    index: Optional[VariableIndex] = None
    objective_offset: float = 0.0
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.rows = np.asarray(self.rows, dtype=np.int64)
        self.cols = np.asarray(self.cols, dtype=np.int64)
        self.vals = np.asarray(self.vals, dtype=float)
        self.senses = np.asarray(self.senses, dtype="<U1")
        self.rhs = np.asarray(self.rhs, dtype=float)
        self.c = np.asarray(self.c, dtype=float)
        self.lb = np.asarray(self.lb, dtype=float)
        self.ub = np.asarray(self.ub, dtype=float)

    @property
    def n_rows(self) -> int:
        return len(self.rhs)

    @property
    def n_cols(self) -> int:
        return len(self.c)

    def matrix(self) -> sp.csr_matrix:
        return sp.csr_matrix(
            (self.vals, (self.rows, self.cols)), shape=(self.n_rows, self.n_cols)
        )

    def check(self) -> None:
        """Raise ``ValueError`` if dimensions or coefficients are inconsistent."""
        m, n = self.n_rows, self.n_cols
        if not (len(self.rows) == len(self.cols) == len(self.vals)):
            raise ValueError("triplet arrays differ in length")
        if len(self.senses) != m:
            raise ValueError(f"{len(self.senses)} senses for {m} rows")
        if not (len(self.lb) == len(self.ub) == n):
            raise ValueError("bound arrays do not match column count")
        if len(self.rows) and (self.rows.min() < 0 or self.rows.max() >= m):
            raise ValueError("row index out of range")
        if len(self.cols) and (self.cols.min() < 0 or self.cols.max() >= n):
            raise ValueError("column index out of range")
        if not np.all(np.isfinite(self.vals)):
            bad = int(np.flatnonzero(~np.isfinite(self.vals))[0])
            raise ValueError(f"non-finite coefficient at ({self.rows[bad]}, {self.cols[bad]})")
        if not (np.all(np.isfinite(self.c)) and np.all(np.isfinite(self.rhs))):
            raise ValueError("non-finite objective or rhs entry")
        if np.any(np.isnan(self.lb)) or np.any(np.isnan(self.ub)) or np.any(self.lb > self.ub):
            raise ValueError("inconsistent column bounds")
        if not set(np.unique(self.senses)) <= set(SENSES):
            raise ValueError("unknown row sense")
        pairs = self.rows * max(n, 1) + self.cols
        if len(np.unique(pairs)) != len(pairs):
            raise ValueError("duplicate (row, col) entries")

    def row_name(self, i: int) -> str:
        if self.index is not None:
            return key_label(self.index.row_key(i))
        return f"R{i:06d}"

    def col_name(self, j: int) -> str:
        if self.index is not None:
            return key_label(self.index.col_key(j))
        return f"C{j:06d}"

    def fingerprint(self) -> str:
        h = hashlib.sha256()
        for arr in (self.rows, self.cols, self.vals, self.rhs, self.c, self.lb, self.ub):
            h.update(np.ascontiguousarray(arr).tobytes())
        h.update("".join(self.senses.tolist()).encode())
        return h.hexdigest()


class LpBuilder:
    """Accumulates columns, rows and coefficients in a stable order."""

    def __init__(self) -> None:
        self.index = VariableIndex()
        self._c: List[float] = []
        self._lb: List[float] = []
        self._ub: List[float] = []
        self._rows: List[int] = []
        self._cols: List[int] = []
        self._vals: List[float] = []
        self._senses: List[str] = []
        self._rhs: List[float] = []
        self.offset = 0.0

    def var(self, *key: Hashable, cost: float = 0.0, lb: float = 0.0, ub: float = np.inf) -> int:
        j = self.index.add_col(tuple(key))
        self._c.append(float(cost))
        self._lb.append(float(lb))
        self._ub.append(float(ub))
        return j

    def add_cost(self, j: int, cost: float) -> None:
        self._c[j] += cost

    def fix(self, j: int, value: float = 0.0) -> None:
        self._lb[j] = value
        self._ub[j] = value

    def set_ub(self, j: int, value: float) -> None:
        self._ub[j] = value

    def constraint(self, key: Key, terms: Dict[int, float], sense: str, rhs: float) -> int:
        """Add one row; ``terms`` maps column id to coefficient (merged, zeros dropped)."""
        i = self.index.add_row(tuple(key))
        for j in sorted(terms):
            v = terms[j]
            if v != 0.0:
                self._rows.append(i)
                self._cols.append(j)
                self._vals.append(float(v))
        self._senses.append(sense)
        self._rhs.append(float(rhs))
        return i

    def build(self, metadata: Optional[Dict[str, Any]] = None) -> LpProblem:
        return LpProblem(
            rows=np.array(self._rows, dtype=np.int64),
            cols=np.array(self._cols, dtype=np.int64),
            vals=np.array(self._vals, dtype=float),
            senses=np.array(self._senses, dtype="<U1"),
            rhs=np.array(self._rhs, dtype=float),
            c=np.array(self._c, dtype=float),
            lb=np.array(self._lb, dtype=float),
            ub=np.array(self._ub, dtype=float),
            index=self.index,
            objective_offset=self.offset,
            metadata=dict(metadata or {}),
        )


def merge_terms(*pairs: Tuple[int, float]) -> Dict[int, float]:
    out: Dict[int, float] = {}
    for j, v in pairs:
        out[j] = out.get(j, 0.0) + v
    return out
