"""Matrices over {-1,+1} and {-1,0,+1}, Chio sets, condensation, exact rank.

Positions are 1-based pairs ``(i, j)``.  A *Chio set* inside ``[s] x [t]``
is an index set that contains the pivot position ``(s, t)`` and is closed
under projecting every member onto the pivot row and column.  The Chio
extension of an ``I`` inside ``[s-1] x [t-1]`` is the smallest Chio set
containing it.

Condensation maps a sign matrix on a Chio set to the half 2x2-minor matrix
anchored at the pivot; all determinant and rank computations are exact
integer arithmetic (fraction-free Bareiss elimination, full pivoting).
Floating point is never used.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

Index2 = tuple[int, int]

SIGNS = (-1, 1)
TERNARY = (-1, 0, 1)


def project_rows(members: Iterable[Index2]) -> frozenset[int]:
    """First-coordinate projection p1 of a set of positions."""
    return frozenset(i for i, _ in members)


def project_cols(members: Iterable[Index2]) -> frozenset[int]:
    """Second-coordinate projection p2 of a set of positions."""
    return frozenset(j for _, j in members)


@dataclass(frozen=True)
class IndexSet:
    """A finite set of matrix positions inside a declared ``[s] x [t]`` box.

    ``dims`` is the pivot pair ``(s, t)``; both must be at least 2.  Members
    may live anywhere in ``[s] x [t]``; most call sites restrict them to
    ``[s-1] x [t-1]`` and the restriction is checked where it matters.
    """

    dims: tuple[int, int]
    members: frozenset[Index2] = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        s, t = self.dims
        if s < 2 or t < 2:
            raise ValueError(f"dims must both be >= 2, got {self.dims}")
        object.__setattr__(self, "members", frozenset(self.members))
        for i, j in self.members:
            if not (1 <= i <= s and 1 <= j <= t):
                raise ValueError(f"position {(i, j)} outside [{s}] x [{t}]")

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(sorted(self.members))

    def __contains__(self, pos: Index2) -> bool:
        return pos in self.members

    @property
    def rows(self) -> frozenset[int]:
        return project_rows(self.members)

    @property
    def cols(self) -> frozenset[int]:
        return project_cols(self.members)

    def is_rectangular(self) -> bool:
        """True iff the set equals the product of its two projections."""
        return len(self.members) == len(self.rows) * len(self.cols)

    def in_inner_box(self) -> bool:
        """True iff all members lie in ``[s-1] x [t-1]``."""
        s, t = self.dims
        return all(i <= s - 1 and j <= t - 1 for i, j in self.members)


def full_inner_box(s: int, t: int) -> IndexSet:
    """The full index set ``[s-1] x [t-1]`` with pivot dims ``(s, t)``."""
    return IndexSet(
        (s, t),
        frozenset((i, j) for i in range(1, s) for j in range(1, t)),
    )


def chio_extend(index_set: IndexSet) -> IndexSet:
    """Smallest Chio set containing ``index_set``.

    Adds the pivot ``(s, t)``, one pivot-column position ``(i, t)`` per row
    in p1, and one pivot-row position ``(s, j)`` per column in p2, so
    ``|extension| = 1 + |p1| + |p2| + |I|``.

    Raises:
        ValueError: if a member lies outside ``[s-1] x [t-1]``.
    """
    s, t = index_set.dims
    if not index_set.in_inner_box():
        raise ValueError("Chio extension requires members inside [s-1] x [t-1]")
    extended = {(s, t)}
    extended.update((i, t) for i in index_set.rows)
    extended.update((s, j) for j in index_set.cols)
    extended.update(index_set.members)
    return IndexSet((s, t), frozenset(extended))


def is_chio_set(index_set: IndexSet) -> bool:
    """Decide whether ``index_set`` is a Chio set for its declared pivot.

    Equivalent to being the Chio extension of its restriction to the inner
    box ``[s-1] x [t-1]``.
    """
    s, t = index_set.dims
    members = index_set.members
    if (s, t) not in members:
        return False
    return all((i, t) in members and (s, j) in members for i, j in members)


@dataclass(frozen=True)
class SignMatrix:
    """A matrix with entries in {-1,+1} on an arbitrary index set."""

    domain: IndexSet
    entries: Mapping[Index2, int]

    def __post_init__(self) -> None:
        entries = dict(self.entries)
        if set(entries) != set(self.domain.members):
            raise ValueError("entries must cover the domain exactly")
        for pos, value in entries.items():
            if value not in SIGNS:
                raise ValueError(f"entry {value} at {pos} not in {{-1,+1}}")
        object.__setattr__(self, "entries", entries)

    def __getitem__(self, pos: Index2) -> int:
        return self.entries[pos]

    @classmethod
    def from_rows(cls, rows: list[list[int]], dims: tuple[int, int] | None = None) -> "SignMatrix":
        """Build a full-rectangle sign matrix from nested row lists."""
        s = len(rows)
        t = len(rows[0]) if rows else 0
        if any(len(r) != t for r in rows):
            raise ValueError("ragged rows")
        if dims is None:
            dims = (s, t)
        if dims != (s, t):
            raise ValueError(f"dims {dims} do not match row shape {(s, t)}")
        entries = {(i + 1, j + 1): rows[i][j] for i in range(s) for j in range(t)}
        domain = IndexSet(dims, frozenset(entries))
        return cls(domain, entries)

    @classmethod
    def from_compact(cls, text: str) -> "SignMatrix":
        """Parse the compact row encoding, e.g. ``"++-/-+-"`` ('/' or ',' rows)."""
        rows = []
        for row_text in text.replace(",", "/").split("/"):
            row_text = row_text.strip()
            if not row_text:
                continue
            row = []
            for ch in row_text:
                if ch == "+":
                    row.append(1)
                elif ch == "-":
                    row.append(-1)
                else:
                    raise ValueError(f"invalid sign character {ch!r}")
            rows.append(row)
        return cls.from_rows(rows)

    def to_json_dict(self) -> dict:
        s, t = self.domain.dims
        return {
            "dims": [s, t],
            "entries": [[i, j, self.entries[(i, j)]] for i, j in sorted(self.entries)],
        }


@dataclass(frozen=True)
class PartialTernaryMatrix:
    """A matrix with entries in {-1,0,+1} on a domain inside ``[s-1] x [t-1]``.

    ``dom`` is the number of specified positions, ``supp`` the number of
    nonzero ones; the empty matrix (dom = supp = 0) is allowed.
    """

    dims: tuple[int, int]
    entries: Mapping[Index2, int]

    def __post_init__(self) -> None:
        entries = dict(self.entries)
        s, t = self.dims
        if s < 2 or t < 2:
            raise ValueError(f"dims must both be >= 2, got {self.dims}")
        for pos, value in entries.items():
            i, j = pos
            if not (1 <= i <= s - 1 and 1 <= j <= t - 1):
                raise ValueError(f"position {pos} outside [{s - 1}] x [{t - 1}]")
            if value not in TERNARY:
                raise ValueError(f"entry {value} at {pos} not in {{-1,0,+1}}")
        object.__setattr__(self, "entries", entries)

    def __getitem__(self, pos: Index2) -> int:
        return self.entries[pos]

    @property
    def domain(self) -> IndexSet:
        return IndexSet(self.dims, frozenset(self.entries))

    @property
    def support(self) -> frozenset[Index2]:
        return frozenset(pos for pos, v in self.entries.items() if v != 0)

    @property
    def dom(self) -> int:
        return len(self.entries)

    @property
    def supp(self) -> int:
        return sum(1 for v in self.entries.values() if v != 0)

    @classmethod
    def from_rows(cls, rows: list[list[int | None]], dims: tuple[int, int] | None = None) -> "PartialTernaryMatrix":
        """Build from nested rows; ``None`` marks an unspecified position.

        A full ``(n-1) x (n-1)`` grid of rows yields dims ``(n, n)`` unless
        ``dims`` overrides the inference.
        """
        r = len(rows)
        c = len(rows[0]) if rows else 0
        if any(len(row) != c for row in rows):
            raise ValueError("ragged rows")
        if dims is None:
            dims = (r + 1, c + 1)
        entries = {
            (i + 1, j + 1): rows[i][j]
            for i in range(r)
            for j in range(c)
            if rows[i][j] is not None
        }
        return cls(dims, entries)

    @classmethod
    def from_compact(cls, text: str, dims: tuple[int, int] | None = None) -> "PartialTernaryMatrix":
        """Parse rows of ``+ - 0`` with ``.`` for unspecified positions."""
        rows: list[list[int | None]] = []
        lookup: dict[str, int | None] = {"+": 1, "-": -1, "0": 0, ".": None}
        for row_text in text.replace(",", "/").split("/"):
            row_text = row_text.strip()
            if not row_text:
                continue
            try:
                rows.append([lookup[ch] for ch in row_text])
            except KeyError as exc:
                raise ValueError(f"invalid ternary character {exc.args[0]!r}") from None
        return cls.from_rows(rows, dims)

    def to_json_dict(self) -> dict:
        s, t = self.dims
        return {
            "dims": [s, t],
            "entries": [[i, j, self.entries[(i, j)]] for i, j in sorted(self.entries)],
        }


def matrix_from_json_dict(data: dict) -> PartialTernaryMatrix:
    """Inverse of :meth:`PartialTernaryMatrix.to_json_dict`."""
    dims = tuple(data["dims"])
    entries = {(i, j): v for i, j, v in data["entries"]}
    return PartialTernaryMatrix(dims, entries)


def chio_condense(matrix: SignMatrix) -> PartialTernaryMatrix:
    """Half Chio condensation with pivot at the bottom-right position.

    For each inner position ``(i, j)`` of the domain the result entry is
    ``(a[i,j]*a[s,t] - a[i,t]*a[s,j]) / 2``, a value in {-1,0,+1}.

    Raises:
        ValueError: if the domain of ``matrix`` is not a Chio set.
    """
    if not is_chio_set(matrix.domain):
        raise ValueError("domain is not a Chio set")
    s, t = matrix.domain.dims
    pivot = matrix[(s, t)]
    condensed = {}
    for i, j in matrix.domain.members:
        if i == s or j == t:
            continue
        minor = matrix[(i, j)] * pivot - matrix[(i, t)] * matrix[(s, j)]
        condensed[(i, j)] = minor // 2
    return PartialTernaryMatrix((s, t), condensed)


def abs_condense(matrix: SignMatrix) -> PartialTernaryMatrix:
    """Entrywise absolute value of the half Chio condensation ({0,1}-valued)."""
    condensed = chio_condense(matrix)
    return PartialTernaryMatrix(
        condensed.dims, {pos: abs(v) for pos, v in condensed.entries.items()}
    )


class IntMatrix:
    """Dense rectangular matrix over the integers (arbitrary precision)."""

    __slots__ = ("rows", "cols", "data")

    def __init__(self, data: list[list[int]]):
        self.rows = len(data)
        self.cols = len(data[0]) if data else 0
        if any(len(row) != self.cols for row in data):
            raise ValueError("ragged rows")
        self.data = [list(map(int, row)) for row in data]

    @classmethod
    def from_ternary(cls, matrix: PartialTernaryMatrix) -> "IntMatrix":
        """Dense view of a fully specified ternary matrix (missing -> 0)."""
        s, t = matrix.dims
        data = [[matrix.entries.get((i, j), 0) for j in range(1, t)] for i in range(1, s)]
        return cls(data)

    def __eq__(self, other) -> bool:
        return isinstance(other, IntMatrix) and self.data == other.data

    def __repr__(self) -> str:
        return f"IntMatrix({self.data!r})"


def det_int(matrix: IntMatrix) -> int:
    """Exact determinant over the integers.

    Fraction-free Bareiss elimination with full pivoting; every
    intermediate value is a minor of the input, so all divisions are exact.

    Raises:
        ValueError: if the matrix is not square.
    """
    if matrix.rows != matrix.cols:
        raise ValueError("determinant requires a square matrix")
    n = matrix.rows
    if n == 0:
        return 1
    a = [row[:] for row in matrix.data]
    sign = 1
    prev_pivot = 1
    for k in range(n - 1):
        pivot_pos = None
        for i in range(k, n):
            for j in range(k, n):
                if a[i][j] != 0:
                    pivot_pos = (i, j)
                    break
            if pivot_pos:
                break
        if pivot_pos is None:
            return 0
        pi, pj = pivot_pos
        if pi != k:
            a[k], a[pi] = a[pi], a[k]
            sign = -sign
        if pj != k:
            for row in a:
                row[k], row[pj] = row[pj], row[k]
            sign = -sign
        pivot = a[k][k]
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * pivot - a[i][k] * a[k][j]) // prev_pivot
            a[i][k] = 0
        prev_pivot = pivot
    return sign * a[n - 1][n - 1]


def rank_int(matrix: IntMatrix) -> int:
    """Exact rank over the integers (equivalently over the rationals).

    Fraction-free elimination with full pivoting; the rank is the number
    of elimination steps that find a nonzero pivot.
    """
    rows, cols = matrix.rows, matrix.cols
    a = [row[:] for row in matrix.data]
    rank = 0
    prev_pivot = 1
    for k in range(min(rows, cols)):
        pivot_pos = None
        for i in range(k, rows):
            for j in range(k, cols):
                if a[i][j] != 0:
                    pivot_pos = (i, j)
                    break
            if pivot_pos:
                break
        if pivot_pos is None:
            break
        pi, pj = pivot_pos
        if pi != k:
            a[k], a[pi] = a[pi], a[k]
        if pj != k:
            for row in a:
                row[k], row[pj] = row[pj], row[k]
        pivot = a[k][k]
        for i in range(k + 1, rows):
            for j in range(k + 1, cols):
                a[i][j] = (a[i][j] * pivot - a[i][k] * a[k][j]) // prev_pivot
            a[i][k] = 0
        prev_pivot = pivot
        rank += 1
    return rank
