"""Exact seed mutation with exchange, g- and c-matrices.

Matrices are tuples of row tuples of Python ints so that seeds are hashable
and immutable.  Columns of ``g`` and ``c`` are indexed by the position of the
cluster variable in the seed.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

Matrix = tuple[tuple[int, ...], ...]
GVector = tuple[int, ...]


class InvariantError(RuntimeError):
    """A seed violates tropical duality or sign-coherence."""


def identity(n: int, scale: int = 1) -> Matrix:
    return tuple(tuple(scale if i == j else 0 for j in range(n)) for i in range(n))


def column(m: Matrix, j: int) -> GVector:
    return tuple(row[j] for row in m)


def transpose(m: Matrix) -> Matrix:
    return tuple(zip(*m)) if m else ()


def matmul(a: Matrix, b: Matrix) -> Matrix:
    bt = transpose(b)
    return tuple(tuple(sum(x * y for x, y in zip(row, col)) for col in bt) for row in a)


def is_skew_symmetric(b: Matrix) -> bool:
    n = len(b)
    return all(len(row) == n for row in b) and all(
        b[i][j] == -b[j][i] for i in range(n) for j in range(n)
    )


def _check_index(n: int, k: int) -> None:
    if not 0 <= k < n:
        raise IndexError(f"mutation index {k} out of range for rank {n}")


def mutate_b(b: Matrix, k: int) -> Matrix:
    """Matrix mutation of a skew-symmetric exchange matrix at ``k``."""
    n = len(b)
    _check_index(n, k)
    out = []
    for i in range(n):
        row = []
        for j in range(n):
            if i == k or j == k:
                row.append(-b[i][j])
            else:
                row.append(
                    b[i][j]
                    + max(b[i][k], 0) * max(b[k][j], 0)
                    - max(-b[i][k], 0) * max(-b[k][j], 0)
                )
        out.append(tuple(row))
    return tuple(out)


def _sign(vec) -> int:
    if any(x > 0 for x in vec):
        if any(x < 0 for x in vec):
            return 0
        return 1
    if any(x < 0 for x in vec):
        return -1
    return 0


@dataclass(frozen=True)
class Seed:
    """Exchange matrix with the g- and c-matrices of a labelled cluster.

    ``path`` records the mutation indices applied to the root seed; it is
    bookkeeping only and does not take part in equality.
    """

    b: Matrix
    g: Matrix
    c: Matrix
    path: tuple[int, ...] = field(default=(), compare=False)

    @property
    def rank(self) -> int:
        return len(self.b)

    def gvectors(self) -> tuple[GVector, ...]:
        return tuple(column(self.g, j) for j in range(self.rank))

    def cvectors(self) -> tuple[GVector, ...]:
        return tuple(column(self.c, j) for j in range(self.rank))

    def mutate(self, k: int) -> Seed:
        return mutate_seed(self, k)

    def mutate_path(self, path) -> Seed:
        s = self
        for k in path:
            s = mutate_seed(s, k)
        return s


def root_seed(b0: Matrix) -> Seed:
    """The initial seed: ``g = c = I``."""
    b0 = as_matrix(b0)
    if not is_skew_symmetric(b0):
        raise ValueError("exchange matrix must be skew-symmetric")
    n = len(b0)
    return Seed(b0, identity(n), identity(n), ())


def shift_seed(b0: Matrix) -> Seed:
    """The initial cluster shifted by [-1]: ``g = c = -I`` with the same exchange matrix.

    Replaying a mutation path from here lands on the [-1]-shift of the
    cluster reached from the root.
    """
    b0 = as_matrix(b0)
    if not is_skew_symmetric(b0):
        raise ValueError("exchange matrix must be skew-symmetric")
    n = len(b0)
    return Seed(b0, identity(n, -1), identity(n, -1), ())


def mutate_seed(s: Seed, k: int) -> Seed:
    """Mutate ``s`` at ``k`` using the sign-coherent tropical recurrences.

    With ``eps`` the common sign of the k-th c-vector:

    * ``c'_k = -c_k`` and ``c'_j = c_j + [eps * b_kj]_+ c_k``;
    * ``g'_k = -g_k + sum_i [-eps * b_ik]_+ g_i`` and ``g'_j = g_j``.

    Raises :class:`InvariantError` if the result breaks ``g c^T = I`` or
    sign-coherence, which can only happen for a corrupted input seed.
    """
    n = s.rank
    _check_index(n, k)
    b, g, c = s.b, s.g, s.c
    ck = column(c, k)
    eps = _sign(ck)
    if eps == 0:
        raise InvariantError(f"c-vector {k} is not sign-coherent: {ck}")

    c_cols = []
    g_cols = []
    for j in range(n):
        cj = column(c, j)
        if j == k:
            c_cols.append(tuple(-x for x in ck))
        else:
            coef = max(eps * b[k][j], 0)
            c_cols.append(tuple(x + coef * y for x, y in zip(cj, ck)) if coef else cj)
    gk = [-x for x in column(g, k)]
    for i in range(n):
        coef = max(-eps * b[i][k], 0)
        if coef:
            gi = column(g, i)
            gk = [x + coef * y for x, y in zip(gk, gi)]
    for j in range(n):
        g_cols.append(tuple(gk) if j == k else column(g, j))

    new = Seed(mutate_b(b, k), transpose(tuple(g_cols)), transpose(tuple(c_cols)), s.path + (k,))
    if not check_duality(new):
        raise InvariantError(f"tropical duality broken after mutation at {k}")
    return new


def permute_seed(s: Seed, perm) -> Seed:
    """Relabel columns: new column ``j`` is old column ``perm[j]``."""
    n = s.rank
    b = tuple(tuple(s.b[perm[i]][perm[j]] for j in range(n)) for i in range(n))
    g = tuple(tuple(row[perm[j]] for j in range(n)) for row in s.g)
    c = tuple(tuple(row[perm[j]] for j in range(n)) for row in s.c)
    return Seed(b, g, c, s.path)


def g_vector(s: Seed, j: int) -> GVector:
    _check_index(s.rank, j)
    return column(s.g, j)


def c_sign(s: Seed, j: int) -> int:
    """+1 if the j-th c-vector is non-negative (green), -1 if non-positive (red)."""
    _check_index(s.rank, j)
    sgn = _sign(column(s.c, j))
    if sgn == 0:
        raise InvariantError(f"c-vector {j} is zero or has mixed signs")
    return sgn


def check_duality(s: Seed) -> bool:
    """True iff ``g c^T = I`` and every c-vector is nonzero and sign-coherent."""
    n = s.rank
    if matmul(s.g, transpose(s.c)) != identity(n):
        return False
    return all(_sign(column(s.c, j)) != 0 for j in range(n))


def determinant(m: Matrix) -> int:
    """Integer determinant by fraction-free (Bareiss) elimination."""
    n = len(m)
    a = [list(row) for row in m]
    sign, prev = 1, 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for r in range(k + 1, n):
                if a[r][k] != 0:
                    a[k], a[r] = a[r], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1] if n else 1


def unimodular_inverse(m: Matrix) -> Matrix:
    """Inverse of an integer matrix with determinant +-1, computed exactly."""
    from fractions import Fraction

    n = len(m)
    a = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(m)]
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col] != 0), None)
        if piv is None:
            raise ValueError("singular matrix")
        a[col], a[piv] = a[piv], a[col]
        p = a[col][col]
        a[col] = [x / p for x in a[col]]
        for r in range(n):
            if r != col and a[r][col] != 0:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    out = []
    for row in a:
        vals = row[n:]
        if any(v.denominator != 1 for v in vals):
            raise ValueError("matrix is not unimodular")
        out.append(tuple(int(v) for v in vals))
    return tuple(out)


# -- presets and parsing ------------------------------------------------------


def as_matrix(rows) -> Matrix:
    return tuple(tuple(int(x) for x in row) for row in rows)


def from_arrows(n: int, arrows) -> Matrix:
    """Exchange matrix of a quiver: each arrow ``i -> j`` adds +1 at (i, j) and -1 at (j, i)."""
    b = [[0] * n for _ in range(n)]
    for i, j in arrows:
        b[i][j] += 1
        b[j][i] -= 1
    return as_matrix(b)


def disjoint_union(*bs: Matrix) -> Matrix:
    n = sum(len(b) for b in bs)
    out = [[0] * n for _ in range(n)]
    off = 0
    for b in bs:
        for i, row in enumerate(b):
            for j, x in enumerate(row):
                out[off + i][off + j] = x
        off += len(b)
    return as_matrix(out)


def type_a(n: int) -> Matrix:
    """A_n.  For n = 3 the middle vertex is labelled 0 and is a sink (1 -> 0 <- 2)."""
    if n < 1:
        raise ValueError("A_n needs n >= 1")
    if n == 3:
        return from_arrows(3, [(1, 0), (2, 0)])
    return from_arrows(n, [(i + 1, i) for i in range(n - 1)])


def type_d(n: int) -> Matrix:
    """D_n with vertex 0 the trivalent sink; for D4 the sources are 1, 2, 3."""
    if n < 4:
        raise ValueError("D_n needs n >= 4")
    arrows = [(1, 0), (2, 0), (3, 0)]
    arrows += [(i + 1, i) for i in range(3, n - 1)]
    return from_arrows(n, arrows)


def type_affine_a(p: int, q: int) -> Matrix:
    """Acyclic orientation of an (p+q)-cycle with p clockwise and q anticlockwise arrows.

    Vertices are 0..p+q-1 around the cycle.  Edges (i, i+1) for i < p point
    clockwise ``i -> i+1``; the remaining edges point anticlockwise.  Vertex 0
    is the unique source and vertex p the unique sink.
    """
    if p < 1 or q < 1:
        raise ValueError("affine A(p, q) needs p, q >= 1")
    n = p + q
    arrows = []
    for i in range(n):
        j = (i + 1) % n
        arrows.append((i, j) if i < p else (j, i))
    return from_arrows(n, arrows)


_PRESET_RE = re.compile(r"^(A|D)(\d+)$")


def preset(name: str) -> Matrix:
    """Exchange matrix by name: ``A1``..``An``, ``Dn``, ``Atilde:p,q``, and ``+``-joined unions."""
    name = name.strip()
    if "+" in name:
        return disjoint_union(*(preset(part) for part in name.split("+")))
    if name.lower().startswith("atilde:"):
        p, q = (int(x) for x in name.split(":", 1)[1].split(","))
        return type_affine_a(p, q)
    m = _PRESET_RE.match(name)
    if not m:
        raise ValueError(f"unknown quiver preset {name!r}")
    kind, n = m.group(1), int(m.group(2))
    return type_a(n) if kind == "A" else type_d(n)


def parse_bmatrix(text: str) -> Matrix:
    """Parse the text format: first line ``n``, then n rows of n integers."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty B-matrix file")
    n = int(lines[0].strip())
    if len(lines) != n + 1:
        raise ValueError(f"expected {n} matrix rows, got {len(lines) - 1}")
    rows = [tuple(int(x) for x in ln.split()) for ln in lines[1:]]
    if any(len(r) != n for r in rows):
        raise ValueError("B-matrix rows must have n entries")
    b = as_matrix(rows)
    if not is_skew_symmetric(b):
        raise ValueError("B-matrix is not skew-symmetric")
    return b


def format_bmatrix(b: Matrix) -> str:
    return "\n".join([str(len(b))] + [" ".join(str(x) for x in row) for row in b]) + "\n"


def load_quiver(source: str) -> Matrix:
    """Preset name or path to a B-matrix file."""
    path = Path(source)
    if path.is_file():
        return parse_bmatrix(path.read_text())
    return preset(source)


def is_acyclic_quiver(b: Matrix) -> bool:
    """True if the quiver of ``b`` has no oriented cycle."""
    n = len(b)
    indeg = [sum(1 for i in range(n) if b[i][j] > 0) for j in range(n)]
    ready = [j for j in range(n) if indeg[j] == 0]
    seen = 0
    while ready:
        i = ready.pop()
        seen += 1
        for j in range(n):
            if b[i][j] > 0:
                indeg[j] -= 1
                if indeg[j] == 0:
                    ready.append(j)
    return seen == n
