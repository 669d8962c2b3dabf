"""Graph representations, Erdos-Renyi samplers, and graph file I/O.

Undirected graphs are simple (no self-loops) and stored as a dense
symmetric uint8 matrix with a zero diagonal; directed graphs as a full
uint8 matrix with a zero diagonal. Node subsets are boolean masks over
``[0, n)``. All graph values are treated as immutable after construction
and are safe to share across worker processes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "GraphParams",
    "NodeSet",
    "AdjacencyMatrix",
    "DirectedAdjacencyMatrix",
    "sample_er",
    "sample_directed_er",
    "directed_to_undirected",
    "empirical_density",
    "degree_in",
    "normalized_degree",
    "complement_graph",
    "read_graph",
    "write_graph",
]

# Largest temporary block of uniform draws while sampling, in entries.
_SAMPLE_BLOCK = 4_000_000


class GraphFormatError(ValueError):
    """Malformed graph file."""


@dataclass(frozen=True)
class GraphParams:
    """Parameters of a corrupted Erdos-Renyi instance."""

    n: int
    p: float
    gamma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"edge probability must be in [0, 1], got {self.p}")
        if not 0.0 <= self.gamma < 1.0:
            raise ValueError(f"corruption fraction must be in [0, 1), got {self.gamma}")


class NodeSet:
    """Subset of the node labels {0, ..., n-1}, stored as a boolean mask."""

    __slots__ = ("n", "mask")

    def __init__(self, n: int, mask: np.ndarray):
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != (n,):
            raise ValueError(f"mask shape {mask.shape} does not match n={n}")
        self.n = n
        self.mask = mask
        self.mask.setflags(write=False)

    @classmethod
    def full(cls, n: int) -> "NodeSet":
        return cls(n, np.ones(n, dtype=bool))

    @classmethod
    def empty(cls, n: int) -> "NodeSet":
        return cls(n, np.zeros(n, dtype=bool))

    @classmethod
    def from_indices(cls, n: int, indices) -> "NodeSet":
        idx = np.asarray(indices, dtype=np.int64)
        if idx.size and (idx.min() < 0 or idx.max() >= n):
            raise ValueError("node index out of range")
        mask = np.zeros(n, dtype=bool)
        mask[idx] = True
        return cls(n, mask)

    @property
    def size(self) -> int:
        return int(self.mask.sum())

    @property
    def indices(self) -> np.ndarray:
        return np.flatnonzero(self.mask)

    def complement(self) -> "NodeSet":
        return NodeSet(self.n, ~self.mask)

    def intersection(self, other: "NodeSet") -> "NodeSet":
        return NodeSet(self.n, self.mask & other.mask)

    def difference(self, other: "NodeSet") -> "NodeSet":
        return NodeSet(self.n, self.mask & ~other.mask)

    def contains(self, i: int) -> bool:
        return bool(self.mask[i])

    def issubset(self, other: "NodeSet") -> bool:
        return bool(np.all(~self.mask | other.mask))

    def __eq__(self, other) -> bool:
        return isinstance(other, NodeSet) and self.n == other.n and bool(
            np.array_equal(self.mask, other.mask)
        )

    def __hash__(self):
        return hash((self.n, self.mask.tobytes()))

    def __repr__(self):
        return f"NodeSet(n={self.n}, size={self.size})"


def _check_square_zero_diag(mat: np.ndarray) -> None:
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValueError(f"adjacency matrix must be square, got shape {mat.shape}")
    if np.any(np.diagonal(mat)):
        raise ValueError("self-loops are not allowed (nonzero diagonal)")
    if mat.size and (mat.min() < 0 or mat.max() > 1):
        raise ValueError("adjacency entries must be 0/1")


class AdjacencyMatrix:
    """Symmetric zero-diagonal 0/1 matrix of an undirected simple graph."""

    __slots__ = ("n", "mat", "_f32")

    def __init__(self, mat: np.ndarray, validate: bool = True):
        mat = np.ascontiguousarray(mat, dtype=np.uint8)
        if validate:
            _check_square_zero_diag(mat)
            if not np.array_equal(mat, mat.T):
                raise ValueError("adjacency matrix must be symmetric")
        self.n = mat.shape[0]
        self.mat = mat
        self.mat.setflags(write=False)
        self._f32 = None

    @classmethod
    def empty(cls, n: int) -> "AdjacencyMatrix":
        return cls(np.zeros((n, n), dtype=np.uint8), validate=False)

    @classmethod
    def complete(cls, n: int) -> "AdjacencyMatrix":
        m = np.ones((n, n), dtype=np.uint8)
        np.fill_diagonal(m, 0)
        return cls(m, validate=False)

    @classmethod
    def from_edges(cls, n: int, edges) -> "AdjacencyMatrix":
        m = np.zeros((n, n), dtype=np.uint8)
        for i, j in edges:
            if i == j:
                raise ValueError(f"self-loop ({i},{i}) not allowed")
            m[i, j] = m[j, i] = 1
        return cls(m, validate=False)

    def float32(self) -> np.ndarray:
        """Cached float32 view used by the numpy spectral kernel."""
        if self._f32 is None:
            f = self.mat.astype(np.float32)
            f.setflags(write=False)
            self._f32 = f
        return self._f32

    @property
    def edge_count(self) -> int:
        return int(self.mat.sum()) // 2

    def degrees(self) -> np.ndarray:
        return self.mat.sum(axis=1, dtype=np.int64)

    def induced(self, s: NodeSet) -> "AdjacencyMatrix":
        idx = s.indices
        return AdjacencyMatrix(self.mat[np.ix_(idx, idx)], validate=False)

    def __eq__(self, other) -> bool:
        return isinstance(other, AdjacencyMatrix) and bool(
            np.array_equal(self.mat, other.mat)
        )

    def __hash__(self):
        return hash(self.mat.tobytes())

    def __repr__(self):
        return f"AdjacencyMatrix(n={self.n}, edges={self.edge_count})"


class DirectedAdjacencyMatrix:
    """Full 0/1 matrix of a simple directed graph; entry (i, j) is edge i->j."""

    __slots__ = ("n", "mat")

    def __init__(self, mat: np.ndarray, validate: bool = True):
        mat = np.ascontiguousarray(mat, dtype=np.uint8)
        if validate:
            _check_square_zero_diag(mat)
        self.n = mat.shape[0]
        self.mat = mat
        self.mat.setflags(write=False)

    @property
    def edge_count(self) -> int:
        return int(self.mat.sum())

    def out_degrees(self) -> np.ndarray:
        return self.mat.sum(axis=1, dtype=np.int64)

    def __eq__(self, other) -> bool:
        return isinstance(other, DirectedAdjacencyMatrix) and bool(
            np.array_equal(self.mat, other.mat)
        )

    def __repr__(self):
        return f"DirectedAdjacencyMatrix(n={self.n}, edges={self.edge_count})"


def _mirror_upper(mat: np.ndarray) -> None:
    """In-place A |= A.T for a strictly upper-triangular uint8 matrix.

    Tiled to keep both source and destination accesses cache-resident;
    the naive ``mat |= mat.T`` walks a fully strided view and is an order
    of magnitude slower once the matrix spills the last-level cache.
    """
    n = mat.shape[0]
    bs = 512
    if n <= 2 * bs:
        mat |= mat.T
        return
    for a in range(0, n, bs):
        b = min(a + bs, n)
        for c in range(0, a, bs):
            d = min(c + bs, a)
            mat[a:b, c:d] = mat[c:d, a:b].T
        blk = mat[a:b, a:b]
        blk |= np.ascontiguousarray(blk.T)


def _bernoulli_block(rng: np.random.Generator, p: float, size: int) -> np.ndarray:
    if p == 0.5:
        # One random byte yields 8 fair bits; much faster at large n.
        nbytes = (size + 7) // 8
        bits = np.unpackbits(rng.integers(0, 256, nbytes, dtype=np.uint8))
        return bits[:size]
    return (rng.random(size) < p).astype(np.uint8)


def sample_er(params: GraphParams, rng: np.random.Generator) -> AdjacencyMatrix:
    """Sample an undirected Erdos-Renyi graph: each unordered pair {i, j}
    is an edge independently with probability p."""
    n, p = params.n, params.p
    mat = np.zeros((n, n), dtype=np.uint8)
    if p > 0.0:
        # Fill the upper triangle row by row, in bounded row blocks.
        row = 0
        while row < n - 1:
            nrows = 1
            total = n - 1 - row
            while row + nrows < n - 1 and total + (n - 1 - row - nrows) <= _SAMPLE_BLOCK:
                total += n - 1 - row - nrows
                nrows += 1
            draws = np.ones(total, dtype=np.uint8) if p == 1.0 else _bernoulli_block(
                rng, p, total
            )
            off = 0
            for i in range(row, row + nrows):
                k = n - 1 - i
                mat[i, i + 1 :] = draws[off : off + k]
                off += k
            row += nrows
        _mirror_upper(mat)
    return AdjacencyMatrix(mat, validate=False)


def sample_directed_er(
    params: GraphParams, rng: np.random.Generator
) -> DirectedAdjacencyMatrix:
    """Sample a directed Erdos-Renyi graph over all ordered pairs i != j."""
    n, p = params.n, params.p
    if p == 1.0:
        mat = np.ones((n, n), dtype=np.uint8)
    elif p == 0.0:
        mat = np.zeros((n, n), dtype=np.uint8)
    else:
        mat = _bernoulli_block(rng, p, n * n).reshape(n, n)
    np.fill_diagonal(mat, 0)
    return DirectedAdjacencyMatrix(mat, validate=False)


def directed_to_undirected(dg: DirectedAdjacencyMatrix) -> AdjacencyMatrix:
    """Keep the directed edge (i, j) with i < j as undirected edge {i, j}.

    Edges pointing from a higher to a lower label are discarded, so a
    directed ER(p) sample maps exactly to an undirected ER(p) sample.
    """
    upper = np.triu(dg.mat, k=1)
    return AdjacencyMatrix(upper | upper.T, validate=False)


def empirical_density(a: AdjacencyMatrix, s: NodeSet) -> float:
    """Within-subset edge density: sum of A over S x S divided by |S|^2.

    The sum runs over ordered pairs including the zero diagonal, so the
    value slightly underestimates the usual edge fraction.
    """
    idx = s.indices
    if idx.size == 0:
        raise ValueError("empirical density of an empty node set is undefined")
    total = int(a.mat[np.ix_(idx, idx)].sum(dtype=np.int64))
    return total / (idx.size ** 2)


def degree_in(a: AdjacencyMatrix, i: int, s: NodeSet) -> int:
    """Number of neighbors of node i inside S."""
    if s.size == 0:
        raise ValueError("degree inside an empty node set is undefined")
    return int(a.mat[i, s.mask].sum(dtype=np.int64))


def normalized_degree(a: AdjacencyMatrix, i: int, s: NodeSet) -> float:
    """degree_in(a, i, s) / |S|."""
    k = s.size
    if k == 0:
        raise ValueError("degree inside an empty node set is undefined")
    return degree_in(a, i, s) / k


def complement_graph(a: AdjacencyMatrix) -> AdjacencyMatrix:
    """Flip every off-diagonal entry; an involution."""
    m = 1 - a.mat
    np.fill_diagonal(m, 0)
    return AdjacencyMatrix(m, validate=False)


# ---------------------------------------------------------------------------
# File formats.
#
# Text:   line 1 "erg v1 n=<n> directed=<0|1>", then one "i j" pair per line,
#         0-indexed with i < j for undirected graphs; '#' starts a comment.
# Binary: magic "ERG1", u32 little-endian n, u8 directed flag, then the raw
#         bitset (packed upper triangle row-major for undirected graphs,
#         packed full row-major matrix for directed ones).
# ---------------------------------------------------------------------------

_BINARY_MAGIC = b"ERG1"


def write_graph(g, path, binary: bool = False) -> None:
    directed = isinstance(g, DirectedAdjacencyMatrix)
    if binary:
        if directed:
            bits = np.packbits(g.mat.reshape(-1))
        else:
            iu = np.triu_indices(g.n, k=1)
            bits = np.packbits(g.mat[iu])
        with open(path, "wb") as f:
            f.write(_BINARY_MAGIC)
            f.write(np.uint32(g.n).tobytes())
            f.write(np.uint8(1 if directed else 0).tobytes())
            f.write(bits.tobytes())
        return
    with open(path, "w") as f:
        f.write(f"erg v1 n={g.n} directed={1 if directed else 0}\n")
        if directed:
            rows, cols = np.nonzero(g.mat)
        else:
            rows, cols = np.nonzero(np.triu(g.mat, k=1))
        for i, j in zip(rows.tolist(), cols.tolist()):
            f.write(f"{i} {j}\n")


def _read_binary(path):
    with open(path, "rb") as f:
        raw = f.read()
    if raw[:4] != _BINARY_MAGIC:
        raise GraphFormatError(f"{path}: bad magic, not an ERG1 file")
    n = int(np.frombuffer(raw[4:8], dtype=np.uint32)[0])
    directed = bool(raw[8])
    bits = np.frombuffer(raw[9:], dtype=np.uint8)
    if directed:
        need = n * n
        flat = np.unpackbits(bits, count=need) if bits.size * 8 >= need else None
        if flat is None:
            raise GraphFormatError(f"{path}: truncated bitset")
        mat = flat.reshape(n, n).astype(np.uint8)
        np.fill_diagonal(mat, 0)
        return DirectedAdjacencyMatrix(mat, validate=False)
    need = n * (n - 1) // 2
    if bits.size * 8 < need:
        raise GraphFormatError(f"{path}: truncated bitset")
    flat = np.unpackbits(bits, count=need)
    mat = np.zeros((n, n), dtype=np.uint8)
    mat[np.triu_indices(n, k=1)] = flat
    mat |= mat.T
    return AdjacencyMatrix(mat, validate=False)


def read_graph(path):
    """Read a graph in either the text or the binary format.

    Raises GraphFormatError naming the offending line for malformed
    headers, out-of-range node ids, self-loops, and duplicate edges.
    """
    with open(path, "rb") as f:
        head = f.read(4)
    if head == _BINARY_MAGIC:
        return _read_binary(path)

    with open(path, "r") as f:
        lines = f.readlines()
    if not lines:
        raise GraphFormatError(f"{path}:1: empty file")
    header = lines[0].strip().split()
    if (
        len(header) != 4
        or header[0] != "erg"
        or header[1] != "v1"
        or not header[2].startswith("n=")
        or not header[3].startswith("directed=")
    ):
        raise GraphFormatError(f"{path}:1: malformed header {lines[0]!r}")
    try:
        n = int(header[2][2:])
        directed = int(header[3][9:])
    except ValueError as e:
        raise GraphFormatError(f"{path}:1: malformed header field: {e}") from None
    if n < 1:
        raise GraphFormatError(f"{path}:1: node count must be >= 1, got {n}")
    if directed not in (0, 1):
        raise GraphFormatError(f"{path}:1: directed flag must be 0 or 1")

    mat = np.zeros((n, n), dtype=np.uint8)
    for lineno, line in enumerate(lines[1:], start=2):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        parts = body.split()
        if len(parts) != 2:
            raise GraphFormatError(f"{path}:{lineno}: expected 'i j', got {line!r}")
        try:
            i, j = int(parts[0]), int(parts[1])
        except ValueError:
            raise GraphFormatError(
                f"{path}:{lineno}: non-integer node id in {line!r}"
            ) from None
        if i == j:
            raise GraphFormatError(f"{path}:{lineno}: self-loop ({i},{j}) not allowed")
        if not (0 <= i < n and 0 <= j < n):
            raise GraphFormatError(f"{path}:{lineno}: node id out of range in {line!r}")
        if not directed and i >= j:
            raise GraphFormatError(
                f"{path}:{lineno}: undirected edges must satisfy i < j"
            )
        if mat[i, j]:
            raise GraphFormatError(f"{path}:{lineno}: duplicate edge ({i},{j})")
        mat[i, j] = 1
        if not directed:
            mat[j, i] = 1
    if directed:
        return DirectedAdjacencyMatrix(mat, validate=False)
    return AdjacencyMatrix(mat, validate=False)
