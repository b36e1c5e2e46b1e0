"""Complex loopy-Laplacian construction, Kron reduction and the closed-form
single-configuration eliminations used as oracles against it.

The loopy Laplacian is the nodal admittance matrix: off-diagonal entries are
the negated line admittances, diagonal entries the sum of all admittances
terminating at the bus, shunt included.  Row i therefore sums to the shunt
of bus i exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import IndexMismatchError, NumericalError, UnsupportedConfigurationError, ValidationError
from .network import Bus, BusId, Network

# Interior blocks at or below this size are factored dense; larger ones go
# through sparse LU.
DENSE_INTERIOR_LIMIT = 64

SYMMETRY_ATOL = 1e-12
SOLVE_RTOL = 1e-9


@dataclass(frozen=True)
class LoopyLaplacian:
    """Immutable nodal admittance matrix with its bus-id index."""

    matrix: sp.csr_matrix            # complex, symmetric
    index: tuple[BusId, ...]

    def __post_init__(self):
        n = len(self.index)
        if self.matrix.shape != (n, n):
            raise IndexMismatchError(
                f"matrix is {self.matrix.shape} but index has {n} buses")

    @property
    def n(self) -> int:
        return len(self.index)

    def position(self, bus_id: BusId) -> int:
        try:
            return self.index.index(bus_id)
        except ValueError:
            raise IndexMismatchError(f"bus {bus_id!r} not in Laplacian index") from None

    def positions(self) -> dict[BusId, int]:
        return {bid: i for i, bid in enumerate(self.index)}

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()


@dataclass(frozen=True)
class KronResult:
    """Schur complement on the reference set plus the accompanying matrix
    mapping interior currents onto the references."""

    q_red: LoopyLaplacian
    q_ac: np.ndarray                 # |alpha| x (n - |alpha|)
    alpha: tuple[BusId, ...]
    interior: tuple[BusId, ...]


def _check_symmetric(dense: np.ndarray, context: str) -> np.ndarray:
    scale = max(np.abs(dense).max(initial=0.0), 1.0)
    drift = np.abs(dense - dense.T).max(initial=0.0)
    if drift > SYMMETRY_ATOL * scale:
        raise NumericalError(f"{context}: asymmetry {drift:.3e} exceeds tolerance")
    return (dense + dense.T) / 2.0


def build_loopy_laplacian(net: Network,
                          ordering: list[BusId] | None = None) -> LoopyLaplacian:
    """Assemble Q with Q_ij = -A_ij off-diagonal and row sums equal to the
    bus shunts.  ``ordering`` must be a permutation of the network's buses;
    it defaults to sorted bus ids."""
    if ordering is None:
        ordering = net.bus_ids()
    pos = {bid: i for i, bid in enumerate(ordering)}
    if len(pos) != net.node_count or set(pos) != set(net.buses):
        raise IndexMismatchError("ordering is not a permutation of the network's buses")
    n = len(ordering)
    diag = np.array([net.buses[b].shunt for b in ordering], dtype=complex)
    rows, cols, vals = [], [], []
    for (a, b), adm in net.lines.items():
        i, j = pos[a], pos[b]
        rows += [i, j]
        cols += [j, i]
        vals += [-adm, -adm]
        diag[i] += adm
        diag[j] += adm
    rows += list(range(n))
    cols += list(range(n))
    vals += list(diag)
    matrix = sp.csr_matrix(
        sp.coo_matrix((vals, (rows, cols)), shape=(n, n), dtype=complex))
    return LoopyLaplacian(matrix=matrix, index=tuple(ordering))


def adjacency_from_laplacian(lap: LoopyLaplacian) -> Network:
    """Recover the network topology and admittances from Q.

    Off-diagonal A_ij = -Q_ij; diagonal (shunt) A_ii is the row sum of Q.
    Exact inverse of :func:`build_loopy_laplacian`; voltages and currents are
    not represented in Q, so recovered buses carry placeholder values.
    """
    dense = lap.dense()
    _check_symmetric(dense, "adjacency recovery")
    shunts = dense.sum(axis=1)
    net = Network()
    for i, bid in enumerate(lap.index):
        net.add_bus(Bus(id=bid, voltage_kv=1.0, shunt=complex(shunts[i])))
    n = lap.n
    for i in range(n):
        for j in range(i + 1, n):
            if dense[i, j] != 0:
                net.add_line(lap.index[i], lap.index[j], -complex(dense[i, j]))
    return net


def _split_positions(lap: LoopyLaplacian, alpha: list[BusId]) -> tuple[list[int], list[int]]:
    pos = lap.positions()
    missing = [b for b in alpha if b not in pos]
    if missing:
        raise IndexMismatchError(f"reference buses not in index: {missing}")
    ref = [pos[b] for b in alpha]
    ref_set = set(ref)
    interior = [i for i in range(lap.n) if i not in ref_set]
    return ref, interior


def _interior_solve(q_bb: sp.csr_matrix, rhs: np.ndarray) -> np.ndarray:
    """Solve the interior block against a dense right-hand side, dense or by
    sparse LU depending on block size."""
    k = q_bb.shape[0]
    try:
        if k <= DENSE_INTERIOR_LIMIT:
            x = np.linalg.solve(q_bb.toarray(), rhs)
        else:
            lu = spla.splu(q_bb.tocsc())
            x = lu.solve(rhs)
    except (np.linalg.LinAlgError, RuntimeError) as exc:
        raise NumericalError(f"interior block ({k} buses) is singular: {exc}") from exc
    if not np.all(np.isfinite(x)):
        raise NumericalError(f"interior block ({k} buses) is singular: non-finite solve")
    residual = np.linalg.norm(q_bb @ x - rhs)
    scale = max(np.linalg.norm(rhs), 1e-300)
    if residual > SOLVE_RTOL * scale:
        raise NumericalError(
            f"interior block ({k} buses): solve residual {residual / scale:.3e} "
            f"exceeds {SOLVE_RTOL:g} relative")
    return x


def kron_reduce(lap: LoopyLaplacian, alpha: set[BusId] | list[BusId]) -> KronResult:
    """Schur complement of Q onto the reference buses ``alpha``.

    Returns the reduced Laplacian over ``alpha`` (kept in the original index
    order) together with the accompanying matrix Q^ac = -Q_[a,a) Q_(a,a)^-1,
    computed column-by-column from one factorization of the interior block.
    """
    alpha_set = set(alpha)
    ordered_alpha = [b for b in lap.index if b in alpha_set]
    if len(ordered_alpha) != len(alpha_set):
        raise IndexMismatchError("alpha contains buses outside the Laplacian index")
    if not 1 <= len(ordered_alpha) < lap.n:
        raise IndexMismatchError(
            f"need 1 <= |alpha| < n, got |alpha|={len(ordered_alpha)}, n={lap.n}")

    ref, interior = _split_positions(lap, ordered_alpha)
    csr = lap.matrix.tocsc()
    q_aa = csr[np.ix_(ref, ref)]
    q_ab = csr[np.ix_(ref, interior)]
    q_ba = csr[np.ix_(interior, ref)]
    q_bb = csr[np.ix_(interior, interior)].tocsr()

    x = _interior_solve(q_bb, q_ba.toarray())
    reduced = _check_symmetric(np.asarray(q_aa.todense()) - q_ab @ x, "Kron reduction")
    # Symmetry of Q gives Q^ac = -(Q_bb^-1 Q_ba)^T without a second solve.
    q_ac = -x.T

    q_red = LoopyLaplacian(matrix=sp.csr_matrix(reduced), index=tuple(ordered_alpha))
    return KronResult(q_red=q_red, q_ac=q_ac, alpha=tuple(ordered_alpha),
                      interior=tuple(lap.index[i] for i in interior))


def _drop_nodes(dense: np.ndarray, index: tuple[BusId, ...],
                drop: set[BusId]) -> LoopyLaplacian:
    keep = [i for i, b in enumerate(index) if b not in drop]
    sub = dense[np.ix_(keep, keep)]
    return LoopyLaplacian(matrix=sp.csr_matrix(sub),
                          index=tuple(index[i] for i in keep))


def closed_form_eliminate(lap: LoopyLaplacian, node: BusId,
                          companions: tuple[BusId, BusId] | None = None) -> LoopyLaplacian:
    """Eliminate one recognized configuration by its explicit formula.

    Without ``companions`` the node must have degree 1 (root diagonal drops
    by Q_rn^2 / Q_nn) or degree 2 (one line and both endpoint diagonals are
    updated).  With ``companions`` the call collapses the sparsely connected
    triangle whose two degree-two members are the companions into ``node``,
    whose diagonal drops by the 2x2-Schur scalar q.

    These are the same matrices :func:`kron_reduce` produces; tests hold the
    two routes together elementwise.
    """
    dense = lap.dense()
    pos = lap.positions()

    if companions is not None:
        root, (m1, m2) = node, companions
        for b in (root, m1, m2):
            if b not in pos:
                raise IndexMismatchError(f"bus {b!r} not in Laplacian index")
        r, i1, i2 = pos[root], pos[m1], pos[m2]
        a = dense[r, i1]
        b = dense[r, i2]
        e = dense[i1, i2]
        d1 = dense[i1, i1]
        d2 = dense[i2, i2]
        if a == 0 or b == 0 or e == 0:
            raise UnsupportedConfigurationError(
                f"{root!r},{m1!r},{m2!r} do not form a triangle in Q")
        det = d1 * d2 - e * e
        if det == 0:
            raise NumericalError("sparse-triangle interior block is singular")
        q = (a * a * d2 - 2 * a * b * e + b * b * d1) / det
        out = dense.copy()
        out[r, r] = out[r, r] - q
        return _drop_nodes(out, lap.index, {m1, m2})

    if node not in pos:
        raise IndexMismatchError(f"bus {node!r} not in Laplacian index")
    k = pos[node]
    neighbor_idx = [j for j in range(lap.n)
                    if j != k and dense[k, j] != 0]
    if len(neighbor_idx) == 1:
        r = neighbor_idx[0]
        out = dense.copy()
        out[r, r] = out[r, r] - dense[r, k] ** 2 / dense[k, k]
        return _drop_nodes(out, lap.index, {node})
    if len(neighbor_idx) == 2:
        r, s = neighbor_idx
        out = dense.copy()
        out[r, s] = out[s, r] = dense[r, s] - dense[r, k] * dense[s, k] / dense[k, k]
        out[r, r] = dense[r, r] - dense[r, k] ** 2 / dense[k, k]
        out[s, s] = dense[s, s] - dense[s, k] ** 2 / dense[k, k]
        return _drop_nodes(out, lap.index, {node})
    raise UnsupportedConfigurationError(
        f"bus {node!r} has degree {len(neighbor_idx)}; closed forms cover degree 1, "
        f"degree 2, and declared sparse triangles")


def _aligned(vector: np.ndarray, n: int, what: str) -> np.ndarray:
    arr = np.asarray(vector, dtype=complex)
    if arr.shape != (n,):
        raise IndexMismatchError(f"{what} has shape {arr.shape}, expected ({n},)")
    return arr


def reduced_currents(kron: KronResult, currents: np.ndarray,
                     full_index: tuple[BusId, ...]) -> np.ndarray:
    """C^red = C_[alpha] + Q^ac C_(alpha), aligned with the pre-reduction index."""
    c = _aligned(currents, len(full_index), "current vector")
    pos = {bid: i for i, bid in enumerate(full_index)}
    try:
        ref = [pos[b] for b in kron.alpha]
        inner = [pos[b] for b in kron.interior]
    except KeyError as exc:
        raise IndexMismatchError(f"bus {exc.args[0]!r} missing from full index") from exc
    return c[ref] + kron.q_ac @ c[inner]


def solve_voltages(lap: LoopyLaplacian, currents: np.ndarray) -> np.ndarray:
    """Solve Q V = C; residual is held to 1e-9 relative."""
    c = _aligned(currents, lap.n, "current vector")
    try:
        if lap.n <= DENSE_INTERIOR_LIMIT:
            v = np.linalg.solve(lap.dense(), c)
        else:
            v = spla.splu(lap.matrix.tocsc()).solve(c)
    except (np.linalg.LinAlgError, RuntimeError) as exc:
        raise NumericalError(f"loopy Laplacian is singular: {exc}") from exc
    if not np.all(np.isfinite(v)):
        raise NumericalError("loopy Laplacian is singular: non-finite solve")
    residual = np.linalg.norm(lap.matrix @ v - c)
    scale = np.linalg.norm(c)
    if scale > 0 and residual > SOLVE_RTOL * scale:
        raise NumericalError(
            f"voltage solve residual {residual / scale:.3e} exceeds {SOLVE_RTOL:g} relative")
    return v


def power_injections(voltages: np.ndarray, currents: np.ndarray) -> np.ndarray:
    """S = V o conj(C), elementwise."""
    v = np.asarray(voltages, dtype=complex)
    c = np.asarray(currents, dtype=complex)
    if v.shape != c.shape:
        raise IndexMismatchError(f"voltage {v.shape} and current {c.shape} differ")
    return v * np.conj(c)


def current_vector(net: Network, index: tuple[BusId, ...]) -> np.ndarray:
    """Injected currents of ``net`` aligned with ``index``."""
    try:
        return np.array([net.buses[b].current for b in index], dtype=complex)
    except KeyError as exc:
        raise IndexMismatchError(f"bus {exc.args[0]!r} not in network") from exc
