"""Node coupling: invariant extraction, macroscopic conditions, half-space solves.

At a node of degree n the half-space layer problems on all edges are coupled
through velocity reflection, f^i(0, v) = sum_j beta_ij f^j(0, -v) for v > 0.
For the symmetric node this reduces the coupling to N invariants per edge,
Z = R S^{-1} T (D, C, B, gamma)^T, whose staircase structure yields the two
macroscopic coupling coefficients delta_1 (for S + delta_1 q) and delta_2
(for rho + delta_2 q) plus the chain coefficients closing the layer unknowns.
The full node solve returns the asymptotic states and layer amplitudes of
every edge together with the reconstructed moments at x = 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegeneracyError, NumericalError, SingularSystemError
from .hermite import (
    HermiteTable,
    MomentTransform,
    QuadratureRule,
    build_rule,
    build_tables,
    hermite_functions,
    readonly,
)
from .layer import (
    LayerMatrix,
    LayerSpectrum,
    LiftMatrix,
    build_layer_matrix,
    build_lift,
    stable_manifold,
)

__all__ = [
    "ACOUSTIC_SPEED",
    "INFINITE",
    "SV_CUTOFF",
    "HALF_MOMENT_REFERENCE",
    "NodeTopology",
    "NodeOperators",
    "InvariantMatrix",
    "CouplingCoefficients",
    "MacroCouplingSystem",
    "NodeProblem",
    "NodeSolution",
    "invariant_matrix",
    "extract_deltas",
    "compute_coefficients",
    "maxwell_delta",
    "build_macro_system",
    "macro_determinant",
    "macro_coupling_solve",
    "solve_node",
    "solve_node_general",
    "node_distribution",
    "coupling_residual",
    "odd_moment_residual",
    "flux_residual",
]

#: Acoustic wave speed a with a^2 = 3.
ACOUSTIC_SPEED = math.sqrt(3.0)

#: Symbolic degree of the infinite symmetric node.
INFINITE = math.inf

#: Relative singular-value cutoff used by every rank decision in this module.
SV_CUTOFF = 1e-10

#: Literature half-moment values (delta_1, delta_2), stored for comparison only.
HALF_MOMENT_REFERENCE = {3: (0.5301, 0.3402), INFINITE: (1.5833, 0.9975)}


@dataclass(frozen=True)
class NodeTopology:
    """Node degree and coupling weights; ``beta=None`` means the symmetric node."""

    n: int | float
    beta: np.ndarray | None = None

    def __post_init__(self):
        if self.beta is None:
            if self.n != INFINITE and (not float(self.n).is_integer() or self.n < 2):
                raise ValueError(f"node degree must be an integer >= 2 or INFINITE, got {self.n}")
            return
        if self.n == INFINITE:
            raise ValueError("an explicit coupling matrix requires a finite node degree")
        beta = np.asarray(self.beta, dtype=float)
        n = int(self.n)
        if beta.shape != (n, n):
            raise ValueError(f"coupling matrix must be {n}x{n}, got {beta.shape}")
        if np.any(beta < 0.0):
            raise ValueError("coupling weights must be nonnegative")
        colsums = beta.sum(axis=0)
        if np.max(np.abs(colsums - 1.0)) > 1e-10:
            raise ValueError(f"conservation requires unit column sums, got {colsums}")
        object.__setattr__(self, "beta", beta)

    @classmethod
    def symmetric(cls, n: int | float) -> "NodeTopology":
        """Fully symmetric node: beta_ij = 1/(n-1) off the diagonal."""
        return cls(n=n, beta=None)

    @property
    def is_symmetric(self) -> bool:
        return self.beta is None

    def beta_matrix(self) -> np.ndarray:
        """Explicit coupling matrix (finite degree only)."""
        if self.beta is not None:
            return self.beta
        if self.n == INFINITE:
            raise ValueError("the infinite node has no explicit coupling matrix")
        n = int(self.n)
        return (np.ones((n, n)) - np.eye(n)) / (n - 1)


@dataclass(frozen=True)
class NodeOperators:
    """Velocity basis and layer spectrum shared by all node computations at fixed N."""

    rule: QuadratureRule
    table: HermiteTable
    transform: MomentTransform
    layer: LayerMatrix
    spectrum: LayerSpectrum
    lift: LiftMatrix

    @classmethod
    def build(cls, N: int) -> "NodeOperators":
        rule = build_rule(N)
        table, transform = build_tables(rule)
        layer = build_layer_matrix(N)
        spectrum = stable_manifold(layer)
        lift = build_lift(spectrum, N)
        return cls(rule, table, transform, layer, spectrum, lift)

    @property
    def N(self) -> int:
        return self.rule.half


@dataclass(frozen=True)
class InvariantMatrix:
    """The N x (N+1) node-invariant map M = R S^{-1} T and its pairing matrix R."""

    M: np.ndarray
    R: np.ndarray
    n: int | float


def _pairing_matrix(N: int, n: int | float) -> np.ndarray:
    R = np.zeros((N, 2 * N))
    for k in range(1, N + 1):
        if n == INFINITE:
            # entrywise limit of R/(n-1): select the positive-velocity components
            R[k - 1, N + k - 1] = 1.0
        else:
            R[k - 1, N + k - 1] = n - 1.0
            R[k - 1, N - k] = 1.0
    return R


def invariant_matrix(transform: MomentTransform, spectrum: LayerSpectrum,
                     topology: NodeTopology) -> InvariantMatrix:
    """Build M = R S^{-1} T for a symmetric node (finite degree or INFINITE)."""
    if not topology.is_symmetric:
        raise ValueError("invariant extraction supports only symmetric topologies; "
                         "use solve_node_general for an arbitrary coupling matrix")
    N = transform.matrix.shape[0] // 2
    lift = build_lift(spectrum, N)
    lifted = transform.solve(lift.matrix)  # S^{-1} T, rows are velocity components
    R = _pairing_matrix(N, topology.n)
    if topology.n == INFINITE:
        M = lifted[N:, :]
    else:
        M = R @ lifted
    if not np.all(np.isfinite(M)):
        raise NumericalError("invariant matrix contains non-finite entries")
    readonly(M, R)
    return InvariantMatrix(M, R, topology.n)


@dataclass(frozen=True)
class CouplingCoefficients:
    """Macroscopic coupling coefficients and the layer-closing chain.

    ``delta1`` multiplies q in the S-invariant, ``delta2`` in the rho-invariant;
    ``delta_tilde`` holds the N-2 chain coefficients of the gamma invariants.
    """

    delta1: float
    delta2: float
    delta_tilde: np.ndarray
    N: int
    n: int | float


def _left_null_vector(sub: np.ndarray, label: str) -> np.ndarray:
    u, s, _ = np.linalg.svd(sub)
    if s[-1] <= SV_CUTOFF * s[0]:
        raise DegeneracyError(
            f"left null space of the {label} subproblem is not one-dimensional",
            singular_values=s,
        )
    return u[:, -1]


def extract_deltas(invariants: InvariantMatrix) -> CouplingCoefficients:
    """Read delta_1, delta_2 and the chain coefficients off the invariant matrix.

    delta_1 comes from the unique row combination vanishing on the B and gamma
    columns (normalized to unit D coefficient), delta_2 with D and B exchanged;
    both via SVDs of the corresponding column submatrices. The chain follows
    from consecutive component ratios of the right null vector of M, which is
    the staircase elimination in the column order (D, C, B, gamma_1, ...).
    Rows are equilibrated first; this leaves every null space unchanged.
    """
    M = invariants.M
    N, cols = M.shape
    if cols != N + 1:
        raise ValueError(f"invariant matrix must be N x (N+1), got {M.shape}")
    scale = np.max(np.abs(M), axis=1)
    if np.any(scale == 0.0):
        raise DegeneracyError("invariant matrix has an identically zero row")
    Ms = M / scale[:, None]
    _, s, vt = np.linalg.svd(Ms)
    if s[-1] <= SV_CUTOFF * s[0]:
        raise DegeneracyError("invariant matrix is numerically row-rank deficient",
                              singular_values=s)
    eta = vt[-1]

    w1 = _left_null_vector(Ms[:, 2:], "delta1")
    z1 = w1 @ Ms
    delta1 = z1[1] / z1[0]
    w2 = _left_null_vector(Ms[:, np.r_[0, 3:cols]], "delta2")
    z2 = w2 @ Ms
    delta2 = z2[1] / z2[2]

    if not np.all(np.isfinite(eta)):
        raise DegeneracyError("null vector of the invariant matrix is not finite",
                              singular_values=s)
    # Chain coefficients from consecutive null-vector components. Components
    # below the SVD noise floor carry no information, and any O(1) coefficient
    # on those coordinates annihilates the null vector equally well; a ratio of
    # two sub-floor components, however, can come out arbitrarily small and
    # turn the recurrence between consecutive cross-edge differences into a
    # noise amplifier. Use the neutral value 1 where numerator and denominator
    # are both noise, and cap the denominator where only it is.
    floor = np.finfo(float).eps  # eta has unit norm
    numer = np.concatenate(([eta[1]], eta[3:-1]))
    denom = eta[3:]
    resolved_den = np.abs(denom) >= floor
    resolved_num = np.abs(numer) >= floor
    safe_den = np.where(resolved_den, denom, np.where(denom < 0.0, -floor, floor))
    delta_tilde = np.where(resolved_den | resolved_num, -numer / safe_den, 1.0)
    readonly(delta_tilde)
    return CouplingCoefficients(float(delta1), float(delta2), delta_tilde,
                                N, invariants.n)


def compute_coefficients(ops: NodeOperators, topology: NodeTopology) -> CouplingCoefficients:
    """Convenience: invariant matrix plus extraction in one call."""
    return extract_deltas(invariant_matrix(ops.transform, ops.spectrum, topology))


def maxwell_delta(n: int | float) -> tuple[float, float]:
    """First-two-half-moment (Maxwell) approximation of the coupling coefficients.

    delta_1 = 4(n-2)/(n sqrt(2 pi)), delta_2 = ((n-2)/n) 2(pi-2)/sqrt(2 pi);
    INFINITE takes the n -> infinity limit.
    """
    if n == INFINITE:
        factor = 1.0
    else:
        if not float(n).is_integer() or n < 2:
            raise ValueError(f"node degree must be an integer >= 2 or INFINITE, got {n}")
        factor = (n - 2.0) / n
    root = math.sqrt(2.0 * math.pi)
    return 4.0 * factor / root, factor * 2.0 * (math.pi - 2.0) / root


@dataclass(frozen=True)
class MacroCouplingSystem:
    """The 3n x 3n block system for the asymptotic states (D, C, B) of all edges."""

    calA: np.ndarray
    rhs: np.ndarray


def build_macro_system(delta1: float, delta2: float, n: int,
                       incoming: np.ndarray, zero_balance: float) -> MacroCouplingSystem:
    """Assemble the macroscopic block system for unknowns m = (D^i, C^i, B^i)."""
    incoming = np.asarray(incoming, dtype=float)
    if incoming.shape != (n,):
        raise ValueError(f"incoming data must have length {n}, got {incoming.shape}")
    diff = np.zeros((n, n))
    idx = np.arange(1, n)
    diff[idx, idx - 1] = 1.0
    diff[idx, idx] = -1.0
    ones_row = np.zeros((n, n))
    ones_row[0, :] = 1.0
    eye = np.eye(n)
    zero = np.zeros((n, n))
    calA = np.block([
        [diff, ones_row + delta1 * diff, zero],
        [eye, -ACOUSTIC_SPEED * eye, zero],
        [ones_row, delta2 * diff, -3.0 * ones_row + diff],
    ])
    rhs = np.concatenate([np.zeros(n), incoming, [zero_balance], np.zeros(n - 1)])
    return MacroCouplingSystem(calA, rhs)


def macro_determinant(n: int, delta1: float) -> float:
    """Closed-form determinant (-1)^{n+1} 3 n^2 (a + delta_1)^{n-1} of the block system.

    Schur reduction of the block structure: the (D, C) blocks contribute
    det(-aI) det(A + (B + delta_1 A)/a) = (-1)^n n (a + delta_1)^{n-1} and the
    density block det(A - 3B) = -3n. The system is singular exactly at
    delta_1 = -a and invertible for every nonnegative delta_1.
    """
    return (-1.0) ** (n + 1) * 3.0 * n ** 2 * (ACOUSTIC_SPEED + delta1) ** (n - 1)


def macro_coupling_solve(coefficients: CouplingCoefficients, incoming: np.ndarray,
                         zero_balance: float, n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Solve the macroscopic coupling system; returns per-edge (S_inf, q_inf, rho_inf)."""
    if abs(1.0 + ACOUSTIC_SPEED * coefficients.delta1) <= 1e-12:
        raise SingularSystemError(
            f"delta1 = {coefficients.delta1} makes the coupling system singular "
            "(delta1 = -1/a)")
    if abs(ACOUSTIC_SPEED + coefficients.delta1) <= 1e-12:
        raise SingularSystemError(
            f"delta1 = {coefficients.delta1} makes the coupling system singular "
            "(delta1 = -a)")
    system = build_macro_system(coefficients.delta1, coefficients.delta2, n,
                                incoming, zero_balance)
    m = np.linalg.solve(system.calA, system.rhs)
    return m[:n], m[n:2 * n], m[2 * n:]


@dataclass(frozen=True)
class NodeProblem:
    """Data of a coupled half-space problem at one node."""

    topology: NodeTopology
    coefficients: CouplingCoefficients
    incoming: np.ndarray
    zero_balance: float

    @classmethod
    def from_macro_data(cls, topology: NodeTopology, coefficients: CouplingCoefficients,
                        rho0: np.ndarray, q0: np.ndarray, S0: np.ndarray) -> "NodeProblem":
        """Build incoming characteristics r_- = S0 - a q0 and the zero-characteristic balance."""
        rho0, q0, S0 = (np.asarray(v, dtype=float) for v in (rho0, q0, S0))
        return cls(topology, coefficients, S0 - ACOUSTIC_SPEED * q0,
                   float(np.sum(S0 - 3.0 * rho0)))


@dataclass(frozen=True)
class NodeSolution:
    """Per-edge asymptotic states, layer amplitudes and reconstructed node moments.

    ``layer_eigenvalues`` and ``rho_layer_amplitudes`` carry the modal density
    contributions (4/sqrt3) gamma_j (e_1^T r_j) so the composite solution can be
    evaluated without the spectrum object.
    """

    D: np.ndarray
    C: np.ndarray
    B: np.ndarray
    gamma: np.ndarray
    rho_at_0: np.ndarray
    g_at_0: np.ndarray
    layer_eigenvalues: np.ndarray
    rho_layer_amplitudes: np.ndarray

    @property
    def S_inf(self) -> np.ndarray:
        return self.D

    @property
    def q_inf(self) -> np.ndarray:
        return self.C

    @property
    def rho_inf(self) -> np.ndarray:
        return self.B


def _package_solution(m: np.ndarray, ops: NodeOperators) -> NodeSolution:
    # m has shape (n_edges, N+1) with per-edge ordering (D, C, B, gamma)
    D, C, B = m[:, 0].copy(), m[:, 1].copy(), m[:, 2].copy()
    gamma = m[:, 3:].copy()
    e1r = ops.spectrum.R2plus[0, :]
    modal = (4.0 / np.sqrt(3.0)) * gamma * e1r[None, :]
    rho_at_0 = B + modal.sum(axis=1)
    g_at_0 = m @ ops.lift.matrix.T
    eigenvalues = ops.spectrum.positive_eigenvalues.copy()
    readonly(D, C, B, gamma, rho_at_0, g_at_0, eigenvalues, modal)
    return NodeSolution(D, C, B, gamma, rho_at_0, g_at_0, eigenvalues, modal)


def solve_node(problem: NodeProblem, ops: NodeOperators) -> NodeSolution:
    """Solve the coupled half-space problem at a symmetric node.

    Assembles the n(N+1) square system: outgoing characteristics D - a C = r_-,
    cross-edge equality of the N node invariants (which is the equality of
    D + delta1 C, of B + delta2 C and of the chain invariants, expressed in the
    numerically stable row basis of the invariant matrix), flux balance
    sum C = 0, the zero-characteristic balance sum (D - 3B) = sum (S0 - 3 rho0),
    and the odd-moment sum conditions on the layer amplitudes.
    """
    topo = problem.topology
    if not topo.is_symmetric or topo.n == INFINITE:
        raise ValueError("solve_node handles finite symmetric nodes; "
                         "use solve_node_general for arbitrary coupling matrices")
    coeff = problem.coefficients
    N = ops.N
    if coeff.N != N:
        raise ValueError(f"coefficients were computed for N={coeff.N}, operators have N={N}")
    if coeff.n != topo.n:
        raise ValueError(f"coefficients were computed for n={coeff.n}, topology has n={topo.n}")
    n = int(topo.n)
    incoming = np.asarray(problem.incoming, dtype=float)
    if incoming.shape != (n,):
        raise ValueError(f"incoming vector must have length {n}, got {incoming.shape}")

    size = N + 1
    total = n * size
    A = np.zeros((total, total))
    b = np.zeros(total)
    d_col = np.arange(n) * size
    c_col = d_col + 1
    b_col = d_col + 2
    row = 0
    for i in range(n):
        A[row, d_col[i]] = 1.0
        A[row, c_col[i]] = -ACOUSTIC_SPEED
        b[row] = incoming[i]
        row += 1
    # cross-edge equality of all N node invariants at once: the equilibrated
    # rows of M span exactly the D + delta1 C, B + delta2 C and chain
    # invariants, but stay well conditioned at large N where the literal
    # chain coefficients degenerate into null-vector noise ratios
    inv = invariant_matrix(ops.transform, ops.spectrum, topo)
    Ms = inv.M / np.max(np.abs(inv.M), axis=1)[:, None]
    for i in range(n - 1):
        A[row:row + N, d_col[i]:d_col[i] + size] = Ms
        A[row:row + N, d_col[i + 1]:d_col[i + 1] + size] = -Ms
        row += N
    A[row, c_col] = 1.0
    row += 1
    A[row, d_col] = 1.0
    A[row, b_col] = -3.0
    b[row] = problem.zero_balance
    row += 1
    odd_rows = ops.spectrum.R2plus[1::2, :]  # odd moments g5, g7, ..., g_{2N-1}
    for j in range(N - 2):
        for i in range(n):
            A[row, d_col[i] + 3:d_col[i] + size] = odd_rows[j, :]
        row += 1
    assert row == total

    scale = np.max(np.abs(A), axis=1)
    A /= scale[:, None]
    b /= scale
    try:
        m = np.linalg.solve(A, b)
    except np.linalg.LinAlgError as exc:
        smin = np.linalg.svd(A, compute_uv=False)[-1]
        raise SingularSystemError(
            f"node system is singular (smallest singular value {smin:.3e})") from exc
    residual = np.max(np.abs(A @ m - b))
    if residual > 1e-8 * max(1.0, np.max(np.abs(b))):
        raise NumericalError(f"node system solved with residual {residual:.3e}")
    return _package_solution(m.reshape(n, size), ops)


def solve_node_general(topology: NodeTopology, incoming: np.ndarray,
                       zero_balance: float, ops: NodeOperators) -> NodeSolution:
    """Solve the node problem for an arbitrary conservative coupling matrix.

    Uses the raw nN kinetic coupling equations in velocity space plus the n
    outgoing-characteristic conditions and the zero-characteristic balance,
    solved in the least-squares sense with rank monitoring. For a symmetric
    coupling matrix the result coincides with :func:`solve_node`.
    """
    beta = topology.beta_matrix()
    n = int(topology.n)
    incoming = np.asarray(incoming, dtype=float)
    if incoming.shape != (n,):
        raise ValueError(f"incoming vector must have length {n}, got {incoming.shape}")
    N = ops.N
    size = N + 1
    lifted = ops.transform.solve(ops.lift.matrix)  # S^{-1} T
    rows = n * N + n + 1
    A = np.zeros((rows, n * size))
    b = np.zeros(rows)
    row = 0
    for i in range(n):
        for p in range(N, 2 * N):
            A[row, i * size:(i + 1) * size] += lifted[p, :]
            mirrored = lifted[2 * N - 1 - p, :]
            for j in range(n):
                A[row, j * size:(j + 1) * size] -= beta[i, j] * mirrored
            row += 1
    for i in range(n):
        A[row, i * size] = 1.0
        A[row, i * size + 1] = -ACOUSTIC_SPEED
        b[row] = incoming[i]
        row += 1
    for i in range(n):
        A[row, i * size] = 1.0
        A[row, i * size + 2] = -3.0
    b[row] = zero_balance
    row += 1
    assert row == rows

    scale = np.max(np.abs(A), axis=1)
    A /= scale[:, None]
    b /= scale
    m, _, rank, sv = np.linalg.lstsq(A, b, rcond=SV_CUTOFF)
    if rank < n * size:
        raise DegeneracyError(
            f"coupling system has effective rank {rank} < {n * size}; "
            "the node problem is degenerate", singular_values=sv)
    residual = np.max(np.abs(A @ m - b))
    if residual > 1e-8 * max(1.0, np.max(np.abs(b))):
        raise NumericalError(f"coupling equations are inconsistent (residual {residual:.3e})")
    return _package_solution(m.reshape(n, size), ops)


def node_distribution(solution: NodeSolution, edge: int, v_samples: np.ndarray) -> np.ndarray:
    """Distribution at the node, f(v) = H_0(v/sqrt2) sum_k g_k H_k(v/sqrt2)."""
    g = solution.g_at_0[edge]
    u = np.asarray(v_samples, dtype=float) / np.sqrt(2.0)
    h = hermite_functions(u, g.size)
    return h[0] * (g @ h)


def coupling_residual(solution: NodeSolution, topology: NodeTopology,
                      transform: MomentTransform) -> float:
    """Max violation of f^i(0, v) = sum_j beta_ij f^j(0, -v) over positive velocities."""
    beta = topology.beta_matrix()
    f = transform.solve(solution.g_at_0.T).T
    N = f.shape[1] // 2
    f_pos = f[:, N:]
    f_mirror = f[:, :N][:, ::-1]
    return float(np.max(np.abs(f_pos - beta @ f_mirror)))


def odd_moment_residual(solution: NodeSolution) -> float:
    """Max over odd k of |sum_i g^i_k(0)|, zero for conservative coupling."""
    totals = solution.g_at_0.sum(axis=0)
    return float(np.max(np.abs(totals[1::2])))


def flux_residual(solution: NodeSolution) -> float:
    """|sum_i C^i|, the flux balance violation."""
    return float(abs(solution.C.sum()))
