"""State coordinate transformation that turns an identified dense model back
into cyclic-reformulation shape, plus component extraction and validation.

The transform matrix is assembled from powers of the identified state matrix
applied to the input matrix, shift-matrix rotations, and a row-selector
family; two selector-index conventions are supported ("general" pairs power
Mi+j with selector (Mi+j) mod n, "example" pairs it with selector i).  Both
are regular on every system in the test corpus; the pipeline tries "general"
first and falls back.
"""

from dataclasses import dataclass

import numpy as np

from .cyclic import IDENTIFIED_TOL, is_block_diagonal, is_cyclic_matrix, shift_matrix
from .errors import DimensionMismatchError, RankConditionError, StructureViolationError
from .numerics import DEFAULT_RANK_TOL, invert, rank_with_tol
from .statespace import StateSpace, tf_distance, transfer_functions

CONVENTIONS = ("general", "example")


@dataclass(frozen=True)
class SelectorF:
    """n row-selector blocks F_0..F_{n-1}, each n x l; [F_0 ... F_{n-1}] has rank n."""

    blocks: tuple

    def __post_init__(self):
        if rank_with_tol(np.hstack(self.blocks)) < self.blocks[0].shape[0]:
            raise RankConditionError("stacked F blocks must have full row rank")


@dataclass(frozen=True)
class SelectorG:
    """n input-selector blocks G_0..G_{n-1}, each m x n; stacked rank n."""

    blocks: tuple

    def __post_init__(self):
        if rank_with_tol(np.vstack(self.blocks)) < self.blocks[0].shape[1]:
            raise RankConditionError("stacked G blocks must have full column rank")


def default_selector_F(n, l):
    """Unit selectors: block j carries a 1 at row j of its first column."""
    blocks = []
    for j in range(n):
        F = np.zeros((n, l))
        F[j, 0] = 1.0
        blocks.append(F)
    return SelectorF(blocks=tuple(blocks))


def default_selector_G(n, m):
    """Unit selectors: block j carries a 1 at column j of its first row."""
    blocks = []
    for j in range(n):
        G = np.zeros((m, n))
        G[0, j] = 1.0
        blocks.append(G)
    return SelectorG(blocks=tuple(blocks))


def lift_selector(block, M):
    """M-fold block-diagonal replication of one selector block."""
    r, c = block.shape
    out = np.zeros((M * r, M * c))
    for i in range(M):
        out[i * r:(i + 1) * r, i * c:(i + 1) * c] = block
    return out


def _shift_powers(q, M):
    S = shift_matrix(q, M)
    powers = [np.eye(M * q)]
    for _ in range(M - 1):
        powers.append(powers[-1] @ S)
    return powers


def build_X_check(cs, F):
    """Selector-weighted observability aggregate of a cycled system.

    Sums lifted F_i * S_l^j * C * A^(Mi+j) over i < n, j < M: the inner
    j-sum pools every observed phase into one row block and the outer i-sum
    stacks it against powers of A^M, so the aggregate is block diagonal with
    rank Mn whenever the masked observability holds and the selector is well
    chosen.  Pairing the selector with j mod n instead collapses the rank
    when masking leaves one active phase per period.
    """
    n, l, M = cs.n, cs.l, cs.M
    Fl = [lift_selector(b, M) for b in F.blocks]
    Sl = _shift_powers(l, M)
    X = np.zeros((M * n, M * n))
    P = cs.C.copy()  # C A^p, advanced in p
    for p in range(n * M):
        i, j = divmod(p, M)
        X += Fl[i] @ Sl[j] @ P
        P = P @ cs.A
    return X


def build_Y_check(cs, G):
    """Controllability-side aggregate: sums A^p B S_m^(p%M + 1) G_(p mod n)
    over p < Mn.

    Indexing the selector by p mod n sweeps every block as the power grows
    (an index of p mod M alone never reaches blocks beyond G_{M-1} when
    M < n); each diagonal block then collects consecutive powers of A
    applied to B, so the aggregate has rank Mn for controllable plants.
    """
    n, m, M = cs.n, cs.m, cs.M
    Gl = [lift_selector(b, M) for b in G.blocks]
    Sm = _shift_powers(m, M)
    Y = np.zeros((M * n, M * n))
    P = cs.B.copy()  # A^p B
    for p in range(n * M):
        j = p % M
        Y += P @ Sm[(j + 1) % M] @ Gl[p % n]
        P = cs.A @ P
    return Y


@dataclass(frozen=True)
class TransformResult:
    matrix: np.ndarray
    rank: int
    convention: str
    order: int

    @property
    def regular(self):
        return self.rank == self.order


def build_transform(idm, G, n, m, M, convention="general"):
    """Coordinate transform from the identified model's reachability data.

    convention "general": power Mi+j pairs with selector (Mi+j) mod n;
    convention "example": it pairs with selector i.  Shift exponents are
    reduced mod M (the shift has period M exactly).  The matrix is returned
    with its numerical rank regardless of regularity; callers decide.
    """
    if convention not in CONVENTIONS:
        raise ValueError(f"convention must be one of {CONVENTIONS}")
    order = M * n
    if idm.A.shape != (order, order):
        raise DimensionMismatchError(
            f"identified order {idm.A.shape[0]} != M*n = {order}"
        )
    Gl = [lift_selector(b, M) for b in G.blocks]
    Sm = _shift_powers(m, M)
    T = np.zeros((order, order))
    P = idm.B.copy()  # A*^p B*
    for p in range(order):
        i, j = divmod(p, M)
        sel = Gl[p % n] if convention == "general" else Gl[i]
        T += P @ Sm[(j + 1) % M] @ sel
        P = idm.A @ P
    return TransformResult(matrix=T, rank=rank_with_tol(T), convention=convention,
                           order=order)


def apply_transform(idm, T, tol=DEFAULT_RANK_TOL):
    """(T^-1 A T, T^-1 B, C T, D); raises SingularMatrixError if T is not regular."""
    Ti = invert(T, tol)
    return Ti @ idm.A @ T, Ti @ idm.B, idm.C @ T, idm.D.copy()


@dataclass
class CyclicFormReport:
    """Structure evidence for one transformed model."""

    reports: dict  # name -> StructureReport
    passed: bool
    max_offpattern: float


def verify_cyclic_form(Am, Bm, Cm, Dm, n, m, l, M, tol=IDENTIFIED_TOL):
    """Check the four transformed matrices against the cyclic-reformulation
    pattern: dynamics and input cyclic, output and feedthrough block diagonal."""
    reports = {
        "A_cyclic": is_cyclic_matrix(Am, n, n, M, tol),
        "B_cyclic": is_cyclic_matrix(Bm, n, m, M, tol),
        "C_block_diagonal": is_block_diagonal(Cm, l, n, M, tol),
        "D_block_diagonal": is_block_diagonal(Dm, l, m, M, tol),
    }
    worst = max(r.max_offpattern for r in reports.values())
    return CyclicFormReport(reports=reports,
                            passed=all(r.passed for r in reports.values()),
                            max_offpattern=worst)


def aggregate_diagnostics(idm, T, F, tol=IDENTIFIED_TOL):
    """Runtime evidence behind the transform's correctness argument.

    The selector aggregate (built like build_X_check but on the identified
    model and composed with T) must be block diagonal and regular, and its
    product with the transformed state matrix must be cyclic.
    """
    n, l, M = idm.n, idm.l, idm.M
    Fl = [lift_selector(b, M) for b in F.blocks]
    Sl = _shift_powers(l, M)
    X = np.zeros((M * n, M * n))
    P = idm.C.copy()
    for p in range(n * M):
        i, j = divmod(p, M)
        X += Fl[i] @ Sl[j] @ P
        P = P @ idm.A
    X = X @ T
    Am = np.linalg.solve(T, idm.A @ T)
    Z = X @ Am
    return {
        "selector_aggregate_blockdiag": is_block_diagonal(X, n, n, M, tol),
        "selector_aggregate_rank": rank_with_tol(X),
        "aggregate_dynamics_cyclic": is_cyclic_matrix(Z, n, n, M, tol),
    }


@dataclass
class CyclicModel:
    """Per-phase components read off a transformed model, plus evidence.

    Raw on-pattern blocks are stored untouched; assemble() gives the cleaned
    view with everything off-pattern forced to exact zero.
    """

    A_phases: list
    B_phases: list
    C_phases: list
    D_phases: list
    T: np.ndarray | None
    structure: CyclicFormReport
    n: int
    m: int
    l: int
    M: int
    source: object | None = None  # identified model the components came from

    def phase_system(self, i=0):
        """Components of phase i packaged as a plain LTI system."""
        return StateSpace(self.A_phases[i], self.B_phases[i],
                          self.C_phases[i], self.D_phases[i])

    def assemble(self):
        """Rebuild (A, B, C, D) in exact cyclic-reformulation shape."""
        n, m, l, M = self.n, self.m, self.l, self.M
        Am = np.zeros((M * n, M * n))
        Bm = np.zeros((M * n, M * m))
        Cm = np.zeros((M * l, M * n))
        Dm = np.zeros((M * l, M * m))
        for i in range(M):
            r = (i + 1) % M
            Am[r * n:(r + 1) * n, i * n:(i + 1) * n] = self.A_phases[i]
            Bm[r * n:(r + 1) * n, i * m:(i + 1) * m] = self.B_phases[i]
            Cm[i * l:(i + 1) * l, i * n:(i + 1) * n] = self.C_phases[i]
            Dm[i * l:(i + 1) * l, i * m:(i + 1) * m] = self.D_phases[i]
        return Am, Bm, Cm, Dm

    def component_spread(self):
        """Max pairwise deviation among the A phases and among the B phases."""
        devA = max(float(np.abs(Ai - self.A_phases[0]).max()) for Ai in self.A_phases)
        devB = max(float(np.abs(Bi - self.B_phases[0]).max()) for Bi in self.B_phases)
        return devA, devB


def extract_components(Am, Bm, Cm, Dm, n, m, l, M, tol=IDENTIFIED_TOL, T=None):
    """Read the per-phase blocks out of a transformed model.

    Phase i of the dynamics and input sits at block (i+1 mod M, i); output
    and feedthrough phases sit on the diagonal.  Raises
    StructureViolationError when the matrices fail the pattern check at tol.
    """
    report = verify_cyclic_form(Am, Bm, Cm, Dm, n, m, l, M, tol)
    if not report.passed:
        bad = [k for k, r in report.reports.items() if not r.passed]
        raise StructureViolationError(
            f"off-pattern mass {report.max_offpattern:g} exceeds {tol:g} in {', '.join(bad)}"
        )
    A_phases, B_phases, C_phases, D_phases = [], [], [], []
    for i in range(M):
        r = (i + 1) % M
        A_phases.append(Am[r * n:(r + 1) * n, i * n:(i + 1) * n].copy())
        B_phases.append(Bm[r * n:(r + 1) * n, i * m:(i + 1) * m].copy())
        C_phases.append(Cm[i * l:(i + 1) * l, i * n:(i + 1) * n].copy())
        D_phases.append(Dm[i * l:(i + 1) * l, i * m:(i + 1) * m].copy())
    return CyclicModel(A_phases=A_phases, B_phases=B_phases, C_phases=C_phases,
                       D_phases=D_phases, T=T, structure=report, n=n, m=m, l=l, M=M)


def model_transfer_check(cm, reference, tol):
    """Compare phase-0 transfer functions against a reference plant.

    Returns (passed, distances) with one tf_distance per output/input pair.
    """
    got = transfer_functions(cm.phase_system(0))
    want = transfer_functions(reference)
    distances = np.array([
        [tf_distance(want[i][j], got[i][j]) for j in range(reference.m)]
        for i in range(reference.l)
    ])
    return bool(np.all(distances <= tol)), distances
