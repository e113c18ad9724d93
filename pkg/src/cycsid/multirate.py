"""Multirate sensing layer: rate specs, periodic 0/1 masks, masked simulation,
and the per-phase observability assumption check."""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, InvalidRateError, RankDeficientAError
from .numerics import DEFAULT_RANK_TOL, rank_with_tol
from .statespace import SignalLog, as_input_sequence, simulate


@dataclass(frozen=True)
class MultirateSpec:
    """Sensor rates M_1..M_l with period M = lcm and diagonal masks V_0..V_{M-1}."""

    rates: tuple
    offsets: tuple
    M: int
    masks: tuple  # M diagonal l x l arrays, entries 0/1

    @property
    def l(self):
        return len(self.rates)

    def mask_at(self, k):
        return self.masks[k % self.M]

    def pattern(self, N):
        """(N, l) 0/1 observation pattern over N steps."""
        diag = np.array([np.diag(V) for V in self.masks])
        return diag[np.arange(N) % self.M]


def build_masks(rates, offsets=None):
    """MultirateSpec for the given sensor periods.

    Sensor i reports when (k - offset_i) mod rate_i == 0; offsets default
    to zero, which reproduces the V_0 = I convention of the worked examples.
    """
    rates = tuple(int(r) for r in rates)
    if len(rates) == 0:
        raise InvalidRateError("at least one rate is required")
    if any(r < 1 for r in rates):
        raise InvalidRateError(f"rates must be positive, got {rates}")
    if offsets is None:
        offsets = tuple(0 for _ in rates)
    else:
        offsets = tuple(int(o) for o in offsets)
        if len(offsets) != len(rates):
            raise DimensionMismatchError("offsets must pair with rates")
    M = math.lcm(*rates)
    masks = []
    for k in range(M):
        d = [1.0 if (k - o) % r == 0 else 0.0 for r, o in zip(rates, offsets)]
        masks.append(np.diag(d))
    return MultirateSpec(rates=rates, offsets=offsets, M=M, masks=tuple(masks))


def simulate_multirate(ss, spec, u, x0=None):
    """Simulate with outputs masked by V_{k mod M}; unobserved entries are exact 0."""
    if spec.l != ss.l:
        raise DimensionMismatchError(
            f"spec has {spec.l} rates but the plant has {ss.l} outputs"
        )
    u = as_input_sequence(u, ss.m)
    log = simulate(ss, u, x0)
    obs = spec.pattern(log.N)
    return SignalLog(u=log.u, y=log.y * obs, x0=log.x0, obs=obs, x=log.x)


def check_observability_assumption(ss, spec, tol=DEFAULT_RANK_TOL):
    """Phases j whose masked pair (V_j C, A^M) is observable at horizon n.

    An empty set means no sampling phase pins down the full state.
    """
    n = ss.n
    if rank_with_tol(ss.A, tol) < n:
        raise RankDeficientAError("state matrix must have rank n for the multirate analysis")
    AM = np.linalg.matrix_power(ss.A, spec.M)
    good = set()
    for j in range(spec.M):
        VC = spec.masks[j] @ ss.C
        rows = []
        P = VC
        for _ in range(n):
            rows.append(P)
            P = P @ AM
        if rank_with_tol(np.vstack(rows), tol) == n:
            good.add(j)
    return good
