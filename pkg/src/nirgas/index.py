"""Circular-polarization refractive index with square-root branch tracking."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .atomsys import SIGMA_MINUS, SIGMA_PLUS
from .errors import InvalidInputError

PRINCIPAL, NEGATED = "principal", "negated"
BRANCH_POINT_TOL = 1e-14
JUMP_FACTOR = 10.0


class BranchPointWarning(UserWarning):
    """Both square roots coincide; the selected branch is arbitrary."""


@dataclass(frozen=True)
class IndexPoint:
    n: complex
    n2: complex
    branch: str
    fom: float
    polarization: str = SIGMA_MINUS
    delta21: Optional[float] = None
    r: Optional[float] = None
    branch_point: bool = False


@dataclass
class BranchPath:
    """Index values threaded along increasing pump rate."""

    r: List[float] = field(default_factory=list)
    coefficients: list = field(default_factory=list)
    points: List[IndexPoint] = field(default_factory=list)
    jumps: List[float] = field(default_factory=list)
    flagged: List[int] = field(default_factory=list)

    @property
    def n(self):
        return np.array([p.n for p in self.points])


def figure_of_merit(n):
    """``|Re n / Im n|``; ``math.inf`` when the imaginary part vanishes."""
    n = complex(n)
    if n.imag == 0:
        return math.inf
    return abs(n.real / n.imag)


def index_squared(rc):
    """Symmetric part ``eps mu - (xi_EH + xi_HE)^2 / 4`` whose root enters n."""
    return complex(rc.eps * rc.mu - (rc.xi_eh + rc.xi_he) ** 2 / 4)


def chirality_term(rc, polarization):
    sign = 1.0 if polarization == SIGMA_PLUS else -1.0
    return sign * 0.5j * (rc.xi_he - rc.xi_eh)


def refractive_index(rc, polarization=SIGMA_MINUS, prev=None, delta21=None, r=None):
    """Refractive index for circular polarization from response coefficients.

    Without ``prev`` the root with positive imaginary part is taken (passive
    medium). With ``prev`` the root closest to it wins. The chirality term is
    added after the root is chosen.
    """
    if polarization not in (SIGMA_MINUS, SIGMA_PLUS):
        raise InvalidInputError(f"unknown polarization {polarization!r}")
    s = index_squared(rc)
    if not np.isfinite(s):
        raise InvalidInputError("response coefficients must be finite")
    root = complex(np.sqrt(s))
    chi = chirality_term(rc, polarization)
    if prev is None:
        pick = root if root.imag > 0 or (root.imag == 0 and root.real >= 0) else -root
    else:
        # continuity is judged on the full index, chirality included
        pick = root if abs(root + chi - prev) <= abs(-root + chi - prev) else -root
    at_branch_point = abs(s) < BRANCH_POINT_TOL
    if at_branch_point:
        warnings.warn(f"n^2 = {s!r} is at a branch point", BranchPointWarning, stacklevel=2)
    n = pick + chi
    return IndexPoint(
        n=complex(n),
        n2=s,
        branch=PRINCIPAL if pick == root else NEGATED,
        fom=figure_of_merit(n),
        polarization=polarization,
        delta21=delta21,
        r=r,
        branch_point=at_branch_point,
    )


def track_branch(path, polarization=SIGMA_MINUS, delta21=None):
    """Thread the root choice along ``path``: a list of (r, ResponseCoefficients).

    A step is flagged when the jump in n exceeds ``JUMP_FACTOR`` times the
    square root of the jump in n^2, a sign of a missed branch crossing.
    """
    path = list(path)
    rs = [float(r) for r, _ in path]
    if any(b < a for a, b in zip(rs, rs[1:])):
        raise InvalidInputError("branch path must be sorted by ascending pump rate")
    out = BranchPath()
    prev = None
    for k, (r, rc) in enumerate(path):
        pt = refractive_index(rc, polarization, prev=prev, delta21=delta21, r=r)
        if prev is not None:
            jump = abs(pt.n - prev)
            scale = math.sqrt(abs(pt.n2 - out.points[-1].n2))
            out.jumps.append(jump)
            if jump > JUMP_FACTOR * scale:
                out.flagged.append(k)
        out.r.append(r)
        out.coefficients.append(rc)
        out.points.append(pt)
        prev = pt.n
    return out
