# compactified_fans.py
#
# Cones and fans in the partial compactification of N_R by the strata
# N_sigma = Hom(M n sigma^perp, Z) of an ambient fan. Topology is carried as data:
# a compactified cone is its carrier stratum plus a cone there, and its closure
# is described by the table of traces on the deeper strata.

import logging
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

from sympy import Matrix

from services.core_algebra import IntVector, dot, integer_kernel, solve_rows
from services.fans import Cone, Fan, cone_from_generators
from utils.errors import ConeNotInFan, InvalidFunctional, NotAFacePair

logger = logging.getLogger(__name__)


def _normalize_sign(v: IntVector) -> IntVector:
    lead = next((x for x in v if x != 0), 0)
    return v if lead >= 0 else tuple(-x for x in v)


@dataclass(frozen=True)
class Stratum:
    """
    The stratum N_sigma of a cone sigma in the ambient fan.

    `basis` is a Z-basis of M n sigma^perp; its rows are the projection
    pi_sigma: N -> N_sigma = Z^(n - dim sigma).
    """

    fan: Fan = field(compare=False, repr=False)
    sigma: Cone
    basis: Tuple[IntVector, ...]

    @property
    def rank(self) -> int:
        return len(self.basis)

    @property
    def projection(self) -> Matrix:
        return Matrix(len(self.basis), self.sigma.rank, lambda i, j: self.basis[i][j])

    def project(self, x: Sequence) -> Tuple:
        return tuple(dot(b, x) for b in self.basis)

    def project_cone(self, cone: Cone) -> Cone:
        return cone_from_generators([self.project(g) for g in cone.generators], self.rank)

    def map_to(self, deeper: "Stratum") -> Matrix:
        """Integer matrix A with pi_tau = A pi_sigma, for sigma a face of tau."""
        rows = []
        for b in deeper.basis:
            coords = solve_rows(self.basis, b)
            rows.append([int(c) for c in coords])
        return Matrix(len(rows), self.rank, lambda i, j: rows[i][j])


@lru_cache(maxsize=None)
def stratum_projection(fan: Fan, sigma: Cone) -> Stratum:
    """
    Lattice data of the stratum of sigma.

    Raises:
        ConeNotInFan: sigma is not a cone of the fan.
    """
    if sigma not in fan:
        raise ConeNotInFan(f"{sigma.generators} is not a cone of the fan")
    basis = tuple(_normalize_sign(b) for b in integer_kernel(sigma.generators, fan.rank))
    return Stratum(fan, sigma, basis)


def _image_in(stratum: Stratum, deeper: Stratum, cone: Cone) -> Cone:
    A = stratum.map_to(deeper)
    return cone_from_generators([tuple(A * Matrix(g)) for g in cone.generators], deeper.rank)


def boundary_trace(fan: Fan, sigma: Cone, C: Cone, tau: Cone) -> Optional[Cone]:
    """
    Limit points of C (a cone in N_sigma) in the stratum N_tau.

    The trace is empty exactly when C misses the relative interior of the image
    of tau in N_sigma; otherwise it is the image of C under N_sigma -> N_tau.

    Returns:
        The trace as a cone in N_tau coordinates, or None when empty.

    Raises:
        NotAFacePair: sigma is not a face of tau.
    """
    if not sigma.is_face_of(tau):
        raise NotAFacePair(f"{sigma.generators} is not a face of {tau.generators}")
    here = stratum_projection(fan, sigma)
    there = stratum_projection(fan, tau)
    tau_bar = here.project_cone(tau)
    meet = C.intersect(tau_bar)
    if not tau_bar.relint_contains(meet.interior_point()):
        return None
    return _image_in(here, there, C)


@dataclass(frozen=True)
class CompactifiedCone:
    """The closure of a cone `cone` living in the stratum of `carrier`."""

    fan: Fan = field(repr=False)
    carrier: Cone
    cone: Cone

    @property
    def dim(self) -> int:
        return self.cone.dim

    def trace(self, tau: Cone) -> Optional[Cone]:
        return boundary_trace(self.fan, self.carrier, self.cone, tau)

    def trace_table(self) -> Dict[Cone, Cone]:
        """Nonempty traces on every stratum tau having the carrier as a face."""
        return _trace_table(self)


@lru_cache(maxsize=None)
def _trace_table(P: CompactifiedCone) -> Dict[Cone, Cone]:
    table = {}
    for tau in P.fan.cones:
        if P.carrier.is_face_of(tau):
            t = P.trace(tau)
            if t is not None:
                table[tau] = t
    return table


def closure_of(fan: Fan, cone: Cone) -> CompactifiedCone:
    """Closure of a cone of N_R in the partial compactification."""
    return CompactifiedCone(fan, cone_from_generators([], fan.rank), cone)


def compactified_face(P: CompactifiedCone, a: Sequence[int], tau: Cone) -> Optional[CompactifiedCone]:
    """
    Trace on N_tau of the argmin face P^a of the functional a.

    a is an element of M that vanishes on the carrier cone, so it defines a
    linear form on N_sigma.

    Returns:
        The face as a compactified cone carried by tau, or None when it is empty.
        P^a is empty when a is negative on some generator of the cone (a is
        then unbounded below on the closure), and its trace is empty when the
        argmin face misses the relative interior of the image of tau.

    Raises:
        InvalidFunctional: a does not vanish on the carrier.
        ConeNotInFan: tau is not a cone of the ambient fan.
    """
    a = tuple(a)
    if len(a) != P.fan.rank or any(dot(a, g) != 0 for g in P.carrier.generators):
        raise InvalidFunctional(f"{a} is not in M n sigma^perp for the carrier {P.carrier.generators}")
    if tau not in P.fan:
        raise ConeNotInFan(f"{tau.generators} is not a cone of the fan")
    stratum = stratum_projection(P.fan, P.carrier)
    coords = solve_rows(stratum.basis, a)
    values = [dot(coords, g) for g in P.cone.generators]
    if any(v < 0 for v in values):
        return None
    face = P.cone.face_for([coords])
    trace = boundary_trace(P.fan, P.carrier, face, tau)
    if trace is None:
        return None
    return CompactifiedCone(P.fan, tau, trace)


def compactified_faces(P: CompactifiedCone) -> List[CompactifiedCone]:
    """Every face of the closure: traces of faces of the cone on every deeper stratum."""
    found = set()
    for face in P.cone.faces():
        for tau in P.fan.cones:
            if P.carrier.is_face_of(tau):
                trace = boundary_trace(P.fan, P.carrier, face, tau)
                if trace is not None:
                    found.add(CompactifiedCone(P.fan, tau, trace))
    return sorted(found, key=_key)


def _key(P: CompactifiedCone):
    return (P.carrier.key(), P.cone.key())


def closure_with_faces(cones: Sequence[CompactifiedCone]) -> List[CompactifiedCone]:
    found = set()
    for P in cones:
        found.update(compactified_faces(P))
    return sorted(found, key=_key)


@dataclass(frozen=True)
class CompactifiedFan:
    fan: Fan = field(repr=False)
    cones: Tuple[CompactifiedCone, ...] = ()

    @classmethod
    def from_fan(cls, ambient: Fan, fan: Fan) -> "CompactifiedFan":
        """Closures of the cones of an ordinary fan, completed with their faces."""
        return cls(ambient, tuple(closure_with_faces([closure_of(ambient, c) for c in fan.maximal])))

    def open_part(self) -> Fan:
        """The ordinary fan formed by cones carried by the open stratum N_R."""
        return Fan.from_maximal(self.fan.rank, [P.cone for P in self.cones if P.carrier.dim == 0])


def star_fan(fan: Fan, sigma: Cone) -> Fan:
    """The fan in N_sigma of images of the cones having sigma as a face."""
    stratum = stratum_projection(fan, sigma)
    images = [stratum.project_cone(tau) for tau in fan.maximal if sigma.is_face_of(tau)]
    return Fan.from_maximal(stratum.rank, images)


def is_compactified_fan(cones: Sequence[CompactifiedCone]) -> Tuple[bool, Optional[str]]:
    """
    Check the fan axioms stratum by stratum.

    Faces must be present, and the intersection of two closures (computed as the
    per-stratum intersection of their traces) must be empty or a common face.
    """
    cones = sorted(set(cones), key=_key)
    if not cones:
        return True, None
    fans = {P.fan for P in cones}
    if len(fans) > 1:
        return False, "cones live in different ambient fans"
    present = set(cones)
    for P in cones:
        for F in compactified_faces(P):
            if F not in present:
                return False, f"face of {P.cone.generators} on stratum {F.carrier.generators} is missing"

    for i, P in enumerate(cones):
        for Q in cones[i + 1:]:
            left, right = P.trace_table(), Q.trace_table()
            meet = {}
            for tau in set(left) & set(right):
                meet[tau] = left[tau].intersect(right[tau])
            if not meet:
                continue
            ok_p = any(F.trace_table() == meet for F in compactified_faces(P))
            ok_q = any(F.trace_table() == meet for F in compactified_faces(Q))
            if not (ok_p and ok_q):
                logger.debug("closures %s and %s meet in a non-face", P.cone.generators, Q.cone.generators)
                return False, f"closures of {P.cone.generators} and {Q.cone.generators} meet in a non-face"
    return True, None

