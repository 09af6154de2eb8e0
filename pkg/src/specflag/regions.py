"""Constructible regions of C and C^n with three-valued membership.

``classify(point, band)`` returns True (inside), False (outside) or None
when the point is within ``band`` of the boundary.  Only finite
combinations of disks and half-planes are supported; :class:`Predicate`
regions wrap an arbitrary membership test and are meant for verification.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch

__all__ = [
    "Region", "Disk", "HalfPlane", "FullPlane", "Rectangle", "Union", "Intersection",
    "Complement", "Predicate", "rectangle", "polydisk_union", "region_from_dict",
]


def _and(values):
    values = list(values)
    if any(v is False for v in values):
        return False
    return None if any(v is None for v in values) else True


def _or(values):
    values = list(values)
    if any(v is True for v in values):
        return True
    return None if any(v is None for v in values) else False


def _pair(z):
    z = complex(z)
    return [float(z.real), float(z.imag)]


class Region:
    n = 1

    def classify(self, point, band=0.0):
        raise NotImplementedError

    def contains(self, point):
        return bool(self.classify(point, 0.0))

    def conjugate(self):
        """The mirror image ``{conj(z) : z in region}``."""
        raise NotImplementedError

    def to_dict(self):
        raise NotImplementedError

    def __or__(self, other):
        return Union((self, other))

    def __and__(self, other):
        return Intersection((self, other))

    def __invert__(self):
        return Complement(self)


# -- one complex coordinate ----------------------------------------------------

class _Plane(Region):
    """Base for regions of C; classification goes through a signed distance."""

    def signed_distance(self, z):
        raise NotImplementedError

    def classify(self, point, band=0.0):
        z = complex(np.asarray(point).ravel()[0])
        d = self.signed_distance(z)
        if abs(d) <= band:
            return None
        return d < 0


@dataclass(frozen=True)
class Disk(_Plane):
    center: complex
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("disk radius must be positive")
        object.__setattr__(self, "center", complex(self.center))
        object.__setattr__(self, "radius", float(self.radius))

    def signed_distance(self, z):
        return abs(z - self.center) - self.radius

    def conjugate(self):
        return Disk(self.center.conjugate(), self.radius)

    def to_dict(self):
        return {"kind": "disk", "center": _pair(self.center), "radius": self.radius}


@dataclass(frozen=True)
class HalfPlane(_Plane):
    """``{z : Re(conj(normal) z) <= offset}`` with ``normal`` scaled to unit length."""

    normal: complex
    offset: float

    def __post_init__(self):
        nrm = complex(self.normal)
        if nrm == 0:
            raise ValueError("half-plane normal must be nonzero")
        object.__setattr__(self, "normal", nrm / abs(nrm))
        object.__setattr__(self, "offset", float(self.offset))

    def signed_distance(self, z):
        return (self.normal.conjugate() * z).real - self.offset

    def conjugate(self):
        return HalfPlane(self.normal.conjugate(), self.offset)

    def to_dict(self):
        return {"kind": "halfplane", "normal": _pair(self.normal), "offset": self.offset}


@dataclass(frozen=True)
class FullPlane(_Plane):
    def signed_distance(self, z):
        return -np.inf

    def conjugate(self):
        return self

    def to_dict(self):
        return {"kind": "full"}


# -- C^n -------------------------------------------------------------------------

@dataclass(frozen=True)
class Rectangle(Region):
    """Product of regions of C, one per coordinate."""

    factors: tuple

    def __post_init__(self):
        factors = tuple(self.factors)
        if not factors or any(f.n != 1 for f in factors):
            raise DimensionMismatch("rectangle factors must be regions of C")
        object.__setattr__(self, "factors", factors)

    @property
    def n(self):
        return len(self.factors)

    def classify(self, point, band=0.0):
        point = np.asarray(point).ravel()
        if len(point) != self.n:
            raise DimensionMismatch(f"point has {len(point)} coordinates, region has {self.n}")
        return _and(f.classify(z, band) for f, z in zip(self.factors, point))

    def conjugate(self):
        return Rectangle(tuple(f.conjugate() for f in self.factors))

    def to_dict(self):
        return {"kind": "rectangle", "factors": [f.to_dict() for f in self.factors]}


class _Combination(Region):
    def _check(self, members):
        members = tuple(members)
        if not members:
            raise ValueError("need at least one member region")
        if len({m.n for m in members}) != 1:
            raise DimensionMismatch("member regions have different dimensions")
        object.__setattr__(self, "members", members)

    @property
    def n(self):
        return self.members[0].n


@dataclass(frozen=True)
class Union(_Combination):
    members: tuple

    def __post_init__(self):
        self._check(self.members)

    def classify(self, point, band=0.0):
        return _or(m.classify(point, band) for m in self.members)

    def conjugate(self):
        return Union(tuple(m.conjugate() for m in self.members))

    def to_dict(self):
        return {"kind": "union", "members": [m.to_dict() for m in self.members]}


@dataclass(frozen=True)
class Intersection(_Combination):
    members: tuple

    def __post_init__(self):
        self._check(self.members)

    def classify(self, point, band=0.0):
        return _and(m.classify(point, band) for m in self.members)

    def conjugate(self):
        return Intersection(tuple(m.conjugate() for m in self.members))

    def to_dict(self):
        return {"kind": "intersection", "members": [m.to_dict() for m in self.members]}


@dataclass(frozen=True)
class Complement(Region):
    base: Region

    @property
    def n(self):
        return self.base.n

    def classify(self, point, band=0.0):
        v = self.base.classify(point, band)
        return None if v is None else not v

    def conjugate(self):
        return Complement(self.base.conjugate())

    def to_dict(self):
        return {"kind": "complement", "of": self.base.to_dict()}


@dataclass(frozen=True)
class Predicate(Region):
    """Membership given by a callable; never ambiguous, never constructible."""

    test: object
    dim: int = 1

    @property
    def n(self):
        return self.dim

    def classify(self, point, band=0.0):
        return bool(self.test(np.asarray(point).ravel()))

    def conjugate(self):
        return Predicate(lambda z, f=self.test: f(np.conj(z)), self.dim)

    def to_dict(self):
        raise TypeError("predicate regions cannot be serialized")


def rectangle(*factors):
    """Rectangle from factors; ``None`` stands for the whole plane."""
    return Rectangle(tuple(FullPlane() if f is None else f for f in factors))


def polydisk_union(points, radius):
    """Union of small polydisks (per-coordinate disks) centred at the rows of ``points``."""
    points = np.atleast_2d(np.asarray(points, dtype=complex))
    rects = tuple(Rectangle(tuple(Disk(c, radius) for c in p)) for p in points)
    if not rects:
        raise ValueError("need at least one point")
    return Union(rects)


def region_from_dict(d):
    kind = d.get("kind")
    if kind == "disk":
        return Disk(complex(*d["center"]), d["radius"])
    if kind == "halfplane":
        return HalfPlane(complex(*d["normal"]), d["offset"])
    if kind == "full":
        return FullPlane()
    if kind == "rectangle":
        return Rectangle(tuple(region_from_dict(f) for f in d["factors"]))
    if kind == "union":
        return Union(tuple(region_from_dict(m) for m in d["members"]))
    if kind == "intersection":
        return Intersection(tuple(region_from_dict(m) for m in d["members"]))
    if kind == "complement":
        return Complement(region_from_dict(d["of"]))
    raise ValueError(f"unknown region kind {kind!r}")
