"""Charts, reference fields and volume forms on S³ and T³.

S³ minus the Hopf link is parametrised by ``(theta1, theta2, rho)`` with
``x + iy = sqrt(rho) e^{i theta1}`` and ``z + i xi = sqrt(1 - rho) e^{i theta2}``.
T³ uses plain angles ``(x, y, z)``.  Array routines take the three chart
coordinates along the last axis.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ChartDomainError, NearLinkError, ValidationError
from .profiles import Profile

TWO_PI = 2.0 * math.pi
DELTA_CHART = 1e-6
VOLUME_S3 = 2.0 * math.pi ** 2
VOLUME_T3 = 8.0 * math.pi ** 3
# volume density of the chart coordinates
DENSITY = {"s3": 0.5, "t3": 1.0}
TOTAL_VOLUME = {"s3": VOLUME_S3, "t3": VOLUME_T3}


@dataclass(frozen=True)
class AmbientPoint:
    """A point of the unit sphere in R⁴."""

    x: float
    y: float
    z: float
    xi: float

    def __post_init__(self):
        n = self.x ** 2 + self.y ** 2 + self.z ** 2 + self.xi ** 2
        if abs(n - 1.0) > 1e-12:
            raise ChartDomainError("ambient point is not on the unit sphere", norm2=n)

    @property
    def zeta(self):
        return complex(self.x, self.y), complex(self.z, self.xi)

    def as_array(self):
        return np.array([self.x, self.y, self.z, self.xi])


@dataclass(frozen=True)
class ChartPointS3:
    theta1: float
    theta2: float
    rho: float

    def __post_init__(self):
        if not 0.0 < self.rho < 1.0:
            raise ChartDomainError("rho must lie in (0, 1)", rho=self.rho)

    def as_array(self):
        return np.array([self.theta1, self.theta2, self.rho])

    def reduced(self):
        return ChartPointS3(self.theta1 % TWO_PI, self.theta2 % TWO_PI, self.rho)


@dataclass(frozen=True)
class ChartPointT3:
    x: float
    y: float
    z: float

    def __post_init__(self):
        object.__setattr__(self, "x", self.x % TWO_PI)
        object.__setattr__(self, "y", self.y % TWO_PI)
        object.__setattr__(self, "z", self.z % TWO_PI)

    def as_array(self):
        return np.array([self.x, self.y, self.z])


@dataclass(frozen=True)
class HopfBasis:
    """Chart components of the Hopf fields ``u1 = d1 - d2`` and ``u2 = d1 + d2``."""

    u1: tuple = (1.0, -1.0, 0.0)
    u2: tuple = (1.0, 1.0, 0.0)


HOPF = HopfBasis()


def hopf_basis(p=None):
    """Return the Hopf basis; it is constant on the chart."""
    return HOPF


def volume_density(space):
    try:
        return DENSITY[space]
    except KeyError:
        raise ValidationError(f"unknown space {space!r}") from None


# -- S³ chart ---------------------------------------------------------------

def embed_array(theta1, theta2, rho):
    rho = np.asarray(rho, dtype=float)
    if np.any((rho <= 0.0) | (rho >= 1.0)):
        raise ChartDomainError("rho outside (0, 1)")
    a = np.sqrt(rho)
    b = np.sqrt(1.0 - rho)
    return np.stack([a * np.cos(theta1), a * np.sin(theta1),
                     b * np.cos(theta2), b * np.sin(theta2)], axis=-1)


def embed(p):
    """Map a chart point of S³ into R⁴.

    Parameters
    ----------
    p : ChartPointS3 or tuple
        ``(theta1, theta2, rho)`` with ``0 < rho < 1``.

    Returns
    -------
    AmbientPoint
    """
    if not isinstance(p, ChartPointS3):
        p = ChartPointS3(*map(float, p))
    v = embed_array(p.theta1, p.theta2, p.rho)
    # renormalise away the last ulp so the sphere invariant is exact
    v = v / math.sqrt(float(v @ v))
    return AmbientPoint(*map(float, v))


def chart_array(v, delta=DELTA_CHART):
    v = np.asarray(v, dtype=float)
    rho = v[..., 0] ** 2 + v[..., 1] ** 2
    if np.any((rho < delta) | (rho > 1.0 - delta)):
        raise NearLinkError("point within the chart guard of the Hopf link", delta=delta)
    t1 = np.mod(np.arctan2(v[..., 1], v[..., 0]), TWO_PI)
    t2 = np.mod(np.arctan2(v[..., 3], v[..., 2]), TWO_PI)
    return np.stack([t1, t2, rho], axis=-1)


def chart_of(a, delta=DELTA_CHART):
    """Inverse of :func:`embed` on the guarded chart domain."""
    if isinstance(a, AmbientPoint):
        a = a.as_array()
    t1, t2, rho = chart_array(a, delta)
    return ChartPointS3(float(t1), float(t2), float(rho))


def metric_s3(rho):
    """Diagonal of the round metric in ``(theta1, theta2, rho)``."""
    rho = np.asarray(rho, dtype=float)
    return np.stack([rho, 1.0 - rho, 1.0 / (4.0 * rho * (1.0 - rho))], axis=-1)


def metric_t3(z):
    z = np.asarray(z, dtype=float)
    return np.ones(z.shape + (3,))


def metric(space, r):
    return metric_s3(r) if space == "s3" else metric_t3(r)


def embed_jacobian(theta1, theta2, rho):
    """Jacobian of the embedding, shape ``(..., 4, 3)``."""
    a = np.sqrt(rho)
    b = np.sqrt(1.0 - rho)
    c1, s1, c2, s2 = np.cos(theta1), np.sin(theta1), np.cos(theta2), np.sin(theta2)
    z = np.zeros_like(a * c1)
    cols = [
        np.stack([-a * s1, a * c1, z, z], axis=-1),
        np.stack([z, z, -b * s2, b * c2], axis=-1),
        np.stack([c1 / (2 * a), s1 / (2 * a), -c2 / (2 * b), -s2 / (2 * b)], axis=-1),
    ]
    return np.stack(cols, axis=-1)


# -- volume preserving diffeomorphisms ----------------------------------------

class VolumePreservingDiffeo:
    """Chart shear ``(a, s, r) -> (a + A(r), s + B(r), r)``.

    Covers the flow of ``u1`` or ``u2`` for time ``t`` on S³ (constant
    ``A, B``) and ``(x, y, z) -> (x + a(z), y + b(z), z)`` on T³.  The
    Jacobian is unipotent, so the determinant is one.
    """

    def __init__(self, kind, A, B, params=None):
        self.kind = kind
        self.A = A
        self.B = B
        self.params = dict(params or {})

    @classmethod
    def identity(cls, space="s3"):
        return cls("identity", Profile.constant(0.0), Profile.constant(0.0), {"space": space})

    @classmethod
    def s3_rotation(cls, t, along="u1"):
        if along not in ("u1", "u2"):
            raise ValidationError("s3-rotation flows along u1 or u2")
        sgn = -1.0 if along == "u1" else 1.0
        return cls("s3-rotation", Profile.constant(t), Profile.constant(sgn * t),
                   {"t": float(t), "along": along, "space": "s3"})

    @classmethod
    def t3_shear(cls, a, b):
        """Shear with profiles ``a(z)``, ``b(z)`` (``Profile`` or expression)."""
        a = a if isinstance(a, Profile) else Profile.from_expression(str(a), "t3")
        b = b if isinstance(b, Profile) else Profile.from_expression(str(b), "t3")
        return cls("t3-shear", a, b, {"a": a.source, "b": b.source, "space": "t3"})

    @property
    def space(self):
        return self.params.get("space", "s3")

    def apply(self, p):
        p = np.asarray(p, dtype=float)
        r = p[..., 2]
        return np.stack([p[..., 0] + self.A(r), p[..., 1] + self.B(r), r], axis=-1)

    def inverse(self, p):
        p = np.asarray(p, dtype=float)
        r = p[..., 2]
        return np.stack([p[..., 0] - self.A(r), p[..., 1] - self.B(r), r], axis=-1)

    def jacobian(self, p):
        p = np.asarray(p, dtype=float)
        r = p[..., 2]
        J = np.zeros(p.shape[:-1] + (3, 3))
        J[..., 0, 0] = J[..., 1, 1] = J[..., 2, 2] = 1.0
        J[..., 0, 2] = self.A(r, 1)
        J[..., 1, 2] = self.B(r, 1)
        return J

    def jacobian_det(self, p):
        return np.linalg.det(self.jacobian(p))

    def pushforward_vector(self, p, v):
        """``DPhi(p) v`` for vectors ``v`` attached at ``p``."""
        p = np.asarray(p, dtype=float)
        v = np.asarray(v, dtype=float)
        r = p[..., 2]
        return np.stack([v[..., 0] + self.A(r, 1) * v[..., 2],
                         v[..., 1] + self.B(r, 1) * v[..., 2], v[..., 2]], axis=-1)

    def pack(self):
        return self.A.pack(), self.B.pack()

    def __repr__(self):
        return f"VolumePreservingDiffeo({self.kind!r}, {self.params})"


def apply_diffeo(phi, p):
    return phi.apply(p)


def pushforward_vector(phi, p, v):
    return phi.pushforward_vector(p, v)
