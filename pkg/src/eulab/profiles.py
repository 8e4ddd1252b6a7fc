"""Scalar profile functions of one variable with exact derivatives.

Profiles are either closed form (polynomial or trigonometric polynomial,
possibly with a linear term) or C² cubic splines.  Derivatives are always
analytic, never finite differences.
"""
from __future__ import annotations

import math

import numpy as np
import sympy as sp
from scipy.interpolate import CubicSpline

from .errors import EvaluationError, ValidationError
from .kernels.profiles import POLY, PPOLY, PPOLY_PER, TRIG, peval_np

TWO_PI = 2.0 * math.pi
_DUMMY = np.zeros((1, 1))
_SYMBOLS = ("rho", "r", "z", "x", "s", "t")


class Profile:
    """A real function of one variable in packed form.

    Parameters
    ----------
    kind : int
        One of ``POLY``, ``TRIG``, ``PPOLY``, ``PPOLY_PER``.
    c1, c2 : ndarray
        Packed coefficients; see :mod:`eulab.kernels.profiles`.
    source : str, optional
        Human readable origin (expression text or ``"spline"``).
    """

    __slots__ = ("kind", "c1", "c2", "source")

    def __init__(self, kind, c1, c2=None, source=None):
        self.kind = int(kind)
        self.c1 = np.ascontiguousarray(c1, dtype=float)
        self.c2 = _DUMMY if c2 is None else np.ascontiguousarray(c2, dtype=float)
        self.source = source
        self.c1.setflags(write=False)
        self.c2.setflags(write=False)

    # construction -------------------------------------------------------
    @classmethod
    def poly(cls, coeffs, source=None):
        c = np.atleast_1d(np.asarray(coeffs, dtype=float))
        if c.size == 0:
            c = np.zeros(1)
        return cls(POLY, c, source=source)

    @classmethod
    def constant(cls, value):
        return cls.poly([float(value)], source=repr(float(value)))

    @classmethod
    def trig(cls, a0=0.0, a=(), b=(), lin=0.0, source=None):
        """``lin*x + a0 + sum_k a[k-1] cos(kx) + b[k-1] sin(kx)``."""
        a = list(a)
        b = list(b)
        m = max(len(a), len(b))
        a += [0.0] * (m - len(a))
        b += [0.0] * (m - len(b))
        c1 = [lin, a0]
        for ak, bk in zip(a, b):
            c1 += [ak, bk]
        return cls(TRIG, c1, source=source)

    @classmethod
    def spline(cls, nodes, values, periodic=False):
        """C² cubic spline through ``(nodes, values)``.

        Periodic splines need ``values[0] == values[-1]``.
        """
        nodes = np.asarray(nodes, dtype=float)
        values = np.asarray(values, dtype=float)
        if nodes.ndim != 1 or nodes.shape != values.shape or nodes.size < 4:
            raise ValidationError("spline needs matching 1D node and value arrays of length >= 4")
        if np.any(np.diff(nodes) <= 0):
            raise ValidationError("spline nodes must be strictly increasing")
        bc = "periodic" if periodic else "not-a-knot"
        if periodic and abs(values[0] - values[-1]) > 1e-12:
            raise ValidationError("periodic spline needs equal end values")
        cs = CubicSpline(nodes, values, bc_type=bc)
        return cls(PPOLY_PER if periodic else PPOLY, cs.x, cs.c, source="spline")

    @classmethod
    def from_expression(cls, text, space="s3"):
        """Parse a closed-form expression.

        Polynomials become ``POLY``.  Anything else must be a trigonometric
        polynomial in the variable (integer frequencies, optional linear
        term); this is verified numerically against the symbolic expression.
        """
        expr, var = _parse(text)
        if var is None:
            return cls.poly([float(expr)], source=text)
        try:
            poly = sp.Poly(sp.expand(expr), var)
            coeffs = [float(c) for c in reversed(poly.all_coeffs())]
            return cls.poly(coeffs, source=text)
        except (sp.PolynomialError, sp.GeneratorsNeeded, TypeError):
            pass
        fn = sp.lambdify(var, expr, "numpy")
        prof = _trig_from_samples(fn, text)
        xs = np.linspace(-1.0, 7.0, 97)
        ref = np.asarray(fn(xs), dtype=float) * np.ones_like(xs)
        if not np.all(np.isfinite(ref)) or np.max(np.abs(prof(xs) - ref)) > 1e-10 * (1 + np.max(np.abs(ref))):
            raise ValidationError(
                f"expression {text!r} is neither a polynomial nor a trigonometric polynomial; "
                "supply it as a spline", expression=text)
        return prof

    @classmethod
    def from_json(cls, spec, space="s3"):
        if isinstance(spec, (int, float)):
            return cls.constant(spec)
        if isinstance(spec, str):
            return cls.from_expression(spec, space)
        if isinstance(spec, dict) and "nodes" in spec:
            return cls.spline(spec["nodes"], spec["values"], periodic=(space == "t3"))
        raise ValidationError(f"cannot build a profile from {spec!r}")

    # evaluation ---------------------------------------------------------
    def __call__(self, x, nu=0):
        if nu not in (0, 1, 2, 3):
            raise EvaluationError("derivative order must be 0..3", nu=nu)
        scalar = np.ndim(x) == 0
        out = peval_np(self.kind, self.c1, self.c2, np.asarray(x, dtype=np.result_type(x, float)), nu)
        if not np.all(np.isfinite(out)):
            raise EvaluationError("profile produced a non-finite value", source=self.source)
        return out[()] if scalar else out

    def deriv(self, nu=1):
        return lambda x: self(x, nu)

    def pack(self):
        return self.kind, self.c1, self.c2

    @property
    def is_closed_form(self):
        return self.kind in (POLY, TRIG)

    def to_sympy(self, var):
        if self.kind == POLY:
            return sum(sp.nsimplify(c, rational=False) * var ** i for i, c in enumerate(self.c1))
        if self.kind == TRIG:
            c = self.c1
            out = c[0] * var + c[1]
            for k in range(1, (len(c) - 2) // 2 + 1):
                out += c[2 * k] * sp.cos(k * var) + c[2 * k + 1] * sp.sin(k * var)
            return out
        raise EvaluationError("spline profiles have no symbolic form")

    # linear structure (same kind only) ------------------------------------
    def __mul__(self, k):
        k = float(k)
        if self.kind in (POLY, TRIG):
            return Profile(self.kind, self.c1 * k)
        return Profile(self.kind, self.c1, self.c2 * k, "spline")

    __rmul__ = __mul__

    def __add__(self, other):
        if self.kind != other.kind:
            raise EvaluationError("can only add profiles of the same kind")
        if self.kind in (POLY, TRIG):
            n = max(len(self.c1), len(other.c1))
            a = np.zeros(n)
            b = np.zeros(n)
            a[:len(self.c1)] = self.c1
            b[:len(other.c1)] = other.c1
            return Profile(self.kind, a + b)
        if self.c1.shape != other.c1.shape or np.any(self.c1 != other.c1):
            raise EvaluationError("splines must share breakpoints to be added")
        return Profile(self.kind, self.c1, self.c2 + other.c2, "spline")

    def __repr__(self):
        name = {POLY: "poly", TRIG: "trig", PPOLY: "spline", PPOLY_PER: "periodic-spline"}[self.kind]
        return f"Profile({name}, {self.source!r})"


def _parse(text):
    loc = {name: sp.Symbol(name, real=True) for name in _SYMBOLS}
    loc["pi"] = sp.pi
    try:
        expr = sp.sympify(text, locals=loc)
    except (sp.SympifyError, SyntaxError, TypeError) as exc:
        raise ValidationError(f"cannot parse expression {text!r}", expression=text) from exc
    free = expr.free_symbols
    if len(free) > 1:
        raise ValidationError(f"expression {text!r} has more than one variable", expression=text)
    if not free:
        return float(expr), None
    return expr, free.pop()


def _trig_from_samples(fn, text, n=256):
    def f(x):
        return np.asarray(fn(x), dtype=float) * np.ones_like(x)

    x0 = np.array([0.0])
    lin = float((f(x0 + TWO_PI) - f(x0))[0] / TWO_PI)
    xs = TWO_PI * np.arange(n) / n
    vals = f(xs) - lin * xs
    spec = np.fft.rfft(vals) / n
    m = n // 2 - 1
    a = 2.0 * spec[1:m + 1].real
    b = -2.0 * spec[1:m + 1].imag
    # trim numerically zero harmonics
    keep = np.nonzero(np.abs(a) + np.abs(b) > 1e-13)[0]
    top = keep[-1] + 1 if keep.size else 0
    return Profile.trig(spec[0].real, a[:top], b[:top], lin=lin, source=text)
