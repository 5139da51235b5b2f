"""Norm expressions on R^n: data types, parser, canonical printer, evaluation, duals.

A norm is described by an immutable tree of small dataclasses::

    >>> n = parse_norm("sum(quad([[3,0],[0,1]]), quad([[1,0],[0,3]]))")
    >>> format_norm(n)
    'sum(quad([[3,0],[0,1]]),quad([[1,0],[0,3]]))'
    >>> float(evaluate(parse_norm("lp(1, w=[2,1])"), [1.0, 1.0]))
    3.0

Weighted lp norms are ``(sum_i w_i |x_i|^p)^(1/p)`` for finite p and
``max_i w_i |x_i|`` for ``p = inf``, so that ``lp(1, w)`` and ``lp(inf, 1/w)``
are dual to each other.

``evaluate`` accepts a single vector or a stack of vectors (last axis is the
coordinate axis) and is vectorised throughout; the sampling scans rely on it.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Union

import numpy as np

from .errors import (
    DimensionError,
    NormSemanticError,
    NormSyntaxError,
    NotDualizableError,
)

SYMMETRY_RTOL = 1e-12
POLYGON_SYMMETRY_TOL = 1e-9


# ----------------------------------------------------------------------------
# data types
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class Lp:
    p: float
    weights: Optional[tuple] = None

    def __post_init__(self):
        p = float(self.p)
        if math.isnan(p) or p < 1:
            raise NormSemanticError(f"lp exponent must satisfy p >= 1, got {self.p}")
        object.__setattr__(self, "p", p)
        if self.weights is not None:
            w = tuple(float(v) for v in self.weights)
            if not w:
                raise NormSemanticError("lp weights must be non-empty")
            if not all(math.isfinite(v) and v > 0 for v in w):
                raise NormSemanticError("lp weights must be finite and positive")
            object.__setattr__(self, "weights", w)

    @property
    def dim(self) -> Optional[int]:
        return None if self.weights is None else len(self.weights)

    def w(self, d: int) -> np.ndarray:
        if self.weights is None:
            return np.ones(d)
        return np.asarray(self.weights)

    def _eval(self, x: np.ndarray) -> np.ndarray:
        w = self.w(x.shape[-1])
        ax = np.abs(x)
        if self.p == 1:
            return np.sum(w * ax, axis=-1)
        if math.isinf(self.p):
            return np.max(w * ax, axis=-1)
        # factor out the largest coordinate so |x|^p cannot overflow
        m = np.max(ax, axis=-1, keepdims=True)
        safe = np.where(m > 0, m, 1.0)
        s = np.sum(w * (ax / safe) ** self.p, axis=-1)
        return m[..., 0] * s ** (1.0 / self.p)


@dataclass(frozen=True)
class Quad:
    """Inner-product norm ``sqrt(x^T A x)`` for a symmetric positive-definite A."""

    matrix: tuple

    def __post_init__(self):
        try:
            rows = tuple(tuple(float(v) for v in row) for row in self.matrix)
        except TypeError:
            raise NormSemanticError("quad expects a square matrix") from None
        n = len(rows)
        if n == 0 or any(len(r) != n for r in rows):
            raise NormSemanticError("quad expects a non-empty square matrix")
        a = np.array(rows)
        if not np.all(np.isfinite(a)):
            raise NormSemanticError("quad matrix entries must be finite")
        scale = np.max(np.abs(a))
        if np.max(np.abs(a - a.T)) > SYMMETRY_RTOL * scale:
            raise NormSemanticError("quad matrix is not symmetric")
        try:
            np.linalg.cholesky(0.5 * (a + a.T))
        except np.linalg.LinAlgError:
            raise NormSemanticError("quad matrix is not positive definite") from None
        object.__setattr__(self, "matrix", rows)

    @property
    def dim(self) -> int:
        return len(self.matrix)

    @cached_property
    def A(self) -> np.ndarray:
        a = np.array(self.matrix)
        return 0.5 * (a + a.T)

    @cached_property
    def chol(self) -> np.ndarray:
        """Lower factor L with A = L L^T."""
        return np.linalg.cholesky(self.A)

    def _eval(self, x: np.ndarray) -> np.ndarray:
        # |L^T x| is better conditioned than sqrt(x^T A x); rescale against under/overflow
        v = x @ self.chol
        m = np.max(np.abs(v), axis=-1, keepdims=True)
        safe = np.where(m > 0, m, 1.0)
        return m[..., 0] * np.linalg.norm(v / safe, axis=-1)


def cross2(a, b):
    """z-component of the planar cross product, broadcasting over leading axes."""
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


def _common_dim(children) -> Optional[int]:
    dims = {c.dim for c in children if c.dim is not None}
    if len(dims) > 1:
        raise DimensionError(f"children have different dimensions {sorted(dims)}")
    return dims.pop() if dims else None


@dataclass(frozen=True)
class Sum:
    children: tuple

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))
        if len(self.children) < 2:
            raise NormSemanticError("sum needs at least two children")
        _common_dim(self.children)

    @property
    def dim(self) -> Optional[int]:
        return _common_dim(self.children)

    def _eval(self, x):
        return sum(c._eval(x) for c in self.children)


@dataclass(frozen=True)
class Max:
    children: tuple

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))
        if len(self.children) < 2:
            raise NormSemanticError("max needs at least two children")
        _common_dim(self.children)

    @property
    def dim(self) -> Optional[int]:
        return _common_dim(self.children)

    def _eval(self, x):
        return np.max(np.stack([c._eval(x) for c in self.children]), axis=0)


@dataclass(frozen=True)
class Scale:
    c: float
    child: "NormExpr"

    def __post_init__(self):
        c = float(self.c)
        if not (math.isfinite(c) and c > 0):
            raise NormSemanticError(f"scale factor must be positive and finite, got {self.c}")
        object.__setattr__(self, "c", c)

    @property
    def dim(self):
        return self.child.dim

    def _eval(self, x):
        return self.c * self.child._eval(x)


@dataclass(frozen=True)
class Polygon:
    """Gauge of an origin-symmetric convex polygon.

    Vertices are stored sorted by polar angle in [0, 2pi).
    """

    vertices: tuple

    def __post_init__(self):
        try:
            v = np.array([[float(a), float(b)] for a, b in self.vertices])
        except (TypeError, ValueError):
            raise NormSemanticError("polygon expects a list of planar points") from None
        if len(v) < 4:
            raise NormSemanticError("polygon needs at least 4 vertices")
        if not np.all(np.isfinite(v)):
            raise NormSemanticError("polygon vertices must be finite")
        for p in v:
            if np.min(np.max(np.abs(v + p), axis=1)) > POLYGON_SYMMETRY_TOL:
                raise NormSemanticError(f"polygon is not origin-symmetric: -({p[0]}, {p[1]}) missing")
        ang = np.mod(np.arctan2(v[:, 1], v[:, 0]), 2 * np.pi)
        order = np.argsort(ang, kind="stable")
        v = v[order]
        nxt = np.roll(v, -1, axis=0)
        scale = np.max(np.abs(v)) ** 2
        # origin strictly inside: each consecutive pair turns counter-clockwise
        if np.any(cross2(v, nxt) <= 1e-12 * scale):
            raise NormSemanticError("origin is not strictly interior to the polygon")
        e = nxt - v
        if np.any(cross2(e, np.roll(e, -1, axis=0)) <= 1e-12 * scale):
            raise NormSemanticError("polygon vertices are not in strictly convex position")
        object.__setattr__(self, "vertices", tuple((float(a), float(b)) for a, b in v))

    @property
    def dim(self) -> int:
        return 2

    @cached_property
    def V(self) -> np.ndarray:
        return np.array(self.vertices)

    @cached_property
    def facets(self) -> np.ndarray:
        """Edge normals a_k with <a_k, v_k> = <a_k, v_{k+1}> = 1.

        The gauge is max_k <a_k, x>, one linear form per boundary edge.
        """
        v = self.V
        nxt = np.roll(v, -1, axis=0)
        e = nxt - v
        cross = cross2(v, nxt)
        return np.stack([e[:, 1], -e[:, 0]], axis=1) / cross[:, None]

    def _eval(self, x):
        return np.max(x @ self.facets.T, axis=-1)


@dataclass(frozen=True)
class Dual:
    child: "NormExpr"

    def __post_init__(self):
        # fail at construction, not at first evaluation
        self.resolved

    @property
    def dim(self):
        return self.child.dim

    @cached_property
    def resolved(self) -> "NormExpr":
        return dualize(self.child)

    def _eval(self, x):
        return self.resolved._eval(x)


NormExpr = Union[Lp, Quad, Sum, Max, Scale, Polygon, Dual]


# ----------------------------------------------------------------------------
# evaluation
# ----------------------------------------------------------------------------


def as_vectors(x, dim: Optional[int] = None) -> np.ndarray:
    """Convert to a float array of vectors (last axis = coordinates), checking finiteness."""
    a = np.asarray(x, dtype=float)
    if a.ndim == 0:
        raise DimensionError("expected a vector, got a scalar")
    if a.shape[-1] < 1:
        raise DimensionError("vectors must have dimension >= 1")
    if not np.all(np.isfinite(a)):
        raise NormSemanticError("vector coordinates must be finite")
    if dim is not None and a.shape[-1] != dim:
        raise DimensionError(f"vector has dimension {a.shape[-1]}, norm has dimension {dim}")
    return a


def evaluate(n: NormExpr, x) -> Union[float, np.ndarray]:
    """Return ``||x||`` under ``n``; a float for one vector, an array for a stack."""
    a = as_vectors(x, n.dim)
    out = n._eval(a)
    return float(out) if a.ndim == 1 else out


# ----------------------------------------------------------------------------
# duals
# ----------------------------------------------------------------------------


def dualize(n: NormExpr) -> NormExpr:
    """Closed-form dual norm ``y -> sup{<x, y> : ||x|| <= 1}``.

    Raises NotDualizableError for sums and maxima, whose duals are infimal
    convolutions / convex hulls without a closed form in this grammar.
    """
    if isinstance(n, Lp):
        inv = None if n.weights is None else tuple(1.0 / w for w in n.weights)
        if n.p == 1:
            return Lp(math.inf, inv)
        if math.isinf(n.p):
            return Lp(1.0, inv)
        q = n.p / (n.p - 1.0)
        w = None if n.weights is None else tuple(w ** (1.0 - q) for w in n.weights)
        return Lp(q, w)
    if isinstance(n, Quad):
        inv = np.linalg.inv(n.A)
        inv = 0.5 * (inv + inv.T)
        return Quad(tuple(tuple(r) for r in inv))
    if isinstance(n, Polygon):
        return Polygon(tuple(map(tuple, n.facets)))
    if isinstance(n, Scale):
        return Scale(1.0 / n.c, dualize(n.child))
    if isinstance(n, Dual):
        return n.child
    raise NotDualizableError(f"{type(n).__name__.lower()} is not dualizable in closed form")


# ----------------------------------------------------------------------------
# canonical printer
# ----------------------------------------------------------------------------


def _num(v: float) -> str:
    if math.isinf(v):
        return "inf"
    if v.is_integer() and abs(v) < 1e15:
        return str(int(v))
    return repr(v)


def _vec(vs) -> str:
    return "[" + ",".join(_num(v) for v in vs) + "]"


def format_norm(n: NormExpr) -> str:
    """Canonical text form; ``parse_norm(format_norm(n)) == n``."""
    if isinstance(n, Lp):
        s = "lp(" + _num(n.p)
        if n.weights is not None:
            s += ",w=" + _vec(n.weights)
        return s + ")"
    if isinstance(n, Quad):
        return "quad([" + ",".join(_vec(r) for r in n.matrix) + "])"
    if isinstance(n, Sum):
        return "sum(" + ",".join(format_norm(c) for c in n.children) + ")"
    if isinstance(n, Max):
        return "max(" + ",".join(format_norm(c) for c in n.children) + ")"
    if isinstance(n, Scale):
        return f"scale({_num(n.c)},{format_norm(n.child)})"
    if isinstance(n, Polygon):
        return "polygon([" + ",".join(_vec(v) for v in n.vertices) + "])"
    if isinstance(n, Dual):
        return f"dual({format_norm(n.child)})"
    raise TypeError(f"not a norm expression: {n!r}")


for _cls in (Lp, Quad, Sum, Max, Scale, Polygon, Dual):
    _cls.__str__ = format_norm


# ----------------------------------------------------------------------------
# parser
# ----------------------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<num>[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_]\w*)|(?P<punct>[()\[\],=]))"
)


class _Parser:
    # expr      := name "(" args ")"
    # lp        := number_or_inf [ "," "w" "=" vector ]
    # quad      := matrix
    # sum | max := expr ("," expr)+
    # scale     := number "," expr
    # polygon   := matrix
    # dual      := expr

    def __init__(self, text: str):
        self.text = text
        self.tokens = []
        pos = 0
        while pos < len(text):
            if text[pos:].strip() == "":
                break
            m = _TOKEN.match(text, pos)
            if m is None or m.end() == pos:
                start = pos + len(text[pos:]) - len(text[pos:].lstrip())
                raise NormSyntaxError(f"unexpected character {text[start]!r}", start)
            kind = m.lastgroup
            self.tokens.append((kind, m.group(kind), m.start(kind)))
            pos = m.end()
        self.i = 0

    def peek(self):
        if self.i < len(self.tokens):
            return self.tokens[self.i]
        return ("eof", "", len(self.text))

    def take(self, value=None, kind=None):
        tok = self.peek()
        if (value is not None and tok[1] != value) or (kind is not None and tok[0] != kind):
            want = repr(value) if value is not None else kind
            got = "end of input" if tok[0] == "eof" else repr(tok[1])
            raise NormSyntaxError(f"expected {want}, got {got}", tok[2])
        self.i += 1
        return tok

    def number(self, allow_inf=False) -> float:
        tok = self.peek()
        if allow_inf and tok[0] == "name" and tok[1] == "inf":
            self.i += 1
            return math.inf
        return float(self.take(kind="num")[1])

    def vector(self) -> list:
        self.take("[")
        out = [self.number()]
        while self.peek()[1] == ",":
            self.take(",")
            out.append(self.number())
        self.take("]")
        return out

    def matrix(self) -> list:
        self.take("[")
        rows = [self.vector()]
        while self.peek()[1] == ",":
            self.take(",")
            rows.append(self.vector())
        self.take("]")
        return rows

    def expr(self) -> NormExpr:
        kind, name, pos = self.take(kind="name")
        self.take("(")
        try:
            node = self._body(name, pos)
        except (NormSemanticError, DimensionError, NotDualizableError) as exc:
            if getattr(exc, "position", None) is not None:
                raise
            err = type(exc)(f"{name}(...) at position {pos}: {exc}")
            err.position = pos
            raise err from None
        self.take(")")
        return node

    def _body(self, name, pos) -> NormExpr:
        if name == "lp":
            p = self.number(allow_inf=True)
            w = None
            if self.peek()[1] == ",":
                self.take(",")
                self.take("w")
                self.take("=")
                w = self.vector()
            return Lp(p, None if w is None else tuple(w))
        if name == "quad":
            return Quad(tuple(map(tuple, self.matrix())))
        if name == "polygon":
            rows = self.matrix()
            for r in rows:
                if len(r) != 2:
                    raise NormSemanticError("polygon vertices must be planar points")
            return Polygon(tuple(map(tuple, rows)))
        if name in ("sum", "max"):
            children = [self.expr()]
            while self.peek()[1] == ",":
                self.take(",")
                children.append(self.expr())
            return (Sum if name == "sum" else Max)(tuple(children))
        if name == "scale":
            c = self.number()
            self.take(",")
            return Scale(c, self.expr())
        if name == "dual":
            return Dual(self.expr())
        raise NormSyntaxError(f"unknown norm family {name!r}", pos)


def parse_norm(text: str) -> NormExpr:
    """Parse the norm-expression grammar (whitespace-insensitive)."""
    p = _Parser(text)
    node = p.expr()
    tok = p.peek()
    if tok[0] != "eof":
        raise NormSyntaxError(f"trailing input {tok[1]!r}", tok[2])
    return node


def norm_dim(n: NormExpr, default: int = 2) -> int:
    return n.dim if n.dim is not None else default


def euclidean_unit(x) -> np.ndarray:
    a = np.asarray(x, dtype=float)
    return a / np.linalg.norm(a, axis=-1, keepdims=True)


def unit_sphere(n: NormExpr, x) -> np.ndarray:
    """Rescale vectors onto the unit sphere of ``n``."""
    a = np.asarray(x, dtype=float)
    return a / n._eval(a)[..., None]

