"""Problem specification, validation, and the config file format.

The boundary value problem lives on the rectangle (0, pi) x (-a, a) and
changes character across y = 0.  With the reduced operator
l(u) = (-1)^s d^{2s}u/dx^{2s} + p0(x) u, the equation is

    l(u) + (-1)^n sgn(y) d^{2n}u/dy^{2n} = 0.

Boundary data prescribe y-derivatives of orders q + gamma*r on the bottom
edge y = -a (functions phi_r) and chi + delta*r on the top edge y = +a
(functions psi_r), r = 0..n-1, plus homogeneous even x-derivatives at
x = 0 and x = pi.

This module owns every scalar parameter, the exact representation of the
ratio a/pi (the solvability analysis is number-theoretic and cannot run on
a floating quotient), the boundary-function grammar, and config parsing.
Downstream modules trust any spec that passed validate().
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import numpy as np
import sympy
from sympy.parsing.sympy_parser import parse_expr

from ._util import fd_weights

X = sympy.Symbol("x")

_NAMED_IRRATIONALS = {
    "sqrt2": lambda: mpmath.sqrt(2),
    "sqrt3": lambda: mpmath.sqrt(3),
    "sqrt5": lambda: mpmath.sqrt(5),
    "golden": lambda: (1 + mpmath.sqrt(5)) / 2,
    "e": lambda: mpmath.e,
    "pi": lambda: mpmath.pi,
}


class ValidationError(ValueError):
    """A spec or config violates a structural constraint."""


class ExpressionError(ValidationError):
    """A boundary expression uses symbols outside the allowed grammar."""


@dataclass(frozen=True)
class PiRatio:
    """Exact value of a/pi: a rational in lowest terms or a tagged irrational.

    kind is one of "rational", "irrational", "untagged".  Untagged means the
    caller supplied only a floating a; rationality is then undeclared and the
    exact-arithmetic separation criteria refuse to run on it.
    """

    kind: str
    fraction: Fraction | None = None
    tag: str | None = None
    approx: float = 0.0

    @classmethod
    def rational(cls, num: int, den: int = 1) -> "PiRatio":
        frac = Fraction(num, den)
        if frac <= 0:
            raise ValidationError("a/pi must be positive")
        return cls(kind="rational", fraction=frac, approx=float(frac))

    @classmethod
    def irrational(cls, tag: str) -> "PiRatio":
        tag = tag.strip()
        if tag in _NAMED_IRRATIONALS:
            approx = float(_NAMED_IRRATIONALS[tag]())
        else:
            try:
                approx = float(tag)
            except ValueError:
                raise ValidationError(
                    f"unknown irrational tag {tag!r}; use one of "
                    f"{sorted(_NAMED_IRRATIONALS)} or a decimal literal"
                ) from None
            if approx <= 0:
                raise ValidationError("a/pi must be positive")
        return cls(kind="irrational", tag=tag, approx=approx)

    @classmethod
    def untagged(cls, value: float) -> "PiRatio":
        if value <= 0:
            raise ValidationError("a/pi must be positive")
        return cls(kind="untagged", approx=float(value))

    @classmethod
    def parse(cls, text: str) -> "PiRatio":
        text = text.strip()
        if text.startswith("irrational:"):
            return cls.irrational(text.split(":", 1)[1])
        if text in _NAMED_IRRATIONALS:
            return cls.irrational(text)
        m = re.fullmatch(r"([+-]?\d+)\s*/\s*(\d+)", text)
        if m:
            return cls.rational(int(m.group(1)), int(m.group(2)))
        if re.fullmatch(r"[+-]?\d+", text):
            return cls.rational(int(text))
        raise ValidationError(
            f"cannot parse a/pi value {text!r}: expected p/q, an integer, "
            "or irrational:<name-or-decimal>"
        )

    @property
    def value(self) -> float:
        return self.approx

    def mpf(self, dps: int = 50):
        """High-precision value of the ratio (not multiplied by pi)."""
        with mpmath.workdps(dps):
            if self.kind == "rational":
                return mpmath.mpf(self.fraction.numerator) / self.fraction.denominator
            if self.kind == "irrational" and self.tag in _NAMED_IRRATIONALS:
                return _NAMED_IRRATIONALS[self.tag]()
            # decimal tag or untagged: precision is whatever was declared
            return mpmath.mpf(repr(self.approx) if self.tag is None else self.tag)

    def describe(self) -> str:
        if self.kind == "rational":
            return str(self.fraction)
        if self.kind == "irrational":
            return f"irrational:{self.tag}"
        return f"untagged:{self.approx!r}"


_ALLOWED_LOCALS = {
    "x": X,
    "sin": sympy.sin,
    "cos": sympy.cos,
    "exp": sympy.exp,
    "pi": sympy.pi,
    "E": sympy.E,
    "e": sympy.E,
}

# Constructors the tokenizer emits for literals and bare names; anything a
# user sneaks in this way is still caught by the whitelist walk below.
_PARSER_GLOBALS = {
    "Integer": sympy.Integer,
    "Float": sympy.Float,
    "Rational": sympy.Rational,
    "Symbol": sympy.Symbol,
}


# A '.' that is not part of a numeric literal is attribute access, which
# the grammar does not include (parse_expr would happily evaluate it).
_ATTRIBUTE_RE = re.compile(r"[A-Za-z_)]\s*\.|\.\s*[A-Za-z_]")


def parse_boundary_expression(text: str) -> sympy.Expr:
    """Parse one boundary function of x under a strict whitelist.

    Allowed: +, -, *, /, **, parentheses, numeric literals, pi, e, the
    symbol x, and the functions sin, cos, exp.
    """
    if _ATTRIBUTE_RE.search(text):
        raise ExpressionError(f"attribute access not allowed in {text!r}")
    try:
        expr = parse_expr(text, local_dict=_ALLOWED_LOCALS, global_dict=_PARSER_GLOBALS)
    except ExpressionError:
        raise
    except Exception as exc:
        raise ExpressionError(f"cannot parse expression {text!r}: {exc}") from None
    for node in sympy.preorder_traversal(expr):
        if isinstance(node, (sympy.Add, sympy.Mul, sympy.Pow)):
            continue
        if isinstance(node, sympy.Number):
            continue
        if node is sympy.pi or node is sympy.E:
            continue
        if isinstance(node, sympy.Symbol):
            if node == X:
                continue
            raise ExpressionError(f"unknown symbol {node!s} in {text!r}")
        if isinstance(node, (sympy.sin, sympy.cos, sympy.exp)):
            continue
        raise ExpressionError(
            f"construct {type(node).__name__} not allowed in {text!r}"
        )
    return expr


@dataclass(eq=False)
class BoundaryFunction:
    """One boundary function on [0, pi]: an expression or uniform samples.

    Expressions give exact endpoint derivatives for the smoothness checks;
    samples (uniform, endpoints included) cover tabulated data and are
    differentiated by one-sided finite differences where needed.
    """

    expr: sympy.Expr | None = None
    samples: np.ndarray | None = None
    source: str = "0"
    _fn: object = field(default=None, repr=False)

    @classmethod
    def from_expression(cls, text: str) -> "BoundaryFunction":
        return cls(expr=parse_boundary_expression(text), source=text)

    @classmethod
    def from_samples(cls, values) -> "BoundaryFunction":
        arr = np.asarray(values, dtype=float)
        if arr.ndim != 1 or len(arr) < 5:
            raise ValidationError("sampled boundary data need >= 5 uniform values")
        return cls(samples=arr, source=f"samples[{len(arr)}]")

    @classmethod
    def zero(cls) -> "BoundaryFunction":
        return cls(expr=sympy.Integer(0), source="0")

    @property
    def is_expression(self) -> bool:
        return self.expr is not None

    @property
    def is_zero(self) -> bool:
        return self.expr is not None and self.expr == 0

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.expr is not None:
            if self._fn is None:
                self._fn = sympy.lambdify(X, self.expr, modules="numpy")
            out = self._fn(x)
            return np.broadcast_to(np.asarray(out, dtype=float), x.shape).copy()
        grid = np.linspace(0.0, math.pi, len(self.samples))
        return np.interp(x, grid, self.samples)

    def derivative_expr(self, order: int) -> sympy.Expr:
        if self.expr is None:
            raise ValidationError("derivative_expr needs an expression function")
        return sympy.diff(self.expr, X, order)

    def endpoint_derivative(self, endpoint: str, order: int) -> float:
        """Derivative value at x = 0 or x = pi; exact for expressions."""
        point = sympy.Integer(0) if endpoint == "left" else sympy.pi
        if self.expr is not None:
            val = sympy.diff(self.expr, X, order).subs(X, point)
            return float(sympy.N(val, 30))
        h = math.pi / (len(self.samples) - 1)
        npts = order + 5
        if npts > len(self.samples):
            raise ValidationError("too few samples for endpoint derivative")
        if endpoint == "left":
            offs = np.arange(npts)
            vals = self.samples[:npts]
        else:
            offs = np.arange(-(npts - 1), 1)
            vals = self.samples[-npts:]
        w = fd_weights(order, offs)
        return float(np.dot(w, vals) / h**order)


@dataclass(eq=False)
class ProblemSpec:
    """All scalar parameters and boundary data of one problem instance."""

    s: int
    n: int
    a_over_pi: PiRatio
    gamma: int
    delta: int
    q: int
    chi: int
    phi: tuple
    psi: tuple
    p0: BoundaryFunction
    a: float | None = None

    def __post_init__(self):
        if self.a is None:
            self.a = math.pi * self.a_over_pi.value
        self.phi = tuple(self.phi)
        self.psi = tuple(self.psi)

    @property
    def b(self) -> int:
        return self.s // self.n

    @property
    def p0_is_zero(self) -> bool:
        return self.p0.is_zero


def make_spec(
    s: int,
    n: int,
    a_over_pi,
    gamma: int = 1,
    delta: int | None = None,
    q: int = 0,
    chi: int = 0,
    phi=None,
    psi=None,
    p0=None,
) -> ProblemSpec:
    """Convenience constructor with zero data defaults (mainly for tests)."""
    if isinstance(a_over_pi, str):
        ratio = PiRatio.parse(a_over_pi)
    elif isinstance(a_over_pi, PiRatio):
        ratio = a_over_pi
    elif isinstance(a_over_pi, Fraction):
        ratio = PiRatio.rational(a_over_pi.numerator, a_over_pi.denominator)
    elif isinstance(a_over_pi, int):
        ratio = PiRatio.rational(a_over_pi)
    else:
        ratio = PiRatio.untagged(float(a_over_pi))
    if delta is None:
        delta = gamma

    def _coerce(fns):
        if fns is None:
            return tuple(BoundaryFunction.zero() for _ in range(n))
        if isinstance(fns, (str, BoundaryFunction)):
            fns = [fns]
        elif isinstance(fns, np.ndarray) and fns.ndim == 1:
            fns = [fns]
        out = []
        for f in fns:
            if isinstance(f, BoundaryFunction):
                out.append(f)
            elif isinstance(f, str):
                out.append(BoundaryFunction.from_expression(f))
            else:
                out.append(BoundaryFunction.from_samples(f))
        return tuple(out)

    p0fn = BoundaryFunction.zero()
    if isinstance(p0, BoundaryFunction):
        p0fn = p0
    elif isinstance(p0, str):
        p0fn = BoundaryFunction.from_expression(p0)
    elif isinstance(p0, (int, float)) and p0 != 0:
        p0fn = BoundaryFunction.from_expression(repr(float(p0)))
    elif p0 is not None and not isinstance(p0, (int, float)):
        p0fn = BoundaryFunction.from_samples(p0)

    return ProblemSpec(
        s=s, n=n, a_over_pi=ratio, gamma=gamma, delta=delta, q=q, chi=chi,
        phi=_coerce(phi), psi=_coerce(psi), p0=p0fn,
    )


@dataclass(frozen=True)
class Violation:
    constraint: str
    message: str


@dataclass
class ValidationReport:
    violations: list

    @property
    def ok(self) -> bool:
        return not self.violations

    def raise_if_failed(self):
        if self.violations:
            lines = "; ".join(f"[{v.constraint}] {v.message}" for v in self.violations)
            raise ValidationError(lines)


def validate(spec: ProblemSpec, K: int | None = None) -> ValidationReport:
    """Check every structural constraint; report-style, never raises.

    Pure and deterministic: the same spec always yields the same report.
    """
    bad = []

    def fail(cid, msg):
        bad.append(Violation(cid, msg))

    if not isinstance(spec.s, int) or spec.s < 1:
        fail("s-positive", f"s must be a positive integer, got {spec.s!r}")
    if not isinstance(spec.n, int) or spec.n < 1:
        fail("n-positive", f"n must be a positive integer, got {spec.n!r}")
    if isinstance(spec.s, int) and isinstance(spec.n, int) and spec.n >= 1:
        if spec.s % spec.n != 0:
            fail("b-integer", f"b = s/n = {spec.s}/{spec.n} is not an integer")
    if spec.a is None or not (spec.a > 0):
        fail("a-positive", f"a must be positive, got {spec.a!r}")
    else:
        expected = math.pi * spec.a_over_pi.value
        if abs(spec.a - expected) > 1e-9 * max(1.0, abs(spec.a)):
            fail(
                "a-ratio-consistent",
                f"a={spec.a!r} disagrees with pi * (a/pi) = {expected!r}",
            )
    if spec.gamma != spec.delta:
        fail("strides-equal", f"gamma={spec.gamma} and delta={spec.delta} must match")
    if spec.gamma not in (1, 2):
        fail("stride-range", f"gamma must be 1 or 2, got {spec.gamma}")
    if spec.gamma in (1, 2) and isinstance(spec.n, int) and spec.n >= 1:
        hi = spec.n if spec.gamma == 1 else 1
        if not (0 <= spec.q <= hi):
            fail("order-range-lower", f"q={spec.q} outside {{0..{hi}}} for gamma={spec.gamma}")
        if not (0 <= spec.chi <= hi):
            fail("order-range-upper", f"chi={spec.chi} outside {{0..{hi}}} for delta={spec.delta}")
    if len(spec.phi) != spec.n:
        fail("data-count", f"need n={spec.n} lower-edge functions, got {len(spec.phi)}")
    if len(spec.psi) != spec.n:
        fail("data-count", f"need n={spec.n} upper-edge functions, got {len(spec.psi)}")
    xs = np.linspace(0.0, math.pi, 401)
    p0v = spec.p0(xs)
    if np.min(p0v) < -1e-12:
        fail("p0-nonnegative", f"p0 dips to {np.min(p0v):.3e} on [0, pi]")
    if K is not None:
        for group, fns in (("phi", spec.phi), ("psi", spec.psi)):
            for r, f in enumerate(fns):
                if f.samples is not None and len(f.samples) < 4 * K:
                    fail(
                        "samples-count",
                        f"{group}[{r}] has {len(f.samples)} samples, need >= 4K = {4 * K}",
                    )
    return ValidationReport(bad)


_CONFIG_KEY_RE = re.compile(r"^(phi|psi)\[(\d+)\]$")
_SCALAR_KEYS = {"s", "n", "gamma", "delta", "q", "chi", "K"}
_FLOAT_KEYS = {"a", "tol", "tol_singular"}


def parse_config_text(text: str):
    """Parse key = value config lines into (ProblemSpec, run options dict).

    Recognized keys: s, n, a, a_over_pi, gamma, delta, q, chi, p0,
    phi[r], psi[r], K, tol, tol_singular.  '#' starts a comment.
    Boundary values are expressions, or csv:<path> for sampled data.
    """
    raw = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"config line {lineno}: expected key = value")
        key, value = (part.strip() for part in line.split("=", 1))
        if key in raw:
            raise ValidationError(f"config line {lineno}: duplicate key {key!r}")
        raw[key] = value

    def boundary_value(text_value):
        if text_value.startswith("csv:"):
            data = np.loadtxt(text_value[4:], delimiter=",", ndmin=1)
            return BoundaryFunction.from_samples(data)
        return BoundaryFunction.from_expression(text_value)

    scalars = {}
    options = {}
    phi_map, psi_map = {}, {}
    p0 = BoundaryFunction.zero()
    ratio = None
    a_value = None
    for key, value in raw.items():
        m = _CONFIG_KEY_RE.match(key)
        if m:
            target = phi_map if m.group(1) == "phi" else psi_map
            target[int(m.group(2))] = boundary_value(value)
        elif key in _SCALAR_KEYS:
            try:
                scalars[key] = int(value)
            except ValueError:
                raise ValidationError(f"key {key!r} must be an integer, got {value!r}") from None
        elif key in _FLOAT_KEYS:
            try:
                parsed = float(value)
            except ValueError:
                raise ValidationError(f"key {key!r} must be a number, got {value!r}") from None
            if key == "a":
                a_value = parsed
            else:
                options[key] = parsed
        elif key == "a_over_pi":
            ratio = PiRatio.parse(value)
        elif key == "p0":
            p0 = boundary_value(value)
        elif key == "grid":
            options["grid"] = int(value)
        else:
            raise ValidationError(f"unknown config key {key!r}")

    for need in ("s", "n", "gamma", "delta", "q", "chi"):
        if need not in scalars:
            raise ValidationError(f"config is missing required key {need!r}")
    if ratio is None:
        if a_value is None:
            raise ValidationError("config needs a_over_pi (or at least a)")
        ratio = PiRatio.untagged(a_value / math.pi)
    n = scalars["n"]
    for name, mapping in (("phi", phi_map), ("psi", psi_map)):
        for r in mapping:
            if not 0 <= r < n:
                raise ValidationError(f"{name}[{r}] out of range for n={n}")
    phi = tuple(phi_map.get(r, BoundaryFunction.zero()) for r in range(n))
    psi = tuple(psi_map.get(r, BoundaryFunction.zero()) for r in range(n))
    spec = ProblemSpec(
        s=scalars["s"], n=n, a_over_pi=ratio, a=a_value,
        gamma=scalars["gamma"], delta=scalars["delta"],
        q=scalars["q"], chi=scalars["chi"], phi=phi, psi=psi, p0=p0,
    )
    if "K" in scalars:
        options["K"] = scalars["K"]
    return spec, options


def load_config(path):
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config_text(fh.read())
