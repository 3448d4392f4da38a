"""Truncated exact models of complete Tate Z_p-algebras.

Four coefficient models are provided:

* ``Zp(p, N)``              -- Z_p realized as Z/p^N; alpha = p (not a unit here).
* ``Qp(p, N)``              -- Q_p via p-exponent plus unit part, relative precision N.
* ``FpLaurent(p, M)``       -- F_p((T)) truncated at T^M; alpha = T.
* ``MixedAnnulus(p, N, M)`` -- (Z/p^N)((T)) truncated at T^M; alpha = T and
  p nilpotent (p^N = 0): the boundary-annulus chart of weight space.

Every element carries the absolute precision ("known modulo alpha^prec")
through which its value is certified.  Arithmetic propagates precision
conservatively, so recomputing an expression at higher precision and
truncating reproduces the lower-precision result bit-exactly.  Valuations
are integers in units of v(alpha); fractional slopes appear only downstream
in Newton polygons.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional, Tuple, Union

ZP = "Zp"
QP = "Qp"
FP_LAURENT = "FpLaurent"
MIXED_ANNULUS = "MixedAnnulus"

_KINDS = (ZP, QP, FP_LAURENT, MIXED_ANNULUS)
_LAURENT_KINDS = (FP_LAURENT, MIXED_ANNULUS)


class RingError(ValueError):
    """Invalid ring construction, mixed-ring arithmetic, or bad payload."""


class PrecisionError(ArithmeticError):
    """An operation cannot be certified at the available precision."""


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    d = 2
    while d * d <= p:
        if p % d == 0:
            return False
        d += 1
    return True


def vp(n: int, p: int) -> Optional[int]:
    """p-adic valuation of an integer; None for 0."""
    if n == 0:
        return None
    n = abs(n)
    v = 0
    while n % p == 0:
        v += 1
        n //= p
    return v


@dataclass(frozen=True, order=True)
class RingSpec:
    """Description of one truncated coefficient model.

    ``n`` is the p-exponent precision (modulus p^n where applicable) and
    ``m`` the T-precision window for the Laurent models.
    """

    kind: str
    p: int
    n: int = 1
    m: int = 0

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise RingError(f"unknown ring kind {self.kind!r}")
        if not _is_prime(self.p):
            raise RingError(f"p must be prime, got {self.p}")
        if self.kind in (ZP, QP, MIXED_ANNULUS) and self.n < 1:
            raise RingError("precision must be >= 1")
        if self.kind in _LAURENT_KINDS and self.m < 1:
            raise RingError("precision must be >= 1")

    @property
    def is_laurent(self) -> bool:
        return self.kind in _LAURENT_KINDS

    @property
    def alpha_name(self) -> str:
        return "T" if self.is_laurent else "p"

    @property
    def alpha_invertible(self) -> bool:
        return self.kind != ZP

    @property
    def coeff_modulus(self) -> int:
        """Modulus of Laurent coefficients (p for FpLaurent, p^n for MixedAnnulus)."""
        if self.kind == FP_LAURENT:
            return self.p
        if self.kind == MIXED_ANNULUS:
            return self.p ** self.n
        raise RingError("coeff_modulus only applies to Laurent models")

    @property
    def default_prec(self) -> int:
        return self.m if self.is_laurent else self.n

    def to_json(self) -> dict:
        return {"kind": self.kind, "p": self.p, "N": self.n, "M": self.m}

    @staticmethod
    def from_json(obj: dict) -> "RingSpec":
        return RingSpec(obj["kind"], obj["p"], obj.get("N", 1), obj.get("M", 0))

    def __str__(self):
        if self.kind == ZP:
            return f"Zp({self.p},{self.n})"
        if self.kind == QP:
            return f"Qp({self.p},{self.n})"
        if self.kind == FP_LAURENT:
            return f"FpLaurent({self.p},{self.m})"
        return f"MixedAnnulus({self.p},{self.n},{self.m})"


def Zp(p: int, N: int) -> RingSpec:
    return RingSpec(ZP, p, N, 0)


def Qp(p: int, N: int) -> RingSpec:
    return RingSpec(QP, p, N, 0)


def FpLaurent(p: int, M: int) -> RingSpec:
    return RingSpec(FP_LAURENT, p, 1, M)


def MixedAnnulus(p: int, N: int, M: int) -> RingSpec:
    return RingSpec(MIXED_ANNULUS, p, N, M)


class Val(NamedTuple):
    """Valuation lower bound; ``exact`` means it is the true v_alpha."""

    value: int
    exact: bool

    def __str__(self):
        return str(self.value) if self.exact else f">= {self.value}, uncertified"


# Payload conventions:
#   Zp            int in [0, p^prec)
#   Qp            None (zero at precision) or (v, unit) with unit in
#                 [1, p^(prec-v)) coprime to p
#   FpLaurent /   tuple of (exponent, coeff) pairs sorted by exponent,
#   MixedAnnulus  exponent < prec, coeff nonzero mod the coefficient modulus

Payload = Union[int, None, Tuple[int, int], Tuple[Tuple[int, int], ...]]


@dataclass(frozen=True)
class RingElem:
    """An element of a truncated Tate coefficient ring.

    The value is known modulo alpha^prec; the payload is the canonical
    residue representation.
    """

    spec: RingSpec
    prec: int
    payload: Payload

    # -- inspection ------------------------------------------------------

    def is_zero_at_prec(self) -> bool:
        k = self.spec.kind
        if k == ZP:
            return self.payload == 0
        if k == QP:
            return self.payload is None
        return len(self.payload) == 0

    def valuation(self) -> Val:
        """v_alpha lower bound; exact whenever strictly below the precision."""
        if self.is_zero_at_prec():
            return Val(self.prec, False)
        k = self.spec.kind
        if k == ZP:
            return Val(vp(self.payload, self.spec.p), True)
        if k == QP:
            return Val(self.payload[0], True)
        return Val(self.payload[0][0], True)

    def val_lower(self) -> int:
        return self.valuation().value

    def unit_valuation(self) -> Optional[int]:
        """Lowest exponent whose coefficient is a unit mod p (Laurent models)."""
        if not self.spec.is_laurent:
            v = self.valuation()
            return v.value if v.exact else None
        p = self.spec.p
        for e, c in self.payload:
            if c % p != 0:
                return e
        return None

    # -- structural helpers ------------------------------------------------

    def _check_same(self, other: "RingElem"):
        if self.spec != other.spec:
            raise RingError(f"mixed ring specs: {self.spec} vs {other.spec}")

    def truncate(self, prec: int) -> "RingElem":
        """Reduce to a smaller absolute precision."""
        if prec >= self.prec:
            return self
        s = self.spec
        k = s.kind
        if k == ZP:
            return RingElem(s, prec, self.payload % s.p ** prec if prec > 0 else 0)
        if k == QP:
            if self.payload is None:
                return RingElem(s, prec, None)
            v, u = self.payload
            if v >= prec:
                return RingElem(s, prec, None)
            return RingElem(s, prec, (v, u % s.p ** (prec - v)))
        return RingElem(s, prec, tuple((e, c) for e, c in self.payload if e < prec))

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other: "RingElem") -> "RingElem":
        self._check_same(other)
        s = self.spec
        prec = min(self.prec, other.prec)
        k = s.kind
        if k == ZP:
            return RingElem(s, prec, (self.payload + other.payload) % s.p ** prec)
        if k == QP:
            return _qp_add(s, prec, self.payload, other.payload)
        return _laurent_add(s, prec, self.payload, other.payload)

    def __neg__(self) -> "RingElem":
        s = self.spec
        k = s.kind
        if k == ZP:
            return RingElem(s, self.prec, (-self.payload) % s.p ** self.prec)
        if k == QP:
            if self.payload is None:
                return self
            v, u = self.payload
            return RingElem(s, self.prec, (v, (-u) % s.p ** (self.prec - v)))
        q = s.coeff_modulus
        return RingElem(s, self.prec, tuple((e, (-c) % q) for e, c in self.payload))

    def __sub__(self, other: "RingElem") -> "RingElem":
        return self + (-other)

    def __mul__(self, other: "RingElem") -> "RingElem":
        self._check_same(other)
        s = self.spec
        k = s.kind
        # abs precision of x*y is min(prec_x + v(y), prec_y + v(x)); a
        # zero-at-precision operand contributes its precision as the bound
        va, vb = self.val_lower(), other.val_lower()
        prec = min(self.prec + vb, other.prec + va)
        if k == ZP:
            if prec <= 0:
                return RingElem(s, prec, 0)
            return RingElem(s, prec, (self.payload * other.payload) % s.p ** prec)
        if k == QP:
            if self.payload is None or other.payload is None:
                return RingElem(s, prec, None)
            v = va + vb
            if v >= prec:
                return RingElem(s, prec, None)
            u = (self.payload[1] * other.payload[1]) % s.p ** (prec - v)
            return RingElem(s, prec, (v, u)) if u else RingElem(s, prec, None)
        return _laurent_mul(s, prec, self.payload, other.payload)

    def inverse(self) -> "RingElem":
        s = self.spec
        k = s.kind
        if self.is_zero_at_prec():
            raise PrecisionError(
                "division by an element indistinguishable from 0 at precision")
        if k == ZP:
            if self.payload % s.p == 0:
                raise RingError("element with positive valuation is not invertible in Z_p")
            return RingElem(s, self.prec, pow(self.payload, -1, s.p ** self.prec))
        if k == QP:
            v, u = self.payload
            rel = self.prec - v
            return RingElem(s, self.prec - 2 * v, (-v, pow(u, -1, s.p ** rel)))
        return _laurent_inv(self)

    def __truediv__(self, other: "RingElem") -> "RingElem":
        self._check_same(other)
        return self * other.inverse()

    def __pow__(self, k: int) -> "RingElem":
        if k < 0:
            return self.inverse() ** (-k)
        r = Ring(self.spec).one(self.prec)
        b = self
        while k:
            if k & 1:
                r = r * b
            k >>= 1
            if k:
                b = b * b
        return r

    # -- comparisons -------------------------------------------------------

    def agrees(self, other: "RingElem", prec: Optional[int] = None) -> bool:
        """Equality modulo alpha^prec (default: joint precision)."""
        self._check_same(other)
        joint = min(self.prec, other.prec)
        prec = joint if prec is None else min(prec, joint)
        return self.truncate(prec).payload == other.truncate(prec).payload

    def diff_valuation(self, other: "RingElem") -> Val:
        return (self - other).valuation()

    # -- conversions -------------------------------------------------------

    def lift(self) -> int:
        """Integer representative (Zp always; Qp only when v >= 0)."""
        k = self.spec.kind
        if k == ZP:
            return self.payload
        if k == QP:
            if self.payload is None:
                return 0
            v, u = self.payload
            if v < 0:
                raise RingError("negative valuation has no integer lift")
            return u * self.spec.p ** v
        raise RingError("no integer lift in Laurent models")

    def to_json(self) -> dict:
        s = self.spec
        if s.kind == ZP:
            return {"digits": _digits(self.payload, s.p, self.prec), "prec": self.prec}
        if s.kind == QP:
            if self.payload is None:
                return {"zero": True, "prec": self.prec}
            v, u = self.payload
            return {"val": v, "digits": _digits(u, s.p, self.prec - v), "prec": self.prec}
        nd = 1 if s.kind == FP_LAURENT else s.n
        return {"terms": [[e, _digits(c, s.p, nd)] for e, c in self.payload],
                "prec": self.prec}

    def __str__(self):
        a = self.spec.alpha_name
        if self.is_zero_at_prec():
            return f"O({a}^{self.prec})"
        if self.spec.kind == ZP:
            return f"{self.payload} + O(p^{self.prec})"
        if self.spec.kind == QP:
            v, u = self.payload
            return f"p^{v}*{u} + O(p^{self.prec})"
        body = " + ".join(f"{c}*T^{e}" for e, c in self.payload)
        return f"{body} + O(T^{self.prec})"


def _digits(n: int, p: int, length: int) -> list:
    out = []
    for _ in range(max(length, 0)):
        out.append(n % p)
        n //= p
    return out


# -- Qp payload arithmetic ----------------------------------------------------


def _qp_normalize(s: RingSpec, prec: int, v: int, mant: int) -> RingElem:
    """Build a Qp element from p^v * mant known modulo p^prec."""
    if mant == 0:
        return RingElem(s, prec, None)
    w = vp(mant, s.p)
    v2 = v + w
    if v2 >= prec:
        return RingElem(s, prec, None)
    u = (mant // s.p ** w) % s.p ** (prec - v2)
    if u == 0:
        return RingElem(s, prec, None)
    return RingElem(s, prec, (v2, u))


def _qp_add(s: RingSpec, prec: int, a, b) -> RingElem:
    if a is None and b is None:
        return RingElem(s, prec, None)
    if a is None:
        return _qp_normalize(s, prec, b[0], b[1])
    if b is None:
        return _qp_normalize(s, prec, a[0], a[1])
    w = min(a[0], b[0])
    mant = a[1] * s.p ** (a[0] - w) + b[1] * s.p ** (b[0] - w)
    if prec <= w:
        return RingElem(s, prec, None)
    return _qp_normalize(s, prec, w, mant % s.p ** (prec - w))


# -- Laurent payload arithmetic -----------------------------------------------


def _laurent_make(s: RingSpec, prec: int, coeffs: dict) -> RingElem:
    q = s.coeff_modulus
    terms = []
    for e in sorted(coeffs):
        if e >= prec:
            continue
        c = coeffs[e] % q
        if c:
            terms.append((e, c))
    return RingElem(s, prec, tuple(terms))


def _laurent_add(s: RingSpec, prec: int, a, b) -> RingElem:
    coeffs = {}
    for e, c in a:
        coeffs[e] = coeffs.get(e, 0) + c
    for e, c in b:
        coeffs[e] = coeffs.get(e, 0) + c
    return _laurent_make(s, prec, coeffs)


def _laurent_mul(s: RingSpec, prec: int, a, b) -> RingElem:
    coeffs = {}
    for e1, c1 in a:
        for e2, c2 in b:
            e = e1 + e2
            if e < prec:
                coeffs[e] = coeffs.get(e, 0) + c1 * c2
    return _laurent_make(s, prec, coeffs)


def _dict_mul(a: dict, b: dict, q: int, hi: int) -> dict:
    out = {}
    for e1, c1 in a.items():
        for e2, c2 in b.items():
            e = e1 + e2
            if e < hi:
                out[e] = (out.get(e, 0) + c1 * c2) % q
    return {e: c for e, c in out.items() if c}


def _laurent_inv(x: RingElem) -> RingElem:
    """Inverse in the truncated Laurent models.

    Requires some coefficient to be a unit mod p within the known window.
    In the MixedAnnulus model the terms below the unit exponent have
    p-divisible coefficients and are nilpotent; a Newton iteration
    y <- y(2 - xy) absorbs them in finitely many steps.
    """
    s = x.spec
    q = s.coeff_modulus
    e = x.unit_valuation()
    if e is None:
        raise PrecisionError(
            "element indistinguishable from a non-unit at precision")
    v = x.val_lower()
    hi = x.prec - 2 * v + 1  # worst-case exponent window for the result
    coeffs = dict(x.payload)
    y = {-e: pow(coeffs[e], -1, q)}
    for _ in range(64):
        r = _dict_mul(coeffs, y, q, hi)
        two_minus = {k: (-c) % q for k, c in r.items()}
        two_minus[0] = (two_minus.get(0, 0) + 2) % q
        y2 = _dict_mul(y, two_minus, q, hi)
        if y2 == y:
            break
        y = y2
    else:
        raise PrecisionError("Laurent inversion did not stabilize")
    vy = min(y)
    prec = x.prec + 2 * vy
    out = _laurent_make(s, prec, y)
    check_prec = min(x.prec + vy, prec + v)
    if check_prec > 0:
        prod = _laurent_mul(s, check_prec, x.payload, out.payload)
        if prod.payload != ((0, 1),):
            raise PrecisionError("Laurent inversion verification failed")
    return out


# -- ring handle ----------------------------------------------------------------


class Ring:
    """Handle exposing 0, 1, alpha and element constructors for one model."""

    def __init__(self, spec: RingSpec):
        self.spec = spec

    def zero(self, prec: Optional[int] = None) -> RingElem:
        s = self.spec
        prec = s.default_prec if prec is None else prec
        if s.kind == ZP:
            return RingElem(s, prec, 0)
        if s.kind == QP:
            return RingElem(s, prec, None)
        return RingElem(s, prec, ())

    def one(self, prec: Optional[int] = None) -> RingElem:
        return self.from_int(1, prec)

    def alpha(self, prec: Optional[int] = None) -> RingElem:
        s = self.spec
        if s.is_laurent:
            prec = s.default_prec if prec is None else prec
            return RingElem(s, prec, ((1, 1),) if prec > 1 else ())
        return self.from_int(s.p, prec)

    def from_int(self, value: int, prec: Optional[int] = None) -> RingElem:
        s = self.spec
        if s.kind == ZP:
            prec = s.n if prec is None else prec
            return RingElem(s, prec, value % s.p ** prec)
        if s.kind == QP:
            if value == 0:
                return RingElem(s, s.n if prec is None else prec, None)
            if prec is None:
                prec = s.n + vp(value, s.p)
            return _qp_normalize(s, prec, 0, value)
        prec = s.m if prec is None else prec
        return _laurent_make(s, prec, {0: value})

    def from_rational(self, num: int, den: int, prec: Optional[int] = None) -> RingElem:
        return self.from_int(num, prec) / self.from_int(den, prec)

    def from_terms(self, terms, prec: Optional[int] = None) -> RingElem:
        """Laurent element from (exponent, integer coefficient) pairs."""
        s = self.spec
        if not s.is_laurent:
            raise RingError("from_terms only applies to Laurent models")
        prec = s.m if prec is None else prec
        coeffs = {}
        for e, c in terms:
            coeffs[e] = coeffs.get(e, 0) + c
        return _laurent_make(s, prec, coeffs)

    def from_json(self, obj: dict) -> RingElem:
        s = self.spec
        p = s.p
        if s.kind == ZP:
            n = sum(d * p ** i for i, d in enumerate(obj["digits"]))
            return RingElem(s, obj["prec"], n % p ** obj["prec"])
        if s.kind == QP:
            if obj.get("zero"):
                return RingElem(s, obj["prec"], None)
            u = sum(d * p ** i for i, d in enumerate(obj["digits"]))
            return _qp_normalize(s, obj["prec"], obj["val"], u)
        coeffs = {}
        for e, digs in obj["terms"]:
            coeffs[e] = sum(d * p ** i for i, d in enumerate(digs))
        return _laurent_make(s, obj["prec"], coeffs)


def make_ring(spec: RingSpec) -> Ring:
    """Build a ring handle; invalid specs are rejected by RingSpec itself."""
    return Ring(spec)


def arith(op: str, x: RingElem, y: Optional[RingElem] = None) -> RingElem:
    """Dispatch basic arithmetic by name ('add', 'mul', 'neg', 'inv', 'div')."""
    if op == "add":
        return x + y
    if op == "mul":
        return x * y
    if op == "neg":
        return -x
    if op == "inv":
        return x.inverse()
    if op == "div":
        return x / y
    raise RingError(f"unknown operation {op!r}")
