"""Functions Z_p^k -> A as truncated Mahler series.

A function is stored by its coefficients a_n in g = sum a_n * binom(z, n)
over multi-indices n of total degree at most the cutoff, together with
optional certified tail data for the dropped coefficients.  Coefficients
are recovered from grid values by iterated finite differences, which are
exact: the Mahler coefficient at n depends only on the values on
{0..n_1} x ... x {0..n_k}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from .rings import PrecisionError, Ring, RingElem, RingError, RingSpec

MultiIndex = Tuple[int, ...]


def ceil_mul(r: Fraction, d: int) -> int:
    """ceil(r*d) exactly."""
    x = Fraction(r) * d
    return -((-x.numerator) // x.denominator)


def floor_mul(r: Fraction, d: int) -> int:
    x = Fraction(r) * d
    return x.numerator // x.denominator


def int_binom(z: int, n: int) -> int:
    """binom(z, n) for any integer z (falling factorial over n!)."""
    if n < 0:
        return 0
    num = 1
    for i in range(n):
        num *= z - i
    return num // math.factorial(n)


def binom_at(ring: Ring, z: Sequence[int], n: MultiIndex) -> RingElem:
    """binom(z, n) = prod_i binom(z_i, n_i) mapped into the ring."""
    c = 1
    for zi, ni in zip(z, n):
        c *= int_binom(zi, ni)
        if c == 0:
            break
    return ring.from_int(c)


def box_indices(k: int, side: int) -> Iterable[MultiIndex]:
    """All multi-indices in {0..side}^k, lexicographic."""
    if k == 0:
        yield ()
        return
    for head in box_indices(k - 1, side):
        for i in range(side + 1):
            yield head + (i,)


def simplex_indices(k: int, total: int) -> List[MultiIndex]:
    """All multi-indices with sum <= total, sorted by (sum, lex)."""
    out = [n for n in box_indices(k, total) if sum(n) <= total]
    out.sort(key=lambda n: (sum(n), n))
    return out


def finite_differences(values: Sequence[RingElem]) -> List[RingElem]:
    """(Delta^j g)(0) for j = 0..len-1 from values g(0), g(1), ..."""
    out = [values[0]]
    row = list(values)
    for _ in range(len(values) - 1):
        row = [row[i + 1] - row[i] for i in range(len(row) - 1)]
        out.append(row[0])
    return out


@dataclass(frozen=True)
class TailBound:
    """Certified claim v(a_n) >= rate * sum(n) + offset for all dropped n.

    ``zero`` marks tails whose dropped coefficients vanish identically
    (finitely supported functions).
    """

    rate: Fraction
    offset: int
    zero: bool = False

    def floor_at(self, degree: int) -> Optional[int]:
        if self.zero:
            return None  # infinite valuation
        x = Fraction(self.rate) * degree + self.offset
        return x.numerator // x.denominator

    def to_json(self):
        return {"rate": [self.rate.numerator, self.rate.denominator],
                "offset": self.offset, "zero": self.zero}


ZERO_TAIL = TailBound(Fraction(0), 0, zero=True)


@dataclass(frozen=True)
class MahlerFn:
    """A function Z_p^k -> A stored as truncated Mahler coefficients."""

    ring: RingSpec
    k: int
    cutoff: int
    coeffs: Mapping[MultiIndex, RingElem]
    tail: Optional[TailBound] = None

    def coeff(self, n: MultiIndex) -> Optional[RingElem]:
        return self.coeffs.get(tuple(n))

    def support(self) -> List[MultiIndex]:
        return sorted((n for n, c in self.coeffs.items() if not c.is_zero_at_prec()),
                      key=lambda n: (sum(n), n))

    def to_json(self) -> dict:
        return {
            "ring": self.ring.to_json(),
            "k": self.k,
            "D": self.cutoff,
            "coeffs": [[list(n), c.to_json()] for n, c in sorted(self.coeffs.items())],
            "tail_bound": self.tail.to_json() if self.tail else None,
        }


def make_fn(spec: RingSpec, coeffs: Dict[MultiIndex, RingElem], cutoff: Optional[int] = None,
            tail: Optional[TailBound] = None) -> MahlerFn:
    coeffs = {tuple(n): c for n, c in coeffs.items()}
    if not coeffs:
        raise RingError("a MahlerFn needs at least one coefficient")
    ks = {len(n) for n in coeffs}
    if len(ks) != 1:
        raise RingError("inconsistent multi-index dimensions")
    k = ks.pop()
    for c in coeffs.values():
        if c.spec != spec:
            raise RingError("coefficient ring mismatch")
    if cutoff is None:
        cutoff = max(sum(n) for n in coeffs)
    return MahlerFn(spec, k, cutoff, coeffs, tail)


def fit_values(values: Union[Sequence[RingElem], Mapping[MultiIndex, RingElem]],
               tail: Optional[TailBound] = None) -> MahlerFn:
    """Mahler coefficients from values on the full grid {0..s}^k.

    Coefficients are the iterated finite differences at 0; evaluating the
    result on the grid reproduces the input exactly.
    """
    if isinstance(values, Mapping):
        grid = {tuple(n): v for n, v in values.items()}
        ks = {len(n) for n in grid}
        if len(ks) != 1:
            raise RingError("inconsistent grid dimensions")
        k = ks.pop()
        side = max(max(n) for n in grid) if k else 0
    else:
        grid = {(i,): v for i, v in enumerate(values)}
        k = 1
        side = len(values) - 1
    expected = (side + 1) ** k
    if len(grid) != expected or any(n not in grid for n in box_indices(k, side)):
        raise RingError(f"incomplete grid: expected the full {expected}-point box")
    spec = next(iter(grid.values())).spec
    for v in grid.values():
        if v.spec != spec:
            raise RingError("grid value ring mismatch")
    # difference along each axis in turn
    tensor = grid
    for axis in range(k):
        new: Dict[MultiIndex, RingElem] = {}
        fibers: Dict[MultiIndex, List[RingElem]] = {}
        for n, v in tensor.items():
            base = n[:axis] + n[axis + 1:]
            fibers.setdefault(base, [None] * (side + 1))[n[axis]] = v
        for base, fib in fibers.items():
            diffs = finite_differences(fib)
            for j, d in enumerate(diffs):
                new[base[:axis] + (j,) + base[axis:]] = d
        tensor = new
    return MahlerFn(spec, k, k * side, tensor, tail)


def eval_fn(f: MahlerFn, z: Union[int, Sequence[int], Sequence[RingElem]]) -> RingElem:
    """Evaluate sum a_n binom(z, n); folds any certified tail into precision."""
    ring = Ring(f.ring)
    if isinstance(z, int):
        z = (z,)
    zi = tuple(c.lift() if isinstance(c, RingElem) else int(c) for c in z)
    if len(zi) != f.k:
        raise RingError(f"point dimension {len(zi)} != {f.k}")
    acc: Optional[RingElem] = None
    for n in sorted(f.coeffs, key=lambda n: (sum(n), n)):
        term = f.coeffs[n] * binom_at(ring, zi, n)
        acc = term if acc is None else acc + term
    if acc is None:
        acc = ring.zero()
    if f.tail is not None and not f.tail.zero:
        tail_val = f.tail.floor_at(f.cutoff + 1)
        acc = acc.truncate(min(acc.prec, tail_val))
    return acc


@dataclass(frozen=True)
class NormValue:
    """A norm value p^exponent with a certification flag."""

    p: int
    exponent: Optional[int]  # None encodes norm 0
    certified: bool

    @property
    def value(self) -> Fraction:
        if self.exponent is None:
            return Fraction(0)
        e = self.exponent
        return Fraction(self.p ** e) if e >= 0 else Fraction(1, self.p ** (-e))


def norm_r(f: MahlerFn, r: Fraction) -> NormValue:
    """|f|_r = sup_n |a_n| * |alpha^{-1}|^{ceil(r * sum n)}.

    The sup runs over stored certified coefficients; the result is flagged
    uncertified if a zero-at-precision coefficient or an absent/weak tail
    bound could move it.
    """
    r = Fraction(r)
    spec = f.ring
    best: Optional[int] = None
    uncertain: Optional[int] = None
    for n, c in f.coeffs.items():
        v = c.valuation()
        e = ceil_mul(r, sum(n)) - v.value
        if v.exact:
            best = e if best is None else max(best, e)
        else:
            uncertain = e if uncertain is None else max(uncertain, e)
    certified = True
    if uncertain is not None and (best is None or uncertain > best):
        certified = False
    if f.tail is None:
        certified = False
    elif not f.tail.zero:
        rate, off = Fraction(f.tail.rate), f.tail.offset
        d = f.cutoff + 1
        if rate > r:
            bound = (r - rate) * d + 1 - off
        elif rate == r:
            bound = Fraction(1 - off)
        else:
            bound = None
        if bound is None or (best is not None and bound > best):
            certified = False
    return NormValue(spec.p, best, certified)


@dataclass(frozen=True)
class DecayReport:
    """Per-total-degree margins of v(a_n) - ceil(r * sum n) * v(alpha)."""

    r: Fraction
    witness: Tuple[Tuple[int, Optional[int]], ...]  # (degree, margin or None=vacuous)
    certified: bool


def decay_report(f: MahlerFn, r: Fraction) -> DecayReport:
    """Margins certifying membership in the r-analytic module at truncation.

    A degree row is vacuous when every coefficient there is zero at
    precision.  The certified flag demands that margins over the trailing
    half of the stored degrees do not undercut the leading half.
    """
    r = Fraction(r)
    by_degree: Dict[int, List[int]] = {}
    for n, c in f.coeffs.items():
        v = c.valuation()
        if v.exact:
            by_degree.setdefault(sum(n), []).append(v.value)
    witness = []
    margins = []
    for d in range(f.cutoff + 1):
        vals = by_degree.get(d)
        if vals:
            m = min(vals) - ceil_mul(r, d)
            witness.append((d, m))
            margins.append(m)
        else:
            witness.append((d, None))
    if len(margins) <= 1:
        certified = True
    else:
        head = margins[: len(margins) // 2]
        tail = margins[len(margins) // 2:]
        certified = min(tail) >= min(head)
    return DecayReport(r, tuple(witness), certified)


def _coeff_min_val(f: MahlerFn) -> int:
    vals = [c.val_lower() for c in f.coeffs.values()]
    return min(vals) if vals else 0


def _mul_tail(f: MahlerFn, g: MahlerFn, retained: int,
              dropped: Dict[MultiIndex, RingElem]) -> Optional[TailBound]:
    """Tail bound for a product, from input tails and measured dropped coeffs."""
    if f.tail is None or g.tail is None:
        return None
    if f.tail.zero and g.tail.zero:
        if all(c.is_zero_at_prec() for c in dropped.values()):
            return ZERO_TAIL
        # dropped coefficients were fully computed; bound them directly
        off = min(c.val_lower() for c in dropped.values())
        return TailBound(Fraction(0), off)
    rf, of = Fraction(f.tail.rate), f.tail.offset
    rg, og = Fraction(g.tail.rate), g.tail.offset
    if f.tail.zero:
        rf, of = rg, 10 ** 9  # vacuous branch; handled through g's tail
    if g.tail.zero:
        rg, og = rf, 10 ** 9
    fmin, gmin = _coeff_min_val(f), _coeff_min_val(g)
    rate = min(rf, rg)
    cands = [Fraction(of + og),
             Fraction(og + fmin) - rg * f.cutoff,
             Fraction(of + gmin) - rf * g.cutoff]
    for n, c in dropped.items():
        cands.append(Fraction(c.val_lower()) - rate * sum(n))
    off = min(cands)
    return TailBound(rate, off.numerator // off.denominator)


def mul(f: MahlerFn, g: MahlerFn) -> MahlerFn:
    """Product via pointwise multiplication on a grid, then refitting.

    Exact through the retained cutoff min(D_f, D_g) because the product of
    binomial basis functions has integer structure constants.
    """
    if f.ring != g.ring:
        raise RingError("ring mismatch in product")
    if f.k != g.k:
        raise RingError("dimension mismatch in product")
    side = f.cutoff + g.cutoff
    ring = Ring(f.ring)
    grid = {}
    for z in box_indices(f.k, side):
        grid[z] = eval_fn(f, z) * eval_fn(g, z)
    full = fit_values(grid)
    retained = min(f.cutoff, g.cutoff)
    kept = {n: c for n, c in full.coeffs.items() if sum(n) <= retained}
    dropped = {n: c for n, c in full.coeffs.items() if sum(n) > retained}
    tail = _mul_tail(f, g, retained, dropped)
    return MahlerFn(f.ring, f.k, retained, kept, tail)


def character(ring: Ring, value_at_one: RingElem, cutoff: int) -> MahlerFn:
    """The character z -> lambda(z) on Z_p with lambda(1) = value_at_one.

    Coefficients are (lambda(1) - 1)^n; requires lambda(1) - 1 to be
    topologically nilpotent (valuation >= 1).
    """
    u = value_at_one
    delta = u - ring.one(u.prec)
    v = delta.valuation()
    if not delta.is_zero_at_prec():
        if v.value < 1:
            raise RingError(
                "character value has lambda(1)-1 a unit; not locally analytic "
                "by the direct binomial formula (reduce by cosets first)")
    rate = Fraction(max(v.value, 1))
    coeffs: Dict[MultiIndex, RingElem] = {}
    acc = ring.one(u.prec)
    for n in range(cutoff + 1):
        coeffs[(n,)] = acc
        acc = acc * delta
    return MahlerFn(ring.spec, 1, cutoff, coeffs, TailBound(rate, 0))


def vp_factorial(n: int, p: int) -> int:
    """v_p(n!) by the Legendre sum of floor(n / p^k)."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    total = 0
    q = p
    while q <= n:
        total += n // q
        q *= p
    return total


def amice_scale(n: Union[int, MultiIndex], h: int, p: int) -> int:
    """Valuation of the normalization floor(n_i/p^h)! in the h-analytic basis."""
    if isinstance(n, int):
        n = (n,)
    return sum(vp_factorial(ni // p ** h, p) for ni in n)
