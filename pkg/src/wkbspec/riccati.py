"""WKB Riccati recursion on the canonical cover.

With s = sum_k hbar^k s_k and v = sqrt(Q) dz the series solves

    ds + v s^2 = -q v + hbar^-2 v,      q = -S_v / (2 Q)  (genus 0),

which pins s_-1 = 1, s_0 = 0, s_1 = -q/2 and, for k >= 1,

    s_{k+1} = -(1/2) ( ds_k / v + sum_{j+l=k, j,l>=0} s_j s_l ).

Every s_k is a rational function times Q^(-1/2) when k is even; the parity
bookkeeping lives in WkbTerm.half_power.

The recursion runs in a structured representation N(z)/P(z)^m where P is the
numerator of Q: the only poles of the s_k are the turning points, so the
denominator is always a power of P and no polynomial gcd is ever needed in
the hot path.  (The pole factors of Q appear only in numerators.)
"""

from __future__ import annotations

from .errors import TruncationTooLow
from .quaddiff import QuadDiff, wkb_potential_q
from .ratfun import HbarSeries, Polynomial, RationalFunction, WkbTerm, poly_gcd
from .scalars import ComplexScalar

__all__ = ["riccati_series", "riccati_residual", "assert_riccati_residual"]

_HALF = ComplexScalar.of("1/2")
_MHALF = ComplexScalar.of("-1/2")


class _PP:
    """num / P^power with a half-power flag for the Q^(-1/2) factor."""

    __slots__ = ("num", "power", "hp")

    def __init__(self, num: Polynomial, power: int, hp: int):
        self.num = num
        self.power = power
        self.hp = hp

    def is_zero(self):
        return self.num.is_zero()


class _Chart:
    """Precomputed polynomial data of one differential.

    P = numerator of Q, D1 = product over poles of (z - z_j); Q = P / D1^2.
    For formal inputs (plain rational q_scalar) the same machinery runs with
    P, D1 read off the reduced fraction, requiring den to be a perfect
    square; the Airy model (P = z, D1 = 1) is the main such use.
    """

    def __init__(self, source):
        q = source.q_scalar if hasattr(source, "q_scalar") else source
        if isinstance(source, QuadDiff):
            self.P = source.numerator
            self.D1 = source._den1
        else:
            self.P = q.num
            self.D1 = _poly_sqrt(q.den)
        self.q_scalar = q
        self.Pp = self.P.derivative()
        self.D1p = self.D1.derivative()
        # W = P' D1 - 2 P D1'  (so that Q'/Q = W / (P D1))
        self.W = self.Pp * self.D1 - (self.P * self.D1p).scale(ComplexScalar(2))
        self.D1sq = self.D1 * self.D1
        self._ppow = {0: Polynomial.one(), 1: self.P}

    def Ppow(self, m: int) -> Polynomial:
        if m not in self._ppow:
            self._ppow[m] = self.Ppow(m - 1) * self.P
        return self._ppow[m]

    def q_pp(self) -> _PP:
        """q = -(4 W' P D1 - 4 W (P' D1 + P D1') - W^2) / (16 P^3)."""
        Wp = self.W.derivative()
        num = (
            (Wp * self.P * self.D1).scale(ComplexScalar(4))
            - (self.W * (self.Pp * self.D1 + self.P * self.D1p)).scale(ComplexScalar(4))
            - self.W * self.W
        )
        return _PP(num.scale(ComplexScalar.of("-1/16")), 3, 0)

    # ---- arithmetic on _PP ----

    def add(self, a: _PP, b: _PP) -> _PP:
        if a.is_zero():
            return b
        if b.is_zero():
            return a
        if a.hp != b.hp:
            raise ValueError("half-power mismatch in Riccati arithmetic")
        m = max(a.power, b.power)
        na = a.num * self.Ppow(m - a.power) if a.power < m else a.num
        nb = b.num * self.Ppow(m - b.power) if b.power < m else b.num
        return _PP(na + nb, m, a.hp)

    def mul(self, a: _PP, b: _PP) -> _PP:
        hp = a.hp + b.hp
        num = a.num * b.num
        power = a.power + b.power
        if hp == 2:
            # Q^(-1) = D1^2 / P
            num = num * self.D1sq
            power += 1
            hp = 0
        return _PP(num, power, hp)

    def scale(self, a: _PP, s: ComplexScalar) -> _PP:
        return _PP(a.num.scale(s), a.power, a.hp)

    def d_over_v(self, a: _PP) -> _PP:
        """(d a / dz) / sqrt(Q), flipping the half power.

        hp 0:  f = N/P^m          -> f' with hp 1
        hp 1:  f Q^(-1/2), f=N/P^m -> f'/Q - f Q'/(2Q^2), plain rational
        """
        N, m = a.num, a.power
        fp_num = N.derivative() * self.P - N.scale(ComplexScalar(m)) * self.Pp  # f' = fp_num/P^{m+1}
        if a.hp == 0:
            return _PP(fp_num, m + 1, 1)
        # f'/Q = fp_num * D1^2 / P^{m+2}
        t1 = fp_num * self.D1sq
        # f Q'/(2 Q^2) = N W D1 / (2 P^{m+2})
        t2 = (N * self.W * self.D1).scale(_HALF)
        return _PP(t1 - t2, m + 2, 0)

    def to_term(self, a: _PP) -> WkbTerm:
        """Convert to a WkbTerm with a reduced, monic-denominator rational part."""
        num, m = a.num, a.power
        if num.is_zero():
            return WkbTerm(RationalFunction.zero(), a.hp)
        if num.exact and self.P.exact:
            while m > 0:
                qt, rem = num.divmod(self.P)
                if rem.is_zero():
                    num, m = qt, m - 1
                else:
                    break
            if m > 0:
                g = poly_gcd(num, self.P)
                if g.degree > 0:
                    # rare partial cancellation: fall back to the generic path
                    return WkbTerm(RationalFunction(num, self.Ppow(m)), a.hp)
            den = self.Ppow(m)
            if den.degree >= 0 and not den.is_zero():
                lead = den.coeffs[-1]
                num = Polynomial([c / lead for c in num.coeffs])
                den = Polynomial([c / lead for c in den.coeffs])
            return WkbTerm(RationalFunction(num, den, reduce=False), a.hp)
        return WkbTerm(RationalFunction(num, self.Ppow(m), reduce=False), a.hp)


def _poly_sqrt(p: Polynomial) -> Polynomial:
    """Exact square root of a perfect-square polynomial (monic case only)."""
    if p.degree == 0:
        c = p.coeffs[0]
        # accept constant c = s^2 with s from principal square root
        z = c.to_complex() ** 0.5
        if c.exact:
            from fractions import Fraction

            if c.im == 0 and c.re >= 0:
                num, den = c.re.numerator, c.re.denominator
                rn, rd = _isqrt_exact(num), _isqrt_exact(den)
                if rn is not None and rd is not None:
                    return Polynomial([ComplexScalar(Fraction(rn, rd))])
        return Polynomial([ComplexScalar.of(z)])
    if p.degree % 2:
        raise ValueError("denominator is not a perfect square")
    # Newton-like synthetic extraction: assume monic-normalizable
    lead = p.coeffs[-1]
    half = p.degree // 2
    root_lead = ComplexScalar.of(lead.to_complex() ** 0.5) if not lead.exact else None
    if lead.exact:
        from fractions import Fraction

        if lead.im == 0 and lead.re > 0:
            rn, rd = _isqrt_exact(lead.re.numerator), _isqrt_exact(lead.re.denominator)
            if rn is not None and rd is not None:
                root_lead = ComplexScalar(Fraction(rn, rd))
    if root_lead is None:
        root_lead = ComplexScalar.of(lead.to_complex() ** 0.5)
    coeffs = [ComplexScalar(0)] * (half + 1)
    coeffs[half] = root_lead
    work = list(p.coeffs)
    for k in range(half - 1, -1, -1):
        # match coefficient of z^(k + half)
        acc = ComplexScalar(0)
        for j in range(k + 1, half):
            i = k + half - j
            if k < i <= half:
                acc = acc + coeffs[j] * coeffs[i]
        target = work[k + half] if k + half < len(work) else ComplexScalar(0)
        coeffs[k] = (target - acc) / (root_lead * ComplexScalar(2))
    cand = Polynomial(coeffs)
    if not (cand * cand - p).is_zero():
        sq = cand * cand
        diff = max(abs((a - b).to_complex()) for a, b in zip(sq.coeffs, p.coeffs)) if sq.degree == p.degree else 1.0
        if diff > 1e-9:
            raise ValueError("denominator is not a perfect square")
    return cand


def _isqrt_exact(n: int):
    import math

    r = math.isqrt(n)
    return r if r * r == n else None


def _run_recursion(source, truncation: int):
    chart = _Chart(source)
    q = chart.q_pp()
    s = {
        -1: _PP(Polynomial.one(), 0, 0),
        0: _PP(Polynomial.zero(), 0, 1),
        1: chart.scale(q, _MHALF),
    }
    for k in range(1, truncation):
        acc = chart.d_over_v(s[k])
        for j in range(0, k + 1):
            l = k - j
            tj, tl = s[j], s[l]
            if tj.is_zero() or tl.is_zero():
                continue
            acc = chart.add(acc, chart.mul(tj, tl))
        s[k + 1] = chart.scale(acc, _MHALF)
    return chart, q, s


def riccati_series(qd, truncation: int) -> HbarSeries:
    """Series terms s_-1 .. s_truncation over the given differential (cached).

    `qd` may be a QuadDiff or anything exposing a rational `q_scalar`.
    """
    if truncation < 1:
        raise TruncationTooLow("need truncation >= 1")
    cache = getattr(qd, "_riccati_cache", None)
    cached = cache.get("series") if cache is not None else None
    if cached is not None and cached.truncation >= truncation:
        if cached.truncation == truncation:
            return cached
        terms = [cached.term(k) for k in range(-1, truncation + 1)]
        return HbarSeries(qd.q_scalar if hasattr(qd, "q_scalar") else qd, -1, terms, truncation)

    chart, _, s = _run_recursion(qd, truncation)
    terms = [chart.to_term(s[k]) for k in range(-1, truncation + 1)]
    series = HbarSeries(chart.q_scalar, -1, terms, truncation)
    if cache is not None:
        cache["series"] = series
    return series


def riccati_residual(source, truncation: int) -> dict:
    """Residual of the Riccati equation order by order, exactly.

    Substituting the series truncated at `truncation` leaves, at each fully
    determined order m <= truncation - 1, the combination

        ds_m/v + sum_{j+l=m} s_j s_l + q delta_{m,0} - delta_{m,-2}

    and all of these must vanish identically.  Returns {order: is_zero}.
    """
    chart, q, s = _run_recursion(source, truncation)
    out = {}
    for m in range(-2, truncation):
        acc = _PP(Polynomial.zero(), 0, 0 if m % 2 else 1)
        if -1 <= m <= truncation:
            acc = chart.add(acc, chart.d_over_v(s[m]))
        for j in range(-1, m + 2):
            l = m - j
            if not (-1 <= l <= truncation and -1 <= j <= truncation):
                continue
            tj, tl = s[j], s[l]
            if tj.is_zero() or tl.is_zero():
                continue
            acc = chart.add(acc, chart.mul(tj, tl))
        if m == 0:
            acc = chart.add(acc, q)
        if m == -2:
            acc = chart.add(acc, _PP(Polynomial.one().scale(ComplexScalar(-1)), 0, 0))
        out[m] = acc.is_zero()
    return out


def assert_riccati_residual(qd, truncation: int) -> int:
    """Verify the residual vanishes exactly at all orders <= truncation.

    Runs the recursion one term past the requested truncation so that every
    order up to `truncation` is fully determined; returns the first order
    that is *not* checked (truncation + 1).
    """
    residual = riccati_residual(qd, truncation + 1)
    bad = [m for m, ok in residual.items() if not ok]
    if bad:
        raise AssertionError(f"Riccati residual fails to vanish at orders {bad}")
    return truncation + 1
