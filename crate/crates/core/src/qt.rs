//! Exact arithmetic in Z[q^{±1}, t^{±1}] and the fraction field Q(q,t).
//!
//! [`QtPoly`] is a Laurent polynomial in q and t with arbitrary-precision
//! integer coefficients.  [`QtRational`] is a fraction of two such
//! polynomials kept in canonical form: the Laurent shift is absorbed into the
//! numerator so the denominator is an honest polynomial, numerator and
//! denominator are coprime over Z[q,t], and the denominator's leading
//! coefficient under graded-lex order (total degree, then q) is positive.
//! Equality of canonical forms is therefore structural equality.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::Error;
use crate::Result;

/// Laurent polynomial in q, t over Z.  Maps (q-exponent, t-exponent) to a
/// nonzero coefficient.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct QtPoly {
    terms: BTreeMap<(i32, i32), BigInt>,
}

impl QtPoly {
    pub fn zero() -> Self {
        QtPoly::default()
    }

    pub fn one() -> Self {
        QtPoly::monomial(BigInt::one(), 0, 0)
    }

    /// The monomial `c * q^a * t^b`.
    pub fn monomial(c: BigInt, a: i32, b: i32) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert((a, b), c);
        }
        QtPoly { terms }
    }

    pub fn from_int(c: i64) -> Self {
        QtPoly::monomial(BigInt::from(c), 0, 0)
    }

    /// The variable q.
    pub fn q() -> Self {
        QtPoly::monomial(BigInt::one(), 1, 0)
    }

    /// The variable t.
    pub fn t() -> Self {
        QtPoly::monomial(BigInt::one(), 0, 1)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1
            && self
                .terms
                .get(&(0, 0))
                .map(|c| c.is_one())
                .unwrap_or(false)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(i32, i32), &BigInt)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn add_term(&mut self, exp: (i32, i32), c: &BigInt) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(exp).or_insert_with(BigInt::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&exp);
        }
    }

    pub fn add(&self, other: &QtPoly) -> QtPoly {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(*e, c);
        }
        out
    }

    pub fn neg(&self) -> QtPoly {
        QtPoly {
            terms: self.terms.iter().map(|(e, c)| (*e, -c)).collect(),
        }
    }

    pub fn sub(&self, other: &QtPoly) -> QtPoly {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &QtPoly) -> QtPoly {
        let mut out = QtPoly::zero();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                out.add_term((e1.0 + e2.0, e1.1 + e2.1), &(c1 * c2));
            }
        }
        out
    }

    pub fn mul_scalar(&self, c: &BigInt) -> QtPoly {
        if c.is_zero() {
            return QtPoly::zero();
        }
        QtPoly {
            terms: self.terms.iter().map(|(e, k)| (*e, k * c)).collect(),
        }
    }

    /// Multiply by the monomial q^a t^b.
    pub fn shift(&self, a: i32, b: i32) -> QtPoly {
        QtPoly {
            terms: self
                .terms
                .iter()
                .map(|(e, c)| ((e.0 + a, e.1 + b), c.clone()))
                .collect(),
        }
    }

    pub fn pow(&self, e: u32) -> QtPoly {
        let mut out = QtPoly::one();
        for _ in 0..e {
            out = out.mul(self);
        }
        out
    }

    /// Minimal (q, t) exponents over all terms; (0, 0) for the zero polynomial.
    pub fn min_exps(&self) -> (i32, i32) {
        if self.is_zero() {
            return (0, 0);
        }
        let a = self.terms.keys().map(|e| e.0).min().unwrap();
        let b = self.terms.keys().map(|e| e.1).min().unwrap();
        (a, b)
    }

    /// gcd of the integer coefficients (nonnegative).
    pub fn int_content(&self) -> BigInt {
        let mut g = BigInt::zero();
        for c in self.terms.values() {
            g = big_gcd(&g, c);
            if g.is_one() {
                break;
            }
        }
        g
    }

    /// Leading coefficient under graded-lex order (total degree, then q-degree).
    pub fn grlex_leading_coeff(&self) -> BigInt {
        self.terms
            .iter()
            .max_by_key(|(e, _)| (e.0 as i64 + e.1 as i64, e.0))
            .map(|(_, c)| c.clone())
            .unwrap_or_else(BigInt::zero)
    }

    /// Exact evaluation at rational q0, t0.  Negative exponents require the
    /// corresponding value to be nonzero.
    pub fn eval(&self, q0: &BigRational, t0: &BigRational) -> Result<BigRational> {
        let mut acc = BigRational::zero();
        for (e, c) in &self.terms {
            let term = rat_pow(q0, e.0)?.checked_mul_ref(&rat_pow(t0, e.1)?)?;
            acc += BigRational::from(c.clone()) * term;
        }
        Ok(acc)
    }

    /// Swap the roles of q and t.
    pub fn swap_qt(&self) -> QtPoly {
        QtPoly {
            terms: self.terms.iter().map(|(e, c)| ((e.1, e.0), c.clone())).collect(),
        }
    }

    /// True when no term involves t.
    pub fn is_q_only(&self) -> bool {
        self.terms.keys().all(|e| e.1 == 0)
    }

    fn to_qpoly(&self) -> QPoly {
        debug_assert!(self.min_exps() >= (0, 0) || self.is_zero());
        let dq = self.terms.keys().map(|e| e.0).max().unwrap_or(0) as usize;
        let mut out: QPoly = vec![Vec::new(); dq + 1];
        for (e, c) in &self.terms {
            let (a, b) = (*e, c);
            let zp = &mut out[a.0 as usize];
            if zp.len() <= a.1 as usize {
                zp.resize(a.1 as usize + 1, BigInt::zero());
            }
            zp[a.1 as usize] = b.clone();
        }
        qp_trim(&mut out);
        out
    }

    fn from_qpoly(p: &QPoly) -> QtPoly {
        let mut out = QtPoly::zero();
        for (a, zp) in p.iter().enumerate() {
            for (b, c) in zp.iter().enumerate() {
                out.add_term((a as i32, b as i32), c);
            }
        }
        out
    }
}

trait CheckedMulRef {
    fn checked_mul_ref(self, other: &BigRational) -> Result<BigRational>;
}

impl CheckedMulRef for BigRational {
    fn checked_mul_ref(self, other: &BigRational) -> Result<BigRational> {
        Ok(self * other)
    }
}

fn rat_pow(base: &BigRational, e: i32) -> Result<BigRational> {
    if e == 0 {
        return Ok(BigRational::one());
    }
    if base.is_zero() && e < 0 {
        return Err(Error::SingularPoint(
            "negative power of zero during evaluation".into(),
        ));
    }
    let mut acc = BigRational::one();
    let b = if e > 0 {
        base.clone()
    } else {
        base.recip()
    };
    for _ in 0..e.unsigned_abs() {
        acc *= &b;
    }
    Ok(acc)
}

// ---------------------------------------------------------------------------
// gcd over Z[q,t], implemented via primitive pseudo-remainder sequences in
// (Z[t])[q].

/// Dense polynomial in t over Z: coefficient of t^i at index i.
type ZPoly = Vec<BigInt>;
/// Dense polynomial in q over Z[t].
type QPoly = Vec<ZPoly>;

fn zp_trim(p: &mut ZPoly) {
    while p.last().map(|c| c.is_zero()).unwrap_or(false) {
        p.pop();
    }
}

fn zp_is_zero(p: &ZPoly) -> bool {
    p.is_empty()
}

fn zp_mul(a: &ZPoly, b: &ZPoly) -> ZPoly {
    if zp_is_zero(a) || zp_is_zero(b) {
        return Vec::new();
    }
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    let mut out = out;
    zp_trim(&mut out);
    out
}

fn zp_sub(a: &ZPoly, b: &ZPoly) -> ZPoly {
    let mut out = a.clone();
    if out.len() < b.len() {
        out.resize(b.len(), BigInt::zero());
    }
    for (i, y) in b.iter().enumerate() {
        out[i] -= y;
    }
    zp_trim(&mut out);
    out
}

fn zp_int_content(p: &ZPoly) -> BigInt {
    let mut g = BigInt::zero();
    for c in p {
        g = big_gcd(&g, c);
        if g.is_one() {
            break;
        }
    }
    g
}

fn big_gcd(a: &BigInt, b: &BigInt) -> BigInt {
    let mut a = a.abs();
    let mut b = b.abs();
    while !b.is_zero() {
        let r = &a % &b;
        a = b;
        b = r;
    }
    a
}

fn zp_div_int_exact(p: &ZPoly, d: &BigInt) -> ZPoly {
    p.iter().map(|c| c / d).collect()
}

/// Exact division in Z[t]; panics if the division is not exact (internal use
/// on known divisors only).
fn zp_divexact(a: &ZPoly, b: &ZPoly) -> ZPoly {
    assert!(!zp_is_zero(b), "division by zero polynomial");
    if zp_is_zero(a) {
        return Vec::new();
    }
    let mut rem = a.clone();
    let mut quo = vec![BigInt::zero(); a.len().saturating_sub(b.len()) + 1];
    let lb = b.last().unwrap().clone();
    while !zp_is_zero(&rem) && rem.len() >= b.len() {
        let lr = rem.last().unwrap();
        let (c, r) = num_integer::Integer::div_rem(lr, &lb);
        assert!(r.is_zero(), "inexact coefficient division in Z[t]");
        let k = rem.len() - b.len();
        quo[k] = c.clone();
        for (i, y) in b.iter().enumerate() {
            rem[k + i] -= &c * y;
        }
        zp_trim(&mut rem);
    }
    assert!(zp_is_zero(&rem), "inexact division in Z[t]");
    zp_trim(&mut quo);
    quo
}

/// Primitive-PRS gcd over Z[t], including the integer content.
fn zp_gcd(a: &ZPoly, b: &ZPoly) -> ZPoly {
    if zp_is_zero(a) {
        return zp_make_positive(b.clone());
    }
    if zp_is_zero(b) {
        return zp_make_positive(a.clone());
    }
    let ca = zp_int_content(a);
    let cb = zp_int_content(b);
    let cg = big_gcd(&ca, &cb);
    let mut f = zp_div_int_exact(a, &ca);
    let mut g = zp_div_int_exact(b, &cb);
    if f.len() < g.len() {
        std::mem::swap(&mut f, &mut g);
    }
    while !zp_is_zero(&g) {
        // pseudo-remainder: lc(g)^(deg f - deg g + 1) * f mod g
        let mut rem = f.clone();
        let lg = g.last().unwrap().clone();
        while !zp_is_zero(&rem) && rem.len() >= g.len() {
            let lr = rem.last().unwrap().clone();
            let k = rem.len() - g.len();
            rem = rem.iter().map(|c| c * &lg).collect();
            for (i, y) in g.iter().enumerate() {
                rem[k + i] -= &lr * y;
            }
            zp_trim(&mut rem);
        }
        let c = zp_int_content(&rem);
        if !c.is_zero() && !c.is_one() {
            rem = zp_div_int_exact(&rem, &c);
        }
        f = g;
        g = rem;
    }
    let mut out: ZPoly = f.iter().map(|c| c * &cg).collect();
    out = zp_make_positive(out);
    zp_trim(&mut out);
    out
}

fn zp_make_positive(mut p: ZPoly) -> ZPoly {
    if p.last().map(|c| c.is_negative()).unwrap_or(false) {
        for c in &mut p {
            *c = -&*c;
        }
    }
    p
}

fn qp_trim(p: &mut QPoly) {
    for zp in p.iter_mut() {
        zp_trim(zp);
    }
    while p.last().map(zp_is_zero).unwrap_or(false) {
        p.pop();
    }
}

fn qp_is_zero(p: &QPoly) -> bool {
    p.is_empty()
}

/// Content of a QPoly with respect to q: the Z[t]-gcd of its coefficients.
fn qp_content(p: &QPoly) -> ZPoly {
    let mut g: ZPoly = Vec::new();
    for zp in p {
        if zp_is_zero(zp) {
            continue;
        }
        g = zp_gcd(&g, zp);
        if g.len() == 1 && g[0].is_one() {
            break;
        }
    }
    g
}

fn qp_div_zp_exact(p: &QPoly, d: &ZPoly) -> QPoly {
    p.iter()
        .map(|zp| if zp_is_zero(zp) { Vec::new() } else { zp_divexact(zp, d) })
        .collect()
}

fn qp_mul_zp(p: &QPoly, m: &ZPoly) -> QPoly {
    p.iter().map(|zp| zp_mul(zp, m)).collect()
}

fn zp_eval(p: &ZPoly, x: &BigInt) -> BigInt {
    let mut acc = BigInt::zero();
    for c in p.iter().rev() {
        acc = acc * x + c;
    }
    acc
}

fn zp_deg(p: &ZPoly) -> i64 {
    p.len() as i64 - 1
}

/// Evaluate a QPoly at t = t0, leaving a univariate polynomial in q.
fn qp_eval_t(f: &QPoly, t0: &BigInt) -> ZPoly {
    let mut out: ZPoly = f.iter().map(|zp| zp_eval(zp, t0)).collect();
    zp_trim(&mut out);
    out
}

fn qp_deg_t(f: &QPoly) -> i64 {
    f.iter().map(|zp| zp_deg(zp)).max().unwrap_or(-1)
}

/// Exact division in (Z[t])[q] that reports failure instead of panicking.
fn qp_try_divexact(a: &QPoly, b: &QPoly) -> Option<QPoly> {
    if qp_is_zero(b) {
        return None;
    }
    if qp_is_zero(a) {
        return Some(Vec::new());
    }
    let mut rem = a.clone();
    let mut quo: QPoly = Vec::new();
    let lb = b.last().unwrap();
    loop {
        qp_trim(&mut rem);
        if qp_is_zero(&rem) {
            break;
        }
        if rem.len() < b.len() {
            return None;
        }
        let lr = rem.last().unwrap();
        let c = zp_try_divexact(lr, lb)?;
        let k = rem.len() - b.len();
        if quo.len() <= k {
            quo.resize(k + 1, Vec::new());
        }
        quo[k] = c.clone();
        for (i, y) in b.iter().enumerate() {
            rem[k + i] = zp_sub(&rem[k + i], &zp_mul(&c, y));
        }
    }
    qp_trim(&mut quo);
    Some(quo)
}

fn zp_try_divexact(a: &ZPoly, b: &ZPoly) -> Option<ZPoly> {
    if zp_is_zero(b) {
        return None;
    }
    if zp_is_zero(a) {
        return Some(Vec::new());
    }
    if a.len() < b.len() {
        return None;
    }
    let mut rem = a.clone();
    let mut quo = vec![BigInt::zero(); a.len() - b.len() + 1];
    let lb = b.last().unwrap().clone();
    while !zp_is_zero(&rem) {
        if rem.len() < b.len() {
            return None;
        }
        let lr = rem.last().unwrap();
        let (c, r) = num_integer::Integer::div_rem(lr, &lb);
        if !r.is_zero() {
            return None;
        }
        let k = rem.len() - b.len();
        quo[k] = c.clone();
        for (i, y) in b.iter().enumerate() {
            rem[k + i] -= &c * y;
        }
        zp_trim(&mut rem);
    }
    zp_trim(&mut quo);
    Some(quo)
}

/// Brown-style gcd of q-primitive polynomials in (Z[t])[q]: interpolate the
/// gcd from univariate images at integer values of t, then confirm by exact
/// division.  Returns None when too many evaluation points fail, in which
/// case the caller falls back to the pseudo-remainder sequence.
fn qp_gcd_modular(f: &QPoly, g: &QPoly) -> Option<QPoly> {
    let lc_f = f.last().unwrap().clone();
    let lc_g = g.last().unwrap().clone();
    let gamma = zp_gcd(&lc_f, &lc_g);
    let dt_bound = qp_deg_t(f).min(qp_deg_t(g)) + zp_deg(&gamma);
    let needed = (dt_bound + 1).max(1) as usize;

    let mut points: Vec<BigRational> = Vec::new();
    // per point: coefficients of the gamma-scaled monic image, in Q
    let mut images: Vec<Vec<BigRational>> = Vec::new();
    let mut cur_deg: Option<usize> = None;
    let mut tried = 0usize;
    while images.len() < needed {
        if tried > 8 * needed + 32 {
            return None;
        }
        // walk 0, 1, -1, 2, -2, ...
        let k = tried as i64;
        tried += 1;
        let candidate_point = if k == 0 {
            BigInt::zero()
        } else if k % 2 == 1 {
            BigInt::from((k + 1) / 2)
        } else {
            BigInt::from(-k / 2)
        };
        if zp_eval(&lc_f, &candidate_point).is_zero()
            || zp_eval(&lc_g, &candidate_point).is_zero()
        {
            continue;
        }
        let fbar = qp_eval_t(f, &candidate_point);
        let gbar = qp_eval_t(g, &candidate_point);
        let ubar = zp_gcd(&fbar, &gbar);
        let dq = zp_deg(&ubar);
        if dq == 0 {
            // coprime primitive parts
            return Some(vec![vec![BigInt::one()]]);
        }
        let dq = dq as usize;
        match cur_deg {
            Some(d) if dq > d => continue, // unlucky point
            Some(d) if dq < d => {
                points.clear();
                images.clear();
                cur_deg = Some(dq);
            }
            None => cur_deg = Some(dq),
            _ => {}
        }
        // scale to leading coefficient gamma(t0)
        let scale = BigRational::new(zp_eval(&gamma, &candidate_point), ubar.last().unwrap().clone());
        let mut img: Vec<BigRational> =
            ubar.iter().map(|c| BigRational::from(c.clone()) * &scale).collect();
        img.resize(dq + 1, BigRational::zero());
        points.push(BigRational::from(candidate_point));
        images.push(img);
    }

    // Lagrange interpolation of each q-coefficient as a polynomial in t
    let npts = points.len();
    let dq = cur_deg.unwrap();
    let mut coeffs_t: Vec<Vec<BigRational>> = vec![vec![BigRational::zero(); npts]; dq + 1];
    for qi in 0..=dq {
        let values: Vec<BigRational> = images.iter().map(|img| img[qi].clone()).collect();
        coeffs_t[qi] = lagrange(&points, &values);
    }
    // clear denominators across everything
    let mut denom = BigInt::one();
    for row in &coeffs_t {
        for c in row {
            denom = &denom / big_gcd(&denom, c.denom()) * c.denom();
        }
    }
    let mut cand: QPoly = coeffs_t
        .iter()
        .map(|row| {
            let mut zp: ZPoly = row
                .iter()
                .map(|c| c.numer() * (&denom / c.denom()))
                .collect();
            zp_trim(&mut zp);
            zp
        })
        .collect();
    qp_trim(&mut cand);
    if qp_is_zero(&cand) {
        return None;
    }
    // primitive part in q
    let cont = qp_content(&cand);
    let cand = qp_div_zp_exact(&cand, &cont);
    if qp_try_divexact(f, &cand).is_some() && qp_try_divexact(g, &cand).is_some() {
        Some(cand)
    } else {
        None
    }
}

fn lagrange(xs: &[BigRational], ys: &[BigRational]) -> Vec<BigRational> {
    let n = xs.len();
    let mut out = vec![BigRational::zero(); n];
    for i in 0..n {
        // basis polynomial prod_{j != i} (x - x_j) / (x_i - x_j)
        let mut basis = vec![BigRational::zero(); n];
        basis[0] = BigRational::one();
        let mut deg = 0usize;
        let mut denom = BigRational::one();
        for (j, xj) in xs.iter().enumerate() {
            if j == i {
                continue;
            }
            // multiply by (x - x_j)
            for k in (0..=deg).rev() {
                let v = basis[k].clone();
                basis[k + 1] += &v;
                basis[k] = -(v * xj);
            }
            deg += 1;
            denom *= &xs[i] - xj;
        }
        let w = &ys[i] / denom;
        for k in 0..=deg {
            let add = &basis[k] * &w;
            out[k] += add;
        }
    }
    out
}

/// Pseudo-remainder of f by g in (Z[t])[q].
fn qp_pseudo_rem(f: &QPoly, g: &QPoly) -> QPoly {
    let mut rem = f.clone();
    let lg = g.last().unwrap().clone();
    loop {
        qp_trim(&mut rem);
        if qp_is_zero(&rem) || rem.len() < g.len() {
            break;
        }
        let lr = rem.last().unwrap().clone();
        let k = rem.len() - g.len();
        rem = qp_mul_zp(&rem, &lg);
        for (i, y) in g.iter().enumerate() {
            rem[k + i] = zp_sub(&rem[k + i], &zp_mul(&lr, y));
        }
    }
    rem
}

/// gcd over Z[q,t] of two honest polynomials (min exponents >= 0), including
/// integer and Z[t] contents.
fn qt_gcd_poly(a: &QtPoly, b: &QtPoly) -> QtPoly {
    if a.is_zero() {
        return b.clone();
    }
    if b.is_zero() {
        return a.clone();
    }
    // fast paths: units and single monomials reduce to contents
    if a.is_one() || b.is_one() {
        return QtPoly::one();
    }
    if a.num_terms() == 1 || b.num_terms() == 1 {
        let g = big_gcd(&a.int_content(), &b.int_content());
        let (aq, at) = a.min_exps();
        let (bq, bt) = b.min_exps();
        return QtPoly::monomial(g, aq.min(bq), at.min(bt));
    }
    if a == b {
        return if a.grlex_leading_coeff().is_negative() {
            a.neg()
        } else {
            a.clone()
        };
    }
    let fa = a.to_qpoly();
    let fb = b.to_qpoly();
    let ca = qp_content(&fa);
    let cb = qp_content(&fb);
    let cg = zp_gcd(&ca, &cb);
    let mut f = qp_div_zp_exact(&fa, &ca);
    let mut g = qp_div_zp_exact(&fb, &cb);
    if f.len() < g.len() {
        std::mem::swap(&mut f, &mut g);
    }
    if f.len() > 1 && g.len() > 1 {
        if let Some(pp) = qp_gcd_modular(&f, &g) {
            return QtPoly::from_qpoly(&qp_mul_zp(&pp, &cg));
        }
    }
    while !qp_is_zero(&g) {
        let mut rem = qp_pseudo_rem(&f, &g);
        qp_trim(&mut rem);
        if !qp_is_zero(&rem) {
            let c = qp_content(&rem);
            rem = qp_div_zp_exact(&rem, &c);
        }
        f = g;
        g = rem;
    }
    let out = qp_mul_zp(&f, &cg);
    QtPoly::from_qpoly(&out)
}

/// Exact division in Z[q,t]; panics if not exact (callers divide by a known
/// divisor such as a gcd).
fn qt_divexact_poly(a: &QtPoly, b: &QtPoly) -> QtPoly {
    assert!(!b.is_zero(), "division by zero polynomial");
    if a.is_zero() {
        return QtPoly::zero();
    }
    let fa = a.to_qpoly();
    let fb = b.to_qpoly();
    let mut rem = fa;
    let mut quo: QPoly = Vec::new();
    let lb = fb.last().unwrap();
    loop {
        qp_trim(&mut rem);
        if qp_is_zero(&rem) {
            break;
        }
        assert!(rem.len() >= fb.len(), "inexact division in Z[q,t]");
        let lr = rem.last().unwrap();
        let c = zp_divexact(lr, lb);
        let k = rem.len() - fb.len();
        if quo.len() <= k {
            quo.resize(k + 1, Vec::new());
        }
        quo[k] = c.clone();
        for (i, y) in fb.iter().enumerate() {
            rem[k + i] = zp_sub(&rem[k + i], &zp_mul(&c, y));
        }
    }
    qp_trim(&mut quo);
    QtPoly::from_qpoly(&quo)
}

// ---------------------------------------------------------------------------

/// Element of Q(q,t) in canonical form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QtRational {
    num: QtPoly,
    den: QtPoly,
}

impl Default for QtRational {
    fn default() -> Self {
        QtRational::zero()
    }
}

impl QtRational {
    pub fn zero() -> Self {
        QtRational {
            num: QtPoly::zero(),
            den: QtPoly::one(),
        }
    }

    pub fn one() -> Self {
        QtRational {
            num: QtPoly::one(),
            den: QtPoly::one(),
        }
    }

    pub fn q() -> Self {
        QtPoly::q().into()
    }

    pub fn t() -> Self {
        QtPoly::t().into()
    }

    pub fn from_int(c: i64) -> Self {
        QtPoly::from_int(c).into()
    }

    /// The monomial `c * q^a * t^b` (Laurent exponents allowed).
    pub fn monomial(c: i64, a: i32, b: i32) -> Self {
        QtPoly::monomial(BigInt::from(c), a, b).into()
    }

    /// Build a fraction and put it in canonical form.
    pub fn new(num: QtPoly, den: QtPoly) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Self::canonical(num, den))
    }

    fn canonical(num: QtPoly, den: QtPoly) -> Self {
        debug_assert!(!den.is_zero());
        if num.is_zero() {
            return QtRational::zero();
        }
        // Normalize Laurent shifts: make both parts honest polynomials with
        // min exponents zero, remembering the net monomial on the numerator.
        let (an, bn) = num.min_exps();
        let (ad, bd) = den.min_exps();
        let num_p = num.shift(-an, -bn);
        let den_p = den.shift(-ad, -bd);
        let g = qt_gcd_poly(&num_p, &den_p);
        let (mut num_r, mut den_r) = if g.is_one() {
            (num_p, den_p)
        } else {
            (qt_divexact_poly(&num_p, &g), qt_divexact_poly(&den_p, &g))
        };
        if den_r.grlex_leading_coeff().is_negative() {
            num_r = num_r.neg();
            den_r = den_r.neg();
        }
        QtRational {
            num: num_r.shift(an - ad, bn - bd),
            den: den_r,
        }
    }

    pub fn numer(&self) -> &QtPoly {
        &self.num
    }

    pub fn denom(&self) -> &QtPoly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num.is_one() && self.den.is_one()
    }

    /// True when the canonical form has denominator 1 (value in Z[q^{±1},t^{±1}]).
    pub fn is_polynomial(&self) -> bool {
        self.den.is_one()
    }

    /// Addition on canonical inputs: only the gcd of the two (already
    /// reduced) denominators and one small follow-up gcd are computed.
    pub fn add(&self, other: &QtRational) -> QtRational {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        if self.den.is_one() && other.den.is_one() {
            return QtRational {
                num: self.num.add(&other.num),
                den: QtPoly::one(),
            };
        }
        let common = qt_gcd_poly(&self.den, &other.den);
        if common.is_one() {
            // the sum is automatically reduced
            let num = self.num.mul(&other.den).add(&other.num.mul(&self.den));
            if num.is_zero() {
                return QtRational::zero();
            }
            return QtRational {
                num,
                den: self.den.mul(&other.den),
            };
        }
        let da = qt_divexact_poly(&self.den, &common);
        let db = qt_divexact_poly(&other.den, &common);
        let num = self.num.mul(&db).add(&other.num.mul(&da));
        if num.is_zero() {
            return QtRational::zero();
        }
        // only the shared factor can still cancel
        let (an, bn) = num.min_exps();
        let num_p = num.shift(-an, -bn);
        let g = qt_gcd_poly(&num_p, &common);
        let (num_r, common_r) = if g.is_one() {
            (num_p, common)
        } else {
            (qt_divexact_poly(&num_p, &g), qt_divexact_poly(&common, &g))
        };
        let mut out = QtRational {
            num: num_r.shift(an, bn),
            den: da.mul(&db).mul(&common_r),
        };
        if out.den.grlex_leading_coeff().is_negative() {
            out.num = out.num.neg();
            out.den = out.den.neg();
        }
        out
    }

    pub fn sub(&self, other: &QtRational) -> QtRational {
        self.add(&other.neg())
    }

    /// Multiplication on canonical inputs via cross-cancellation; no gcd of
    /// the full product is ever taken.
    pub fn mul(&self, other: &QtRational) -> QtRational {
        if self.is_zero() || other.is_zero() {
            return QtRational::zero();
        }
        let (an, bn) = self.num.min_exps();
        let (cn, dn) = other.num.min_exps();
        let na = self.num.shift(-an, -bn);
        let nb = other.num.shift(-cn, -dn);
        let g1 = qt_gcd_poly(&na, &other.den);
        let g2 = qt_gcd_poly(&nb, &self.den);
        let na = if g1.is_one() { na } else { qt_divexact_poly(&na, &g1) };
        let nb = if g2.is_one() { nb } else { qt_divexact_poly(&nb, &g2) };
        let da = if g2.is_one() {
            self.den.clone()
        } else {
            qt_divexact_poly(&self.den, &g2)
        };
        let db = if g1.is_one() {
            other.den.clone()
        } else {
            qt_divexact_poly(&other.den, &g1)
        };
        let mut out = QtRational {
            num: na.mul(&nb).shift(an + cn, bn + dn),
            den: da.mul(&db),
        };
        if out.den.grlex_leading_coeff().is_negative() {
            out.num = out.num.neg();
            out.den = out.den.neg();
        }
        out
    }

    pub fn neg(&self) -> QtRational {
        QtRational {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn try_div(&self, other: &QtRational) -> Result<QtRational> {
        if other.is_zero() {
            return Err(Error::DivisionByZero);
        }
        // flip the canonical divisor: its parts are already coprime
        let (an, bn) = other.num.min_exps();
        let mut flipped = QtRational {
            num: other.den.shift(-an, -bn),
            den: other.num.shift(-an, -bn),
        };
        if flipped.den.grlex_leading_coeff().is_negative() {
            flipped.num = flipped.num.neg();
            flipped.den = flipped.den.neg();
        }
        Ok(self.mul(&flipped))
    }

    pub fn inverse(&self) -> Result<QtRational> {
        QtRational::one().try_div(self)
    }

    /// Integer power; negative exponents invert (error on zero base).
    pub fn pow(&self, e: i64) -> Result<QtRational> {
        if e < 0 {
            return self.inverse()?.pow(-e);
        }
        let mut acc = QtRational::one();
        for _ in 0..e {
            acc = acc.mul(self);
        }
        Ok(acc)
    }

    /// Exact value at rational (q0, t0); errors when the denominator vanishes.
    pub fn eval_at(&self, q0: &BigRational, t0: &BigRational) -> Result<BigRational> {
        let d = self.den.eval(q0, t0)?;
        if d.is_zero() {
            return Err(Error::SingularPoint(format!(
                "denominator {} vanishes at ({}, {})",
                self.den, q0, t0
            )));
        }
        Ok(self.num.eval(q0, t0)? / d)
    }

    pub fn swap_qt(&self) -> QtRational {
        QtRational::canonical(self.num.swap_qt(), self.den.swap_qt())
    }

    /// The constants M = (1-q)(1-t) and M-hat = (1 - 1/(qt)) M.
    pub fn constants() -> (QtRational, QtRational) {
        let one = QtRational::one();
        let m = one.sub(&QtRational::q()).mul(&one.sub(&QtRational::t()));
        let qt_inv = QtRational::monomial(1, -1, -1);
        let mhat = one.sub(&qt_inv).mul(&m);
        (m, mhat)
    }
}

impl From<QtPoly> for QtRational {
    fn from(p: QtPoly) -> Self {
        QtRational {
            num: p,
            den: QtPoly::one(),
        }
    }
}

impl std::ops::Add for &QtRational {
    type Output = QtRational;
    fn add(self, rhs: &QtRational) -> QtRational {
        QtRational::add(self, rhs)
    }
}

impl std::ops::Sub for &QtRational {
    type Output = QtRational;
    fn sub(self, rhs: &QtRational) -> QtRational {
        QtRational::sub(self, rhs)
    }
}

impl std::ops::Mul for &QtRational {
    type Output = QtRational;
    fn mul(self, rhs: &QtRational) -> QtRational {
        QtRational::mul(self, rhs)
    }
}

impl std::ops::Neg for &QtRational {
    type Output = QtRational;
    fn neg(self) -> QtRational {
        QtRational::neg(self)
    }
}

// ---------------------------------------------------------------------------
// Textual rendering: `(-1)*q^-4*t^-1 + 2*q*t`, with rationals printed as
// `(num)/(den)`.  Round-trips through the parser.

impl fmt::Display for QtPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        // print with q major: constants, then q, then t, then mixed
        let mut ordered: Vec<(&(i32, i32), &BigInt)> = self.terms.iter().collect();
        ordered.sort_by_key(|(e, _)| (e.1, e.0));
        let mut first = true;
        for (e, c) in ordered {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let mut factors: Vec<String> = Vec::new();
            if c.is_negative() {
                factors.push(format!("({})", c));
            } else if !c.is_one() || (e.0 == 0 && e.1 == 0) {
                factors.push(format!("{}", c));
            }
            if e.0 != 0 {
                factors.push(if e.0 == 1 { "q".into() } else { format!("q^{}", e.0) });
            }
            if e.1 != 0 {
                factors.push(if e.1 == 1 { "t".into() } else { format!("t^{}", e.1) });
            }
            if factors.is_empty() {
                factors.push("1".into());
            }
            write!(f, "{}", factors.join("*"))?;
        }
        Ok(())
    }
}

impl fmt::Display for QtRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({})/({})", self.num, self.den)
        }
    }
}

struct Lexer<'a> {
    s: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(s: &'a str) -> Self {
        Lexer { s: s.as_bytes(), pos: 0 }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let c = self.peek();
        if c.is_some() {
            self.pos += 1;
        }
        c
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        match self.bump() {
            Some(x) if x == c => Ok(()),
            other => Err(Error::Parse(format!(
                "expected '{}', found {:?}",
                c as char,
                other.map(|b| b as char)
            ))),
        }
    }

    fn integer(&mut self) -> Result<BigInt> {
        self.skip_ws();
        let start = self.pos;
        if self.s.get(self.pos) == Some(&b'-') || self.s.get(self.pos) == Some(&b'+') {
            self.pos += 1;
        }
        let digits_start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == digits_start {
            return Err(Error::Parse("expected integer".into()));
        }
        let text = std::str::from_utf8(&self.s[start..self.pos]).unwrap();
        BigInt::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }
}

fn parse_exponent(lex: &mut Lexer) -> Result<i32> {
    if lex.peek() == Some(b'^') {
        lex.bump();
        let e = lex.integer()?;
        i32::try_from(&e).map_err(|_| Error::Parse("exponent out of range".into()))
    } else {
        Ok(1)
    }
}

/// term := factor ('*' factor)*, factor := int | '(' int ')' | q[^e] | t[^e]
fn parse_term(lex: &mut Lexer) -> Result<(BigInt, i32, i32)> {
    let mut coeff = BigInt::one();
    let (mut qe, mut te) = (0i32, 0i32);
    loop {
        match lex.peek() {
            Some(b'(') => {
                lex.bump();
                coeff *= lex.integer()?;
                lex.expect(b')')?;
            }
            Some(b'q') => {
                lex.bump();
                qe += parse_exponent(lex)?;
            }
            Some(b't') => {
                lex.bump();
                te += parse_exponent(lex)?;
            }
            Some(c) if c.is_ascii_digit() || c == b'-' => {
                coeff *= lex.integer()?;
            }
            other => {
                return Err(Error::Parse(format!(
                    "unexpected {:?} in term",
                    other.map(|b| b as char)
                )))
            }
        }
        if lex.peek() == Some(b'*') {
            lex.bump();
        } else {
            break;
        }
    }
    Ok((coeff, qe, te))
}

fn parse_poly(lex: &mut Lexer) -> Result<QtPoly> {
    let mut out = QtPoly::zero();
    loop {
        let mut sign = BigInt::one();
        // unary +/- before a term (also allows '- q' etc.)
        while let Some(c) = lex.peek() {
            if c == b'+' {
                lex.bump();
            } else if c == b'-' {
                // Look ahead: treat as sign only if not the start of an integer;
                // parse_term handles "-3" itself.
                let save = lex.pos;
                lex.bump();
                if lex.peek().map(|c| c.is_ascii_digit()).unwrap_or(false) {
                    lex.pos = save;
                } else {
                    sign = -sign;
                }
                break;
            } else {
                break;
            }
        }
        let (c, qe, te) = parse_term(lex)?;
        out.add_term((qe, te), &(sign * c));
        match lex.peek() {
            Some(b'+') | Some(b'-') => continue,
            _ => break,
        }
    }
    Ok(out)
}

impl FromStr for QtPoly {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let mut lex = Lexer::new(s);
        let p = parse_poly(&mut lex)?;
        if lex.peek().is_some() {
            return Err(Error::Parse(format!("trailing input in '{}'", s)));
        }
        Ok(p)
    }
}

impl FromStr for QtRational {
    type Err = Error;

    /// Accepts either a bare polynomial or `(num)/(den)`.
    fn from_str(s: &str) -> Result<Self> {
        let mut lex = Lexer::new(s);
        // Try the fraction form first: '(' poly ')' '/' '(' poly ')'.
        if lex.peek() == Some(b'(') {
            let save = lex.pos;
            lex.bump();
            if let Ok(num) = parse_poly(&mut lex) {
                if lex.peek() == Some(b')') {
                    lex.bump();
                    if lex.peek() == Some(b'/') {
                        lex.bump();
                        lex.expect(b'(')?;
                        let den = parse_poly(&mut lex)?;
                        lex.expect(b')')?;
                        if lex.peek().is_some() {
                            return Err(Error::Parse(format!("trailing input in '{}'", s)));
                        }
                        return QtRational::new(num, den);
                    }
                }
            }
            lex.pos = save;
        }
        let p = parse_poly(&mut lex)?;
        if lex.peek().is_some() {
            return Err(Error::Parse(format!("trailing input in '{}'", s)));
        }
        Ok(p.into())
    }
}
