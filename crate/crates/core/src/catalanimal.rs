//! Catalanimals: symmetric rational functions cut out by a weight and three
//! positive-root subsets of GL_l.
//!
//! Provides the LLT constructions (plain and m-stretched), tameness and
//! cuddliness verification with tight-subset reports, restriction and join,
//! exact numeric evaluation of the three associated functions H, phi, g and
//! of the shuffle product, wheel-condition testing, the exact principal
//! specialization of phi, the polynomial part of the raising-operator
//! series, and the full cub-verification procedure.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::llt::llt;
use crate::par;
use crate::partition::Partition;
use crate::qt::{QtPoly, QtRational};
use crate::shapes::{b_vector, SkewTuple, StretchSpec};
use crate::symfunc::{Basis, QtAlphabet, SymFunc};
use crate::Result;

/// A subset of the positive roots alpha_{ij} (1 <= i < j <= l), stored as
/// one bitmask per row.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootSet {
    l: usize,
    rows: Vec<u32>,
}

impl RootSet {
    pub fn new(l: usize) -> Self {
        assert!(l <= 31, "root sets support length <= 31");
        RootSet {
            l,
            rows: vec![0; l],
        }
    }

    pub fn full(l: usize) -> Self {
        let mut s = RootSet::new(l);
        for i in 1..=l {
            for j in (i + 1)..=l {
                s.insert(i, j);
            }
        }
        s
    }

    pub fn len(&self) -> usize {
        self.rows.iter().map(|r| r.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.iter().all(|&r| r == 0)
    }

    /// Insert alpha_{ij}; indices are 1-based with i < j.
    pub fn insert(&mut self, i: usize, j: usize) {
        assert!(1 <= i && i < j && j <= self.l);
        self.rows[i - 1] |= 1 << (j - 1);
    }

    pub fn remove(&mut self, i: usize, j: usize) {
        assert!(1 <= i && i < j && j <= self.l);
        self.rows[i - 1] &= !(1 << (j - 1));
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        i < j && j <= self.l && self.rows[i - 1] >> (j - 1) & 1 == 1
    }

    pub fn iter(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 1..=self.l {
            for j in (i + 1)..=self.l {
                if self.contains(i, j) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    pub fn is_subset_of(&self, other: &RootSet) -> bool {
        self.rows.iter().zip(&other.rows).all(|(a, b)| a & !b == 0)
    }

    /// [A, B] = R_+ intersect (A + B): roots alpha_{ik} that split as
    /// alpha_{ij} + alpha_{jk} with one summand in each set.
    pub fn bracket(a: &RootSet, b: &RootSet) -> RootSet {
        let l = a.l;
        let mut out = RootSet::new(l);
        for i in 1..=l {
            for j in (i + 1)..=l {
                for k in (j + 1)..=l {
                    if (a.contains(i, j) && b.contains(j, k))
                        || (b.contains(i, j) && a.contains(j, k))
                    {
                        out.insert(i, k);
                    }
                }
            }
        }
        out
    }

    /// Number of roots with i in the mask and j outside it.
    fn count_cross(&self, imask: u32) -> i64 {
        let mut out = 0i64;
        for i in 0..self.l {
            if imask >> i & 1 == 1 {
                out += (self.rows[i] & !imask).count_ones() as i64;
            }
        }
        out
    }

    /// Coordinate sum of the roots counted by `count_cross`.
    fn sum_cross(&self, imask: u32) -> Vec<i64> {
        let mut out = vec![0i64; self.l];
        for i in 0..self.l {
            if imask >> i & 1 == 0 {
                continue;
            }
            let mut rest = self.rows[i] & !imask;
            while rest != 0 {
                let j = rest.trailing_zeros() as usize;
                out[i] += 1;
                out[j] -= 1;
                rest &= rest - 1;
            }
        }
        out
    }

    /// Restriction A|_I through the increasing bijection [k] -> I.
    fn restrict(&self, indices: &[usize]) -> RootSet {
        let mut out = RootSet::new(indices.len());
        for (a, &i) in indices.iter().enumerate() {
            for (b, &j) in indices.iter().enumerate().skip(a + 1) {
                if self.contains(i, j) {
                    out.insert(a + 1, b + 1);
                }
            }
        }
        out
    }

    /// The join used by the Catalanimal product: this set, `other` shifted by
    /// l, and every cross root.
    fn join(&self, other: &RootSet) -> RootSet {
        let l = self.l + other.l;
        let mut out = RootSet::new(l);
        for (i, j) in self.iter() {
            out.insert(i, j);
        }
        for (i, j) in other.iter() {
            out.insert(i + self.l, j + self.l);
        }
        for i in 1..=self.l {
            for j in (self.l + 1)..=l {
                out.insert(i, j);
            }
        }
        out
    }
}

/// A Catalanimal: length, root triple, and integer weight.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "CatalanimalJson", into = "CatalanimalJson")]
pub struct Catalanimal {
    l: usize,
    rq: RootSet,
    rt: RootSet,
    rqt: RootSet,
    lambda: Vec<i64>,
}

#[derive(Serialize, Deserialize)]
struct CatalanimalJson {
    l: usize,
    #[serde(rename = "Rq")]
    rq: Vec<(usize, usize)>,
    #[serde(rename = "Rt")]
    rt: Vec<(usize, usize)>,
    #[serde(rename = "Rqt")]
    rqt: Vec<(usize, usize)>,
    lambda: Vec<i64>,
}

impl TryFrom<CatalanimalJson> for Catalanimal {
    type Error = Error;
    fn try_from(j: CatalanimalJson) -> Result<Catalanimal> {
        if j.l > 31 {
            return Err(Error::ResourceCap(format!("length {} (cap 31)", j.l)));
        }
        let mk = |pairs: &[(usize, usize)]| -> Result<RootSet> {
            let mut s = RootSet::new(j.l);
            for &(a, b) in pairs {
                if !(1 <= a && a < b && b <= j.l) {
                    return Err(Error::InvalidInput(format!(
                        "({}, {}) is not a positive root of GL_{}",
                        a, b, j.l
                    )));
                }
                s.insert(a, b);
            }
            Ok(s)
        };
        Catalanimal::new(mk(&j.rq)?, mk(&j.rt)?, mk(&j.rqt)?, j.lambda)
    }
}

impl From<Catalanimal> for CatalanimalJson {
    fn from(c: Catalanimal) -> CatalanimalJson {
        CatalanimalJson {
            l: c.l,
            rq: c.rq.iter(),
            rt: c.rt.iter(),
            rqt: c.rqt.iter(),
            lambda: c.lambda,
        }
    }
}

impl Catalanimal {
    pub fn new(rq: RootSet, rt: RootSet, rqt: RootSet, lambda: Vec<i64>) -> Result<Catalanimal> {
        let l = lambda.len();
        if rq.l != l || rt.l != l || rqt.l != l {
            return Err(Error::InvalidInput(
                "root sets and weight disagree on the length".into(),
            ));
        }
        Ok(Catalanimal {
            l,
            rq,
            rt,
            rqt,
            lambda,
        })
    }

    pub fn empty() -> Catalanimal {
        Catalanimal {
            l: 0,
            rq: RootSet::new(0),
            rt: RootSet::new(0),
            rqt: RootSet::new(0),
            lambda: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.l
    }

    pub fn is_empty(&self) -> bool {
        self.l == 0
    }

    pub fn lambda(&self) -> &[i64] {
        &self.lambda
    }

    /// Shift the weight by a constant vector (c, ..., c).
    pub fn shift_weight(&self, c: i64) -> Catalanimal {
        let mut out = self.clone();
        for x in &mut out.lambda {
            *x += c;
        }
        out
    }

    pub fn rq(&self) -> &RootSet {
        &self.rq
    }

    pub fn rt(&self) -> &RootSet {
        &self.rt
    }

    pub fn rqt(&self) -> &RootSet {
        &self.rqt
    }

    pub fn degree(&self) -> i64 {
        self.lambda.iter().sum()
    }

    pub fn from_json(s: &str) -> Result<Catalanimal> {
        serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))
    }

    /// With nested root sets the three classes partition R_+; render one
    /// character per root: `#` outside R_q, `+` in R_q only, `o` in R_t but
    /// not R_qt, `.` in R_qt.
    pub fn render_ascii(&self) -> String {
        let width = self
            .lambda
            .iter()
            .map(|x| x.to_string().len())
            .max()
            .unwrap_or(1);
        let mut out = String::new();
        for i in 1..=self.l {
            let mut row: Vec<String> = Vec::new();
            for j in 1..=self.l {
                let cell = if j < i {
                    " ".repeat(width)
                } else if j == i {
                    format!("{:>width$}", self.lambda[i - 1], width = width)
                } else {
                    let ch = if self.rqt.contains(i, j) {
                        '.'
                    } else if self.rt.contains(i, j) {
                        'o'
                    } else if self.rq.contains(i, j) {
                        '+'
                    } else {
                        '#'
                    };
                    format!("{:>width$}", ch, width = width)
                };
                row.push(cell);
            }
            out.push_str(row.join(" ").trim_end());
            out.push('\n');
        }
        out.push_str("legend: # R+\\Rq   + Rq\\Rt   o Rt\\Rqt   . Rqt\n");
        out
    }
}

// ---------------------------------------------------------------------------
// LLT constructions

/// The (1,0) LLT Catalanimal of a nonempty tuple: root sets from adjusted
/// contents, weight from row starts and row ends per diagonal.
pub fn build_llt(t: &SkewTuple) -> Result<Catalanimal> {
    let l = t.n_boxes();
    if l == 0 {
        return Err(Error::InvalidInput(
            "LLT Catalanimals need a nonempty tuple".into(),
        ));
    }
    if l > 31 {
        return Err(Error::ResourceCap(format!("tuple has {} boxes (cap 31)", l)));
    }
    let boxes = t.reading_order();
    let mut rq = RootSet::new(l);
    let mut rt = RootSet::new(l);
    let mut rqt = RootSet::new(l);
    for i in 0..l {
        for j in (i + 1)..l {
            let (ci, si) = boxes[i].adjusted();
            let (cj, sj) = boxes[j].adjusted();
            if (ci, si) < (cj, sj) {
                rq.insert(i + 1, j + 1);
            }
            if (ci + 1, si) <= (cj, sj) {
                rt.insert(i + 1, j + 1);
            }
            if (ci + 1, si) < (cj, sj) {
                rqt.insert(i + 1, j + 1);
            }
        }
    }
    let mut lambda = vec![0i64; l];
    for d in t.diagonals() {
        let has_start = d.iter().any(|&p| t.is_row_start(t.box_at(p)));
        let has_end = d.iter().any(|&p| t.is_row_end(t.box_at(p)));
        let v = has_start as i64 - has_end as i64;
        for &p in &d {
            lambda[p - 1] = v;
        }
    }
    Catalanimal::new(rq, rt, rqt, lambda)
}

fn mod_one_to_m(x: i64, m: i64) -> usize {
    let r = x.rem_euclid(m);
    (if r == 0 { m } else { r }) as usize
}

/// The (m,n) LLT Catalanimal: root sets of the m-stretched tuple, weight
/// lambda-hat plus the b(m,n) filling of each stretched box.
pub fn build_llt_mn(t: &SkewTuple, m: i64, n: i64, offsets: &[i64]) -> Result<Catalanimal> {
    if num_integer::gcd(m, n.abs()) != 1 {
        return Err(Error::InvalidInput(format!(
            "({}, {}) is not a coprime pair",
            m, n
        )));
    }
    let spec = StretchSpec::new(m, offsets.to_vec())?;
    let (stretched, _) = t.stretch(&spec)?;
    let mut cat = build_llt(&stretched)?;
    let b = b_vector(m, n);
    for (idx, bx) in stretched.reading_order().iter().enumerate() {
        let o = offsets[bx.shape - 1];
        let pos = mod_one_to_m(bx.content() - o, m);
        cat.lambda[idx] += b[pos - 1];
    }
    Ok(cat)
}

/// Check that the two alternative descriptions of the LLT weight reproduce
/// the defining one.
pub fn weight_identities_check(t: &SkewTuple) -> Result<bool> {
    let cat = build_llt(t)?;
    let l = cat.l;
    let boxes = t.reading_order();
    // description 2: swap "contains" for "does not contain"
    let mut lambda2 = vec![0i64; l];
    for d in t.diagonals() {
        let has_start = d.iter().any(|&p| t.is_row_start(t.box_at(p)));
        let has_end = d.iter().any(|&p| t.is_row_end(t.box_at(p)));
        let v = !has_end as i64 - !has_start as i64;
        for &p in &d {
            lambda2[p - 1] = v;
        }
    }
    // description 3: -sum(R+ \ Rq) + sum((Rt \ Rqt) restricted to weakly
    // southwest pairs)
    let mut lambda3 = vec![0i64; l];
    for i in 1..=l {
        for j in (i + 1)..=l {
            if !cat.rq.contains(i, j) {
                lambda3[i - 1] -= 1;
                lambda3[j - 1] += 1;
            }
            if cat.rt.contains(i, j)
                && !cat.rqt.contains(i, j)
                && SkewTuple::precedes(&boxes[i - 1], &boxes[j - 1])
            {
                lambda3[i - 1] += 1;
                lambda3[j - 1] -= 1;
            }
        }
    }
    Ok(cat.lambda == lambda2 && cat.lambda == lambda3)
}

// ---------------------------------------------------------------------------
// Cuddliness

/// lambda[I] by the general formula: lambda + sum R_+^{I,Ic} - sum Rq^{I,Ic}
/// - sum Rt^{I,Ic} + sum Rqt^{I,Ic}.
pub fn lambda_bracket(c: &Catalanimal, imask: u32) -> Vec<i64> {
    let full = RootSet::full(c.l);
    let mut out = c.lambda.clone();
    let add = |out: &mut Vec<i64>, v: Vec<i64>, sign: i64| {
        for (o, x) in out.iter_mut().zip(v) {
            *o += sign * x;
        }
    };
    add(&mut out, full.sum_cross(imask), 1);
    add(&mut out, c.rq.sum_cross(imask), -1);
    add(&mut out, c.rt.sum_cross(imask), -1);
    add(&mut out, c.rqt.sum_cross(imask), 1);
    out
}

/// r_I = |lambda[I]_I|.
pub fn r_subset(c: &Catalanimal, imask: u32) -> i64 {
    lambda_bracket(c, imask)
        .iter()
        .enumerate()
        .filter(|(i, _)| imask >> i & 1 == 1)
        .map(|(_, &x)| x)
        .sum()
}

/// For nested triples the bracket weight simplifies to
/// lambda + sum (R+\Rq)^{I,Ic} - sum (Rt\Rqt)^{I,Ic}.
pub fn lambda_bracket_nested(c: &Catalanimal, imask: u32) -> Vec<i64> {
    let mut out = c.lambda.clone();
    for i in 1..=c.l {
        if imask >> (i - 1) & 1 == 0 {
            continue;
        }
        for j in (i + 1)..=c.l {
            if imask >> (j - 1) & 1 == 1 {
                continue;
            }
            if !c.rq.contains(i, j) {
                out[i - 1] += 1;
                out[j - 1] -= 1;
            }
            if c.rt.contains(i, j) && !c.rqt.contains(i, j) {
                out[i - 1] -= 1;
                out[j - 1] += 1;
            }
        }
    }
    out
}

/// One violated or tight subset bound.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct SubsetBound {
    pub subset: Vec<usize>,
    pub value: i64,
    pub bound_num: i64,
    pub bound_den: i64,
}

/// Outcome of the cuddliness check.
#[derive(Clone, Debug)]
pub struct CuddlyReport {
    pub m: i64,
    pub n: i64,
    pub tame: bool,
    pub degree_ok: bool,
    pub violations: Vec<SubsetBound>,
    pub tight_subsets: Vec<Vec<usize>>,
}

impl CuddlyReport {
    pub fn cuddly(&self) -> bool {
        self.tame && self.degree_ok && self.violations.is_empty()
    }
}

fn mask_to_subset(mask: u32, l: usize) -> Vec<usize> {
    (0..l)
        .filter(|i| mask >> i & 1 == 1)
        .map(|i| i + 1)
        .collect()
}

/// Verify tameness, the degree condition |lambda| = l n/m, and the bound
/// |lambda[I]_I| <= |I| n/m over all subsets.
pub fn check_cuddly(c: &Catalanimal, m: i64, n: i64) -> Result<CuddlyReport> {
    if m < 1 || num_integer::gcd(m, n.abs()) != 1 {
        return Err(Error::InvalidInput(format!(
            "({}, {}) is not a coprime pair with positive first entry",
            m, n
        )));
    }
    if c.l > 20 {
        return Err(Error::ResourceCap(format!(
            "cuddliness scan over 2^{} subsets (cap 2^20)",
            c.l
        )));
    }
    let tame = RootSet::bracket(&c.rq, &c.rt).is_subset_of(&c.rqt);
    let degree_ok = c.l as i64 % m == 0 && m * c.degree() == c.l as i64 * n;
    let masks: Vec<u32> = (0..(1u32 << c.l)).collect();
    let (mut violations, mut tight) = par::map_reduce(
        masks,
        |mask| {
            let r = r_subset(c, mask);
            let k = mask.count_ones() as i64;
            let mut v = Vec::new();
            let mut t = Vec::new();
            if m * r > k * n {
                v.push(SubsetBound {
                    subset: mask_to_subset(mask, c.l),
                    value: r,
                    bound_num: k * n,
                    bound_den: m,
                });
            } else if m * r == k * n {
                t.push(mask_to_subset(mask, c.l));
            }
            (v, t)
        },
        || (Vec::new(), Vec::new()),
        |(mut v1, mut t1), (v2, t2)| {
            v1.extend(v2);
            t1.extend(t2);
            (v1, t1)
        },
    );
    violations.sort();
    tight.sort();
    Ok(CuddlyReport {
        m,
        n,
        tame,
        degree_ok,
        violations,
        tight_subsets: tight,
    })
}

/// The restricted Catalanimals H_I' (on I, weight lambda[I]_I) and H_I''
/// (on the complement, weight lambda[I]_{I^c}).
pub fn restrict(c: &Catalanimal, subset: &BTreeSet<usize>) -> (Catalanimal, Catalanimal) {
    let inside: Vec<usize> = subset.iter().copied().collect();
    let outside: Vec<usize> = (1..=c.l).filter(|i| !subset.contains(i)).collect();
    let imask: u32 = inside.iter().map(|i| 1u32 << (i - 1)).sum();
    let bracket = lambda_bracket(c, imask);
    let pick = |ix: &[usize]| -> Vec<i64> { ix.iter().map(|&i| bracket[i - 1]).collect() };
    let h1 = Catalanimal {
        l: inside.len(),
        rq: c.rq.restrict(&inside),
        rt: c.rt.restrict(&inside),
        rqt: c.rqt.restrict(&inside),
        lambda: pick(&inside),
    };
    let h2 = Catalanimal {
        l: outside.len(),
        rq: c.rq.restrict(&outside),
        rt: c.rt.restrict(&outside),
        rqt: c.rqt.restrict(&outside),
        lambda: pick(&outside),
    };
    (h1, h2)
}

/// The shuffle-algebra product of two Catalanimals: root sets joined with all
/// cross roots, weights concatenated.
pub fn join(c1: &Catalanimal, c2: &Catalanimal) -> Catalanimal {
    let mut lambda = c1.lambda.clone();
    lambda.extend_from_slice(&c2.lambda);
    Catalanimal {
        l: c1.l + c2.l,
        rq: c1.rq.join(&c2.rq),
        rt: c1.rt.join(&c2.rt),
        rqt: c1.rqt.join(&c2.rqt),
        lambda,
    }
}

// ---------------------------------------------------------------------------
// Numeric evaluation

/// Which of the three associated functions to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Form {
    H,
    Phi,
    G,
}

/// Which shuffle kernel to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Gamma {
    Hat,
    Tilde,
}

const PERM_CAP: usize = 9;

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..n).collect();
    fn heap(k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k <= 1 {
            out.push(cur.clone());
            return;
        }
        for i in 0..k {
            heap(k - 1, cur, out);
            if k % 2 == 0 {
                cur.swap(i, k - 1);
            } else {
                cur.swap(0, k - 1);
            }
        }
    }
    heap(n, &mut cur, &mut out);
    out
}

fn one_minus(x: BigRational) -> BigRational {
    BigRational::one() - x
}

fn pow_rat(base: &BigRational, e: i64) -> BigRational {
    if e == 0 {
        return BigRational::one();
    }
    let b = if e > 0 { base.clone() } else { base.recip() };
    let mut acc = BigRational::one();
    for _ in 0..e.unsigned_abs() {
        acc *= &b;
    }
    acc
}

fn monomial_value(lambda: &[i64], z: &[BigRational]) -> Result<BigRational> {
    let mut acc = BigRational::one();
    for (i, lam) in lambda.iter().enumerate() {
        if z[i].is_zero() && *lam < 0 {
            return Err(Error::SingularPoint(format!("z_{} = 0", i + 1)));
        }
        acc *= pow_rat(&z[i], *lam);
    }
    Ok(acc)
}

/// phi at a point: the product form with no symmetrization.
fn eval_phi(
    c: &Catalanimal,
    z: &[BigRational],
    q0: &BigRational,
    t0: &BigRational,
) -> Result<BigRational> {
    let mut acc = monomial_value(&c.lambda, z)?;
    let qt = q0 * t0;
    for i in 1..=c.l {
        for j in (i + 1)..=c.l {
            if z[j - 1].is_zero() {
                return Err(Error::SingularPoint(format!("z_{} = 0", j)));
            }
            let ratio = &z[i - 1] / &z[j - 1];
            if !c.rq.contains(i, j) {
                acc *= one_minus(q0 * &ratio);
            }
            if !c.rt.contains(i, j) {
                acc *= one_minus(t0 * &ratio);
            }
            if !c.rqt.contains(i, j) {
                let den = one_minus(&qt * &ratio);
                if den.is_zero() {
                    return Err(Error::SingularPoint(format!(
                        "factor (1 - q t z_{}/z_{}) vanishes",
                        i, j
                    )));
                }
                acc /= den;
            }
        }
    }
    Ok(acc)
}

/// One symmetrization term of H at a permuted point.
fn h_term(
    c: &Catalanimal,
    z: &[BigRational],
    q0: &BigRational,
    t0: &BigRational,
) -> Result<BigRational> {
    let mut acc = monomial_value(&c.lambda, z)?;
    let qt = q0 * t0;
    for i in 1..=c.l {
        for j in (i + 1)..=c.l {
            if z[j - 1].is_zero() {
                return Err(Error::SingularPoint(format!("z_{} = 0", j)));
            }
            let ratio = &z[i - 1] / &z[j - 1];
            if c.rqt.contains(i, j) {
                acc *= one_minus(&qt * &ratio);
            }
            if ratio.is_zero() {
                return Err(Error::SingularPoint(format!("z_{} = 0", i)));
            }
            let den = one_minus(ratio.recip());
            if den.is_zero() {
                return Err(Error::SingularPoint(format!(
                    "factor (1 - z_{}/z_{}) vanishes",
                    j, i
                )));
            }
            acc /= den;
            if c.rq.contains(i, j) {
                let den = one_minus(q0 * &ratio);
                if den.is_zero() {
                    return Err(Error::SingularPoint(format!(
                        "factor (1 - q z_{}/z_{}) vanishes",
                        i, j
                    )));
                }
                acc /= den;
            }
            if c.rt.contains(i, j) {
                let den = one_minus(t0 * &ratio);
                if den.is_zero() {
                    return Err(Error::SingularPoint(format!(
                        "factor (1 - t z_{}/z_{}) vanishes",
                        i, j
                    )));
                }
                acc /= den;
            }
        }
    }
    Ok(acc)
}

/// One symmetrization term of the Laurent polynomial g at a permuted point.
fn g_term(
    c: &Catalanimal,
    z: &[BigRational],
    q0: &BigRational,
    t0: &BigRational,
) -> Result<BigRational> {
    let mut acc = monomial_value(&c.lambda, z)?;
    let qt = q0 * t0;
    for i in 1..=c.l {
        for j in 1..=c.l {
            if i == j {
                continue;
            }
            if z[j - 1].is_zero() {
                return Err(Error::SingularPoint(format!("z_{} = 0", j)));
            }
            let ratio = &z[i - 1] / &z[j - 1];
            if i < j {
                acc *= one_minus(ratio.clone());
                if c.rqt.contains(i, j) {
                    acc *= one_minus(&qt * &ratio);
                }
            }
            // q and t factors over every root outside the respective set
            let in_rq = i < j && c.rq.contains(i, j);
            let in_rt = i < j && c.rt.contains(i, j);
            if !in_rq {
                acc *= one_minus(q0 * &ratio);
            }
            if !in_rt {
                acc *= one_minus(t0 * &ratio);
            }
        }
    }
    Ok(acc)
}

/// Exact evaluation of H, phi, or g at a rational point.  H and g sum over
/// all l! permutations of the variables.
pub fn eval_form(
    c: &Catalanimal,
    form: Form,
    z: &[BigRational],
    q0: &BigRational,
    t0: &BigRational,
) -> Result<BigRational> {
    if z.len() != c.l {
        return Err(Error::InvalidInput(format!(
            "point has {} coordinates for length {}",
            z.len(),
            c.l
        )));
    }
    if c.l == 0 {
        return Ok(BigRational::one());
    }
    match form {
        Form::Phi => eval_phi(c, z, q0, t0),
        Form::H | Form::G => {
            if c.l > PERM_CAP {
                return Err(Error::ResourceCap(format!(
                    "symmetrized evaluation sums {}! terms (cap {}!)",
                    c.l, PERM_CAP
                )));
            }
            let perms = permutations(c.l);
            let total = par::map_reduce(
                perms,
                |p| {
                    let zp: Vec<BigRational> = p.iter().map(|&i| z[i].clone()).collect();
                    match form {
                        Form::H => h_term(c, &zp, q0, t0).map(Some),
                        Form::G => g_term(c, &zp, q0, t0).map(Some),
                        Form::Phi => unreachable!(),
                    }
                },
                || Ok(None),
                |a: Result<Option<BigRational>>, b: Result<Option<BigRational>>| match (a, b) {
                    (Err(e), _) | (_, Err(e)) => Err(e),
                    (Ok(None), Ok(x)) | (Ok(x), Ok(None)) => Ok(x),
                    (Ok(Some(x)), Ok(Some(y))) => Ok(Some(x + y)),
                },
            )?;
            Ok(total.unwrap_or_else(BigRational::zero))
        }
    }
}

fn gamma_value(
    gamma: Gamma,
    w: &BigRational,
    y: &BigRational,
    q0: &BigRational,
    t0: &BigRational,
) -> Result<BigRational> {
    if w.is_zero() || y.is_zero() {
        return Err(Error::SingularPoint("zero coordinate in Gamma".into()));
    }
    let r = w / y;
    let qt = q0 * t0;
    match gamma {
        Gamma::Hat => {
            let num = one_minus(&qt * &r);
            let d1 = one_minus(r.recip());
            let d2 = one_minus(q0 * &r);
            let d3 = one_minus(t0 * &r);
            if d1.is_zero() || d2.is_zero() || d3.is_zero() {
                return Err(Error::SingularPoint(
                    "Gamma-hat denominator vanishes".into(),
                ));
            }
            Ok(num / (d1 * d2 * d3))
        }
        Gamma::Tilde => Ok(one_minus(r.clone())
            * one_minus(q0 * r.recip())
            * one_minus(t0 * r.recip())
            * one_minus(&qt * &r)),
    }
}

/// Evaluate the symmetrization sigma_Gamma(phi) at a point; with Gamma-hat
/// this equals H, with Gamma-tilde it equals g.
pub fn sigma_gamma_eval(
    c: &Catalanimal,
    gamma: Gamma,
    z: &[BigRational],
    q0: &BigRational,
    t0: &BigRational,
) -> Result<BigRational> {
    if c.l == 0 {
        return Ok(BigRational::one());
    }
    if c.l > PERM_CAP {
        return Err(Error::ResourceCap(format!(
            "symmetrization sums {}! terms (cap {}!)",
            c.l, PERM_CAP
        )));
    }
    let mut acc = BigRational::zero();
    for p in permutations(c.l) {
        let zp: Vec<BigRational> = p.iter().map(|&i| z[i].clone()).collect();
        let mut term = eval_phi(c, &zp, q0, t0)?;
        for i in 0..c.l {
            for j in (i + 1)..c.l {
                term *= gamma_value(gamma, &zp[i], &zp[j], q0, t0)?;
            }
        }
        acc += term;
    }
    Ok(acc)
}

/// The coset-sum shuffle product of the two Catalanimals' H forms (Gamma-hat)
/// or g forms (Gamma-tilde), evaluated at a point with l1 + l2 coordinates.
pub fn shuffle_eval(
    c1: &Catalanimal,
    c2: &Catalanimal,
    gamma: Gamma,
    z: &[BigRational],
    q0: &BigRational,
    t0: &BigRational,
) -> Result<BigRational> {
    let (k, l) = (c1.l, c1.l + c2.l);
    if z.len() != l {
        return Err(Error::InvalidInput(format!(
            "point has {} coordinates for total length {}",
            z.len(),
            l
        )));
    }
    let form = match gamma {
        Gamma::Hat => Form::H,
        Gamma::Tilde => Form::G,
    };
    let mut acc = BigRational::zero();
    for mask in 0u32..(1u32 << l) {
        if mask.count_ones() as usize != k {
            continue;
        }
        let a: Vec<usize> = (0..l).filter(|i| mask >> i & 1 == 1).collect();
        let b: Vec<usize> = (0..l).filter(|i| mask >> i & 1 == 0).collect();
        let za: Vec<BigRational> = a.iter().map(|&i| z[i].clone()).collect();
        let zb: Vec<BigRational> = b.iter().map(|&i| z[i].clone()).collect();
        let mut term = eval_form(c1, form, &za, q0, t0)?;
        term *= eval_form(c2, form, &zb, q0, t0)?;
        for &i in &a {
            for &j in &b {
                term *= gamma_value(gamma, &z[i], &z[j], q0, t0)?;
            }
        }
        acc += term;
    }
    Ok(acc)
}

fn random_rat(rng: &mut ChaCha8Rng) -> BigRational {
    let num = loop {
        let x = rng.gen_range(-100i64..=100);
        if x != 0 {
            break x;
        }
    };
    let den = rng.gen_range(1i64..=100);
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Randomized wheel test: g must vanish under z_j = z_i and under the ratios
/// (1 : q : qt) and (1 : t : qt) on every index triple, at `trials` random
/// base points.
pub fn wheel_check(c: &Catalanimal, trials: usize, seed: u64) -> Result<bool> {
    if c.l < 2 {
        return Ok(true);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials {
        let q0 = random_rat(&mut rng);
        let t0 = random_rat(&mut rng);
        let base: Vec<BigRational> = (0..c.l).map(|_| random_rat(&mut rng)).collect();
        // pair specializations z_j = z_i
        for i in 0..c.l {
            for j in (i + 1)..c.l {
                let mut z = base.clone();
                z[j] = z[i].clone();
                if !eval_form(c, Form::G, &z, &q0, &t0)?.is_zero() {
                    return Ok(false);
                }
            }
        }
        if c.l < 3 {
            continue;
        }
        // wheel specializations on ordered triples
        let s = random_rat(&mut rng);
        for i in 0..c.l {
            for j in 0..c.l {
                for k in 0..c.l {
                    if i == j || i == k || j == k {
                        continue;
                    }
                    for second in [&q0, &t0] {
                        let mut z = base.clone();
                        z[i] = s.clone();
                        z[j] = &s * second;
                        z[k] = &s * &(&q0 * &t0);
                        if !eval_form(c, Form::G, &z, &q0, &t0)?.is_zero() {
                            return Ok(false);
                        }
                    }
                }
            }
        }
    }
    Ok(true)
}

// ---------------------------------------------------------------------------
// Principal specialization

/// Exact phi(1, t, ..., t^{l-1}) in Q(q,t) by direct product evaluation.
pub fn principal_spec(c: &Catalanimal) -> Result<QtRational> {
    let texp: i64 = c
        .lambda
        .iter()
        .enumerate()
        .map(|(i, &x)| i as i64 * x)
        .sum();
    let mut acc = QtRational::monomial(1, 0, texp as i32);
    for i in 1..=c.l {
        for j in (i + 1)..=c.l {
            // z_i/z_j specializes to t^{i-j}
            let e = (i as i32) - (j as i32);
            if !c.rq.contains(i, j) {
                acc = acc.mul(&QtRational::one().sub(&QtRational::monomial(1, 1, e)));
            }
            if !c.rt.contains(i, j) {
                acc = acc.mul(&QtRational::one().sub(&QtRational::monomial(1, 0, e + 1)));
            }
            if !c.rqt.contains(i, j) {
                let den = QtRational::one().sub(&QtRational::monomial(1, 1, e + 1));
                if den.is_zero() {
                    return Err(Error::SingularPoint(
                        "phi denominator vanishes at the principal point".into(),
                    ));
                }
                acc = acc.try_div(&den)?;
            }
        }
    }
    Ok(acc)
}

// ---------------------------------------------------------------------------
// Polynomial part of the raising-operator series

/// A homogeneous polynomial GL_l character combination: coefficients of
/// chi_mu over partitions mu with at most l parts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GlCharPoly {
    pub l: usize,
    pub coeffs: BTreeMap<Partition, QtRational>,
}

impl GlCharPoly {
    pub fn to_symfunc(&self) -> SymFunc {
        SymFunc::from_coeffs(Basis::Schur, self.coeffs.clone())
    }

    /// Compare against a symmetric function expanded in l variables: Schur
    /// terms with more than l rows vanish there.
    pub fn matches_symfunc(&self, f: &SymFunc) -> Result<bool> {
        let s = f.convert(Basis::Schur)?;
        let truncated: BTreeMap<Partition, QtRational> = s
            .coeffs()
            .iter()
            .filter(|(lam, _)| lam.len() <= self.l)
            .map(|(lam, c)| (lam.clone(), c.clone()))
            .collect();
        Ok(truncated == self.coeffs)
    }
}

impl fmt::Display for GlCharPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_symfunc())
    }
}

const HPOL_CAP: usize = 14;

struct HpolSetup {
    l: usize,
    lambda: Vec<i64>,
    rho: Vec<i64>,
    /// per block i (1-based first index): roots (i, j) with series
    blocks: Vec<Vec<(usize, Vec<QtPoly>)>>,
    /// per block: roots (i, j) with memberships (Rq, Rt, Rqt)
    memberships: Vec<Vec<(usize, bool, bool, bool)>>,
    value_cap: i64,
    t_min: i64,
    /// prefix sums of the largest possible distinct values
    top_prefix: Vec<i64>,
}

fn transport(u: &[i64]) -> i64 {
    u.iter().enumerate().map(|(i, &x)| i as i64 * x).sum()
}

/// Series of (1-qt z^a)^{eps} / ((1-q z^a)^{eps'} (1-t z^a)^{eps''}) along
/// one root direction, truncated after `len` steps.
fn root_series(in_q: bool, in_t: bool, in_qt: bool, len: usize) -> Vec<QtPoly> {
    let mut s = vec![QtPoly::zero(); len + 1];
    s[0] = QtPoly::one();
    let geometric = |s: &[QtPoly], qe: i32, te: i32| -> Vec<QtPoly> {
        let mut out = vec![QtPoly::zero(); s.len()];
        for k in 0..s.len() {
            for a in 0..=k {
                let shift = s[a].shift(qe * (k - a) as i32, te * (k - a) as i32);
                out[k] = out[k].add(&shift);
            }
        }
        out
    };
    if in_q {
        s = geometric(&s, 1, 0);
    }
    if in_t {
        s = geometric(&s, 0, 1);
    }
    if in_qt {
        let mut out = vec![QtPoly::zero(); s.len()];
        for k in 0..s.len() {
            out[k] = out[k].add(&s[k]);
            if k + 1 < s.len() {
                let shifted = s[k].shift(1, 1).neg();
                out[k + 1] = out[k + 1].add(&shifted);
            }
        }
        s = out;
    }
    s
}

fn hpol_setup(c: &Catalanimal) -> Result<Option<HpolSetup>> {
    let l = c.l;
    if l > HPOL_CAP {
        return Err(Error::ResourceCap(format!(
            "polynomial part at length {} (cap {})",
            l, HPOL_CAP
        )));
    }
    let d = c.degree();
    if d < 0 || l == 0 {
        return Ok(None);
    }
    let rho: Vec<i64> = (0..l).map(|i| (l - 1 - i) as i64).collect();
    let value_cap = d + l as i64 - 1;
    // minimal transport over all admissible final weights
    let base: i64 = rho.iter().enumerate().map(|(i, &r)| i as i64 * r).sum();
    let mut t_min = i64::MAX;
    for target in Partition::all_max_len(d, l) {
        let mut vals: Vec<i64> = (0..l).map(|i| target.part(i) as i64 + rho[i]).collect();
        vals.sort_unstable_by(|a, b| b.cmp(a));
        // pair largest values with smallest weights
        let t: i64 = vals.iter().enumerate().map(|(i, &v)| i as i64 * v).sum();
        t_min = t_min.min(t - base);
    }
    if t_min == i64::MAX {
        return Ok(None);
    }
    // series length: enough for any single coordinate move inside the window
    let lambda_min = c.lambda.iter().copied().min().unwrap_or(0);
    let max_k = (value_cap - lambda_min + l as i64).max(1) as usize + 1;
    let mut blocks: Vec<Vec<(usize, Vec<QtPoly>)>> = vec![Vec::new(); l];
    let mut memberships: Vec<Vec<(usize, bool, bool, bool)>> = vec![Vec::new(); l];
    for i in 1..=l {
        for j in (i + 1)..=l {
            let (in_q, in_t, in_qt) = (
                c.rq.contains(i, j),
                c.rt.contains(i, j),
                c.rqt.contains(i, j),
            );
            if in_q || in_t || in_qt {
                blocks[i - 1].push((j, root_series(in_q, in_t, in_qt, max_k)));
                memberships[i - 1].push((j, in_q, in_t, in_qt));
            }
        }
    }
    let mut top_prefix = vec![0i64; l + 1];
    for i in 1..=l {
        top_prefix[i] = top_prefix[i - 1] + (value_cap - (i as i64 - 1));
    }
    Ok(Some(HpolSetup {
        l,
        lambda: c.lambda.clone(),
        rho,
        blocks,
        memberships,
        value_cap,
        t_min,
        top_prefix,
    }))
}

/// Coefficient ring for the weight-map expansion.  The fast implementation
/// packs exponents into a u32 and keeps i128 coefficients with checked
/// arithmetic; any overflow aborts the fast run and the big-integer
/// implementation repeats the computation.
trait DpCoeff: Clone + Send + Sync + Sized {
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn from_qt(p: &QtPoly) -> Option<Self>;
    fn to_qt(&self) -> QtPoly;
    /// None signals overflow.
    fn mul(&self, other: &Self) -> Option<Self>;
    /// None signals overflow.
    fn add(&self, other: &Self) -> Option<Self>;
}

impl DpCoeff for QtPoly {
    fn one() -> Self {
        QtPoly::one()
    }
    fn is_zero(&self) -> bool {
        QtPoly::is_zero(self)
    }
    fn from_qt(p: &QtPoly) -> Option<Self> {
        Some(p.clone())
    }
    fn to_qt(&self) -> QtPoly {
        self.clone()
    }
    fn mul(&self, other: &Self) -> Option<Self> {
        Some(QtPoly::mul(self, other))
    }
    fn add(&self, other: &Self) -> Option<Self> {
        Some(QtPoly::add(self, other))
    }
}

/// Sorted sparse polynomial with packed nonnegative exponents.
#[derive(Clone, Debug)]
struct PackedPoly {
    terms: Vec<(u32, i128)>,
}

fn pack(q: i32, t: i32) -> Option<u32> {
    if (0..=0xffff).contains(&q) && (0..=0xffff).contains(&t) {
        Some(((q as u32) << 16) | t as u32)
    } else {
        None
    }
}

impl DpCoeff for PackedPoly {
    fn one() -> Self {
        PackedPoly {
            terms: vec![(0, 1)],
        }
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
    fn from_qt(p: &QtPoly) -> Option<Self> {
        let mut terms = Vec::with_capacity(p.num_terms());
        for (e, c) in p.terms() {
            let key = pack(e.0, e.1)?;
            let v = i128::try_from(c).ok()?;
            terms.push((key, v));
        }
        terms.sort_unstable_by_key(|t| t.0);
        Some(PackedPoly { terms })
    }
    fn to_qt(&self) -> QtPoly {
        let mut out = QtPoly::zero();
        for &(key, v) in &self.terms {
            out.add_term(
                ((key >> 16) as i32, (key & 0xffff) as i32),
                &num_bigint::BigInt::from(v),
            );
        }
        out
    }
    fn mul(&self, other: &Self) -> Option<Self> {
        let mut acc: Vec<(u32, i128)> = Vec::with_capacity(self.terms.len() * other.terms.len());
        for &(k1, c1) in &self.terms {
            for &(k2, c2) in &other.terms {
                let q = (k1 >> 16) + (k2 >> 16);
                let t = (k1 & 0xffff) + (k2 & 0xffff);
                if q > 0xffff || t > 0xffff {
                    return None;
                }
                acc.push(((q << 16) | t, c1.checked_mul(c2)?));
            }
        }
        acc.sort_unstable_by_key(|t| t.0);
        let mut out: Vec<(u32, i128)> = Vec::with_capacity(acc.len());
        for (k, c) in acc {
            match out.last_mut() {
                Some(last) if last.0 == k => {
                    last.1 = last.1.checked_add(c)?;
                }
                _ => out.push((k, c)),
            }
        }
        out.retain(|t| t.1 != 0);
        Some(PackedPoly { terms: out })
    }
    fn add(&self, other: &Self) -> Option<Self> {
        let mut out = Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut i, mut j) = (0, 0);
        while i < self.terms.len() && j < other.terms.len() {
            let (ka, ca) = self.terms[i];
            let (kb, cb) = other.terms[j];
            match ka.cmp(&kb) {
                std::cmp::Ordering::Less => {
                    out.push((ka, ca));
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push((kb, cb));
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    let s = ca.checked_add(cb)?;
                    if s != 0 {
                        out.push((ka, s));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.terms[i..]);
        out.extend_from_slice(&other.terms[j..]);
        Some(PackedPoly { terms: out })
    }
}

type WeightMap<C> = HashMap<Vec<i64>, C>;

/// None bubbles an arithmetic overflow out of the whole map.
fn weight_map_insert<C: DpCoeff>(
    map: &mut Option<WeightMap<C>>,
    key: Vec<i64>,
    value: C,
) {
    let Some(inner) = map.as_mut() else {
        return;
    };
    match inner.entry(key) {
        std::collections::hash_map::Entry::Occupied(mut o) => match o.get().add(&value) {
            Some(s) => {
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
            None => *map = None,
        },
        std::collections::hash_map::Entry::Vacant(slot) => {
            slot.insert(value);
        }
    }
}

fn merge_weight_maps<C: DpCoeff>(
    a: Option<WeightMap<C>>,
    b: Option<WeightMap<C>>,
) -> Option<WeightMap<C>> {
    let (Some(a), Some(b)) = (a, b) else {
        return None;
    };
    let (big, small) = if a.len() < b.len() { (b, a) } else { (a, b) };
    let mut out = Some(big);
    for (k, v) in small {
        weight_map_insert(&mut out, k, v);
        if out.is_none() {
            return None;
        }
    }
    out
}

/// States packed one byte per coordinate (offset by 128), hashed with a
/// multiply-fold.
#[derive(Default)]
struct FoldHasher(u64);

impl std::hash::Hasher for FoldHasher {
    fn finish(&self) -> u64 {
        self.0
    }
    fn write(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 = (self.0 ^ b as u64).wrapping_mul(0x100000001b3);
        }
    }
    fn write_u128(&mut self, n: u128) {
        let x = (n as u64) ^ ((n >> 64) as u64).wrapping_mul(0x9e3779b97f4a7c15);
        self.0 = x.wrapping_mul(0xd6e8feb86659fd93);
    }
}

type PackedMap<C> = HashMap<u128, C, std::hash::BuildHasherDefault<FoldHasher>>;

fn pack_state(u: &[i64]) -> Option<u128> {
    let mut out = 0u128;
    for (i, &x) in u.iter().enumerate() {
        let b = x + 128;
        if !(0..=255).contains(&b) {
            return None;
        }
        out |= (b as u128) << (8 * i);
    }
    Some(out)
}

fn unpack_state(key: u128, l: usize, out: &mut [i64]) {
    for (i, slot) in out.iter_mut().enumerate().take(l) {
        *slot = ((key >> (8 * i)) & 0xff) as i64 - 128;
    }
}

fn packed_insert<C: DpCoeff>(map: &mut Option<PackedMap<C>>, key: u128, value: C) {
    let Some(inner) = map.as_mut() else {
        return;
    };
    match inner.entry(key) {
        std::collections::hash_map::Entry::Occupied(mut o) => match o.get().add(&value) {
            Some(s) => {
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
            None => *map = None,
        },
        std::collections::hash_map::Entry::Vacant(slot) => {
            slot.insert(value);
        }
    }
}

fn merge_packed<C: DpCoeff>(a: Option<PackedMap<C>>, b: Option<PackedMap<C>>) -> Option<PackedMap<C>> {
    let (Some(a), Some(b)) = (a, b) else {
        return None;
    };
    let (big, small) = if a.len() < b.len() { (b, a) } else { (a, b) };
    let mut out = Some(big);
    for (k, v) in small {
        packed_insert(&mut out, k, v);
        if out.is_none() {
            return None;
        }
    }
    out
}

impl PackedPoly {
    fn shift(&self, dq: u32, dt: u32) -> Option<PackedPoly> {
        let mut out = Vec::with_capacity(self.terms.len());
        for &(k, c) in &self.terms {
            let q = (k >> 16) + dq;
            let t = (k & 0xffff) + dt;
            if q > 0xffff || t > 0xffff {
                return None;
            }
            out.push(((q << 16) | t, c));
        }
        Some(PackedPoly { terms: out })
    }

    fn neg_shift(&self, dq: u32, dt: u32) -> Option<PackedPoly> {
        let mut p = self.shift(dq, dt)?;
        for t in &mut p.terms {
            t.1 = t.1.checked_neg()?;
        }
        Some(p)
    }
}

/// The per-root factor, fused into one walk along each ray.
#[derive(Clone, Copy)]
enum RootFactor {
    /// 1/(1-q z^a): running accumulator with a q shift
    GeomQ,
    /// 1/(1-t z^a)
    GeomT,
    /// 1/((1-q z^a)(1-t z^a)): two accumulators
    GeomQt,
    /// (1-qt z^a)/((1-q z^a)(1-t z^a)): series q^k + t^k
    GeomQtOverQt,
    /// (1-qt z^a): two-term factor
    LinearQt,
}

/// Multiply the weight map by one root factor along the root (i, j),
/// walking each ray u, u+alpha, u+2alpha, ...  All pruning bounds are
/// functions of the target position on the ray.  Targets that cannot repair
/// their accumulated coordinate deficits and excesses within the remaining
/// transport budget are not inserted.
fn root_pass(
    map: PackedMap<PackedPoly>,
    setup: &HpolSetup,
    i: usize,
    j: usize,
    factor: RootFactor,
) -> Option<PackedMap<PackedPoly>> {
    let l = setup.l;
    // bucket states by ray: all coordinates fixed except the linked pair
    let mut rays: HashMap<
        (u128, i64),
        Vec<(i64, PackedPoly)>,
        std::hash::BuildHasherDefault<FoldHasher>,
    > = HashMap::default();
    let clear = !((0xffu128 << (8 * (i - 1))) | (0xffu128 << (8 * (j - 1))));
    for (key, coeff) in map {
        let mut u = [0i64; 16];
        unpack_state(key, l, &mut u);
        rays.entry((key & clear, u[i - 1] + u[j - 1]))
            .or_default()
            .push((u[i - 1], coeff));
    }
    let ray_list: Vec<((u128, i64), Vec<(i64, PackedPoly)>)> = rays.into_iter().collect();
    par::fold_mut(
        ray_list,
        |out: &mut Option<PackedMap<PackedPoly>>, ((masked, pair_sum), mut entries)| {
            if out.is_none() {
                return;
            }
            entries.sort_unstable_by_key(|e| e.0);
            let mut base = [0i64; 16];
            unpack_state(masked, l, &mut base);
            base[i - 1] = 0;
            base[j - 1] = pair_sum;
            let t_base: i64 = base[..l]
                .iter()
                .enumerate()
                .map(|(a, &x)| a as i64 * x)
                .sum();
            // deficit/excess of the coordinates this pass cannot move;
            // repairs cost at least one transport unit each
            let mut fixed_repair = 0i64;
            for a in 0..l {
                if a == i - 1 || a == j - 1 {
                    continue;
                }
                let floor = -setup.rho[a];
                let cap = setup.value_cap - setup.rho[a];
                fixed_repair += (floor - base[a]).max(0) + (base[a] - cap).max(0);
            }
            let step = j as i64 - i as i64;
            let window_cap = setup.value_cap - setup.rho[i - 1];
            // two running accumulators cover every factor shape
            let mut acc_q: Option<PackedPoly> = None;
            let mut acc_t: Option<PackedPoly> = None;
            let mut pos = entries[0].0;
            let mut next = 0usize;
            loop {
                // target-position feasibility; transport along the ray is
                // t_base - (j - i) u_i
                let ui = pos;
                let uj = pair_sum - pos;
                let t_val = t_base - step * ui;
                if ui > window_cap || t_val < setup.t_min {
                    break;
                }
                if uj + setup.rho[j - 1] < -(t_val - setup.t_min) {
                    break;
                }
                if !(-128..=127).contains(&ui) || !(-128..=127).contains(&uj) {
                    *out = None;
                    return;
                }
                let shift_failed = std::cell::Cell::new(false);
                let advance = |acc: &mut Option<PackedPoly>, dq: u32, dt: u32| {
                    if let Some(r) = acc.take() {
                        match r.shift(dq, dt) {
                            Some(s) => *acc = Some(s),
                            None => shift_failed.set(true),
                        }
                    }
                };
                let entry = if next < entries.len() && entries[next].0 == pos {
                    next += 1;
                    Some(&entries[next - 1].1)
                } else {
                    None
                };
                let absorb = |acc: &mut Option<PackedPoly>| {
                    if let Some(e) = entry {
                        match acc.take() {
                            None => *acc = Some(e.clone()),
                            Some(r) => match r.add(e) {
                                Some(s) => *acc = Some(s),
                                None => shift_failed.set(true),
                            },
                        }
                    }
                };
                let value: Option<PackedPoly> = match factor {
                    RootFactor::GeomQ => {
                        advance(&mut acc_q, 1, 0);
                        absorb(&mut acc_q);
                        acc_q.clone()
                    }
                    RootFactor::GeomT => {
                        advance(&mut acc_t, 0, 1);
                        absorb(&mut acc_t);
                        acc_t.clone()
                    }
                    RootFactor::GeomQt => {
                        // acc_t carries the pure-t geometric sum; acc_q the
                        // full double sum: acc_q[p] = entry + q acc_q[p-1]
                        //                            + t acc_t[p-1] - t-part overlap
                        // realized as acc_q[p] = q acc_q[p-1] + acc_t[p]
                        advance(&mut acc_t, 0, 1);
                        absorb(&mut acc_t);
                        advance(&mut acc_q, 1, 0);
                        match (&acc_q, &acc_t) {
                            (Some(a), Some(b)) => match a.add(b) {
                                Some(s) => acc_q = Some(s),
                                None => shift_failed.set(true),
                            },
                            (None, Some(b)) => acc_q = Some(b.clone()),
                            _ => {}
                        }
                        acc_q.clone()
                    }
                    RootFactor::GeomQtOverQt => {
                        // series q^k + t^k: two independent geometric sums,
                        // minus the doubly counted k = 0 entry
                        advance(&mut acc_q, 1, 0);
                        absorb(&mut acc_q);
                        advance(&mut acc_t, 0, 1);
                        absorb(&mut acc_t);
                        match (&acc_q, &acc_t) {
                            (Some(a), Some(b)) => {
                                let sum = a.add(b);
                                match (sum, entry) {
                                    (Some(s), Some(e)) => match e.neg_shift(0, 0) {
                                        Some(ne) => s.add(&ne),
                                        None => None,
                                    },
                                    (s, None) => s,
                                    (None, _) => None,
                                }
                                .map_or_else(
                                    || {
                                        shift_failed.set(true);
                                        None
                                    },
                                    Some,
                                )
                            }
                            _ => None,
                        }
                    }
                    RootFactor::LinearQt => {
                        // value = entry - qt * previous entry
                        let prev = acc_q.take();
                        acc_q = entry.cloned();
                        let shifted_prev = match prev {
                            Some(p) => match p.neg_shift(1, 1) {
                                Some(s) => Some(s),
                                None => {
                                    shift_failed.set(true);
                                    None
                                }
                            },
                            None => None,
                        };
                        match (entry, shifted_prev) {
                            (Some(e), Some(s)) => match e.add(&s) {
                                Some(v) => Some(v),
                                None => {
                                    shift_failed.set(true);
                                    None
                                }
                            },
                            (Some(e), None) => Some(e.clone()),
                            (None, s) => s,
                        }
                    }
                };
                if shift_failed.get() {
                    *out = None;
                    return;
                }
                if let Some(r) = value {
                    if !r.is_zero() {
                        // combined repair budget: every unit of deficit or
                        // excess costs a move, and one move can repair at
                        // most two units
                        let floor_i = -setup.rho[i - 1];
                        let floor_j = -setup.rho[j - 1];
                        let cap_j = setup.value_cap - setup.rho[j - 1];
                        let repair = fixed_repair
                            + (floor_i - ui).max(0)
                            + (floor_j - uj).max(0)
                            + (uj - cap_j).max(0);
                        if repair <= 2 * (t_val - setup.t_min) {
                            let key = masked
                                + (((ui + 128) as u128) << (8 * (i - 1)))
                                + (((uj + 128) as u128) << (8 * (j - 1)));
                            let inner = out.as_mut().unwrap();
                            match inner.entry(key) {
                                std::collections::hash_map::Entry::Occupied(mut o) => {
                                    match o.get().add(&r) {
                                        Some(s) => {
                                            if s.is_zero() {
                                                o.remove();
                                            } else {
                                                *o.get_mut() = s;
                                            }
                                        }
                                        None => {
                                            *out = None;
                                            return;
                                        }
                                    }
                                }
                                std::collections::hash_map::Entry::Vacant(slot) => {
                                    slot.insert(r);
                                }
                            }
                        }
                    }
                }
                pos += 1;
                let pending = next < entries.len();
                let live = acc_q.as_ref().map(|p| !p.is_zero()).unwrap_or(false)
                    || acc_t.as_ref().map(|p| !p.is_zero()).unwrap_or(false);
                if !pending && !live {
                    break;
                }
            }
        },
        || Some(PackedMap::default()),
        merge_packed,
    )
}

/// Fast run with byte-packed states and i128 coefficients; None on any
/// overflow (coefficient or coordinate range).
fn h_pol_run_packed(setup: &HpolSetup) -> Option<WeightMap<QtPoly>> {
    let l = setup.l;
    let trace = std::env::var_os("CATALANIMALS_HPOL_TRACE").is_some();
    let mut map: PackedMap<PackedPoly> = PackedMap::default();
    map.insert(pack_state(&setup.lambda)?, PackedPoly::one());
    for i in 1..=l {
        let t0 = std::time::Instant::now();
        for &(j, in_q, in_t, in_qt) in &setup.memberships[i - 1] {
            // fuse the memberships into as few ray walks as possible
            match (in_q, in_t, in_qt) {
                (true, true, true) if false => {
                    map = root_pass(map, setup, i, j, RootFactor::GeomQtOverQt)?;
                }
                (true, true, false) if false => {
                    map = root_pass(map, setup, i, j, RootFactor::GeomQt)?;
                }
                (in_q, in_t, in_qt) => {
                    if in_q {
                        map = root_pass(map, setup, i, j, RootFactor::GeomQ)?;
                    }
                    if in_t {
                        map = root_pass(map, setup, i, j, RootFactor::GeomT)?;
                    }
                    if in_qt {
                        map = root_pass(map, setup, i, j, RootFactor::LinearQt)?;
                    }
                }
            }
        }
        if trace {
            let terms: usize = map.values().map(|p| p.terms.len()).sum();
            eprintln!(
                "block {}: {} states, {} terms, {:?}",
                i,
                map.len(),
                terms,
                t0.elapsed()
            );
        }
        // coordinate i final: window, distinctness, prefix sums
        map.retain(|&key, _| {
            let mut u = [0i64; 16];
            unpack_state(key, l, &mut u);
            let vi = u[i - 1] + setup.rho[i - 1];
            if vi < 0 || vi > setup.value_cap {
                return false;
            }
            let mut prefix = 0i64;
            for a in 0..i {
                let va = u[a] + setup.rho[a];
                prefix += va;
                for b in 0..a {
                    if u[b] + setup.rho[b] == va {
                        return false;
                    }
                }
            }
            let lo = (i as i64) * (i as i64 - 1) / 2;
            lo <= prefix && prefix <= setup.top_prefix[i]
        });
    }
    let mut out: WeightMap<QtPoly> = HashMap::new();
    for (key, coeff) in map {
        let mut u = vec![0i64; l];
        unpack_state(key, l, &mut u);
        out.insert(u, coeff.to_qt());
    }
    Some(out)
}

/// One run of the weight-map expansion over a coefficient ring; None means
/// the ring overflowed and the caller should retry with big integers.
fn h_pol_run<C: DpCoeff>(setup: &HpolSetup) -> Option<WeightMap<C>> {
    let blocks: Vec<Vec<(usize, Vec<C>)>> = setup
        .blocks
        .iter()
        .map(|block| {
            block
                .iter()
                .map(|(j, series)| {
                    let s: Option<Vec<C>> = series.iter().map(C::from_qt).collect();
                    s.map(|s| (*j, s))
                })
                .collect::<Option<Vec<_>>>()
        })
        .collect::<Option<Vec<_>>>()?;
    let mut map: WeightMap<C> = HashMap::new();
    map.insert(setup.lambda.clone(), C::one());
    for i in 1..=setup.l {
        for (j, series) in &blocks[i - 1] {
            let entries: Vec<(Vec<i64>, C)> = map.drain().collect();
            let convolve_into = |out: &mut Option<WeightMap<C>>, (u, coeff): (Vec<i64>, C)| {
                if out.is_none() {
                    return;
                }
                let t_u = transport(&u);
                // multiplicity bounds: the coordinate cap on u_i and the
                // transport budget
                let cap_i = setup.value_cap - setup.rho[i - 1] - u[i - 1];
                let cap_t = (t_u - setup.t_min) / (*j as i64 - i as i64);
                let k_max = cap_i.min(cap_t).max(0) as usize;
                for k in 0..=k_max.min(series.len() - 1) {
                    if series[k].is_zero() {
                        continue;
                    }
                    let mut v = u.clone();
                    v[i - 1] += k as i64;
                    v[*j - 1] -= k as i64;
                    // the lowered coordinate must stay recoverable
                    let t_v = t_u - k as i64 * (*j as i64 - i as i64);
                    if v[*j - 1] + setup.rho[*j - 1] < -(t_v - setup.t_min) {
                        continue;
                    }
                    match coeff.mul(&series[k]) {
                        Some(prod) => weight_map_insert(out, v, prod),
                        None => {
                            *out = None;
                            return;
                        }
                    }
                }
            };
            map = par::fold_mut(
                entries,
                |out, entry| convolve_into(out, entry),
                || Some(HashMap::new()),
                merge_weight_maps,
            )?;
        }
        // coordinate i is final: exact window, distinctness, prefix sums
        map.retain(|u, _| {
            let vi = u[i - 1] + setup.rho[i - 1];
            if vi < 0 || vi > setup.value_cap {
                return false;
            }
            let mut prefix = 0i64;
            for a in 0..i {
                let va = u[a] + setup.rho[a];
                prefix += va;
                for b in 0..a {
                    if u[b] + setup.rho[b] == va {
                        return false;
                    }
                }
            }
            let lo = (i as i64) * (i as i64 - 1) / 2;
            lo <= prefix && prefix <= setup.top_prefix[i]
        });
    }
    Some(map)
}

/// The polynomial part of the raising-operator series of the Catalanimal.
///
/// The geometric factors are expanded exactly over the window of weights
/// that can symmetrize to polynomial characters: coordinate i is final once
/// every root (i, j) has been folded in, so it must land in [0, d+l-1] after
/// the rho shift and differ from the earlier coordinates; a transport bound
/// caps how far any coordinate may dip below its floor in between.
pub fn h_pol(c: &Catalanimal) -> Result<GlCharPoly> {
    let setup = match hpol_setup(c)? {
        Some(s) => s,
        None => {
            return Ok(GlCharPoly {
                l: c.l,
                coeffs: BTreeMap::new(),
            })
        }
    };
    // fast packed run first; the reference run on any overflow
    let map: HashMap<Vec<i64>, QtPoly> = match h_pol_run_packed(&setup) {
        Some(m) => m,
        None => h_pol_run::<QtPoly>(&setup).expect("big-integer run cannot overflow"),
    };
    // read off characters: sort u + rho, sign from the sorting permutation
    let mut coeffs: BTreeMap<Partition, QtRational> = BTreeMap::new();
    for (u, coeff) in map {
        let vals: Vec<i64> = u.iter().zip(&setup.rho).map(|(x, r)| x + r).collect();
        let mut inv = 0usize;
        for a in 0..vals.len() {
            for b in (a + 1)..vals.len() {
                if vals[a] < vals[b] {
                    inv += 1;
                }
            }
        }
        let mut sorted = vals.clone();
        sorted.sort_unstable_by(|a, b| b.cmp(a));
        let parts: Vec<i32> = sorted
            .iter()
            .enumerate()
            .map(|(i, &v)| (v - setup.rho[i]) as i32)
            .collect();
        let lam = Partition::new(parts);
        let signed = if inv % 2 == 1 { coeff.neg() } else { coeff };
        let cur = coeffs
            .remove(&lam)
            .unwrap_or_else(QtRational::zero)
            .add(&QtRational::from(signed));
        if !cur.is_zero() {
            coeffs.insert(lam, cur);
        }
    }
    Ok(GlCharPoly { l: c.l, coeffs })
}

// ---------------------------------------------------------------------------
// Cubs

/// The scalar and symmetric function on the right side of the cub identity:
/// (-1)^p (qt)^{-p-n'} q^{-A} G_nu with statistics taken on the stretched
/// tuple and A the offset-weighted attack count.
pub fn expected_cub(
    t: &SkewTuple,
    m: i64,
    n: i64,
    offsets: &[i64],
) -> Result<(QtRational, SymFunc)> {
    if num_integer::gcd(m, n.abs()) != 1 {
        return Err(Error::InvalidInput(format!(
            "({}, {}) is not a coprime pair",
            m, n
        )));
    }
    let spec = StretchSpec::new(m, offsets.to_vec())?;
    let (stretched, _) = t.stretch(&spec)?;
    let stats = stretched.stats();
    let script_a: i64 = t.a_values(&spec)?.values().sum();
    let p = stats.magic_p;
    let npr = stats.n_prime;
    let sign = if p % 2 == 0 { 1 } else { -1 };
    let scalar = QtRational::monomial(sign, (-(p + npr) - script_a) as i32, (-(p + npr)) as i32);
    let g = llt(t, t.n_boxes().max(1))?;
    Ok((scalar.clone(), g.scale(&scalar)))
}

/// One line of a verification transcript.
#[derive(Clone, Debug)]
pub struct TranscriptLine {
    pub depth: usize,
    pub label: String,
    pub ok: bool,
}

/// Transcript of a cub verification run.
#[derive(Clone, Debug, Default)]
pub struct CubTranscript {
    pub lines: Vec<TranscriptLine>,
}

impl CubTranscript {
    pub fn pass(&self) -> bool {
        self.lines.iter().all(|l| l.ok)
    }

    fn record(&mut self, depth: usize, label: impl Into<String>, ok: bool) {
        self.lines.push(TranscriptLine {
            depth,
            label: label.into(),
            ok,
        });
    }
}

impl fmt::Display for CubTranscript {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for line in &self.lines {
            writeln!(
                f,
                "{}[{}] {}",
                "  ".repeat(line.depth),
                if line.ok { "ok" } else { "FAIL" },
                line.label
            )?;
        }
        write!(f, "overall: {}", if self.pass() { "PASS" } else { "FAIL" })
    }
}

/// Verify the two cub-determination conditions for the (m,n) LLT Catalanimal
/// of the tuple: the principal specialization, and for every inner bidegree
/// the coproduct expansion over tight subsets; recurse on the sub-tuples to
/// `max_depth`.
pub fn verify_cub(
    t: &SkewTuple,
    m: i64,
    n: i64,
    offsets: &[i64],
    max_depth: usize,
) -> Result<CubTranscript> {
    let mut out = CubTranscript::default();
    let mut seen = BTreeSet::new();
    verify_cub_inner(t, m, n, offsets, max_depth, 0, &mut out, &mut seen)?;
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn verify_cub_inner(
    t: &SkewTuple,
    m: i64,
    n: i64,
    offsets: &[i64],
    max_depth: usize,
    depth: usize,
    out: &mut CubTranscript,
    seen: &mut BTreeSet<String>,
) -> Result<()> {
    let d = t.n_boxes() as i64;
    let spec = StretchSpec::new(m, offsets.to_vec())?;
    let (_, stretch_map) = t.stretch(&spec)?;
    let cat = build_llt_mn(t, m, n, offsets)?;
    let l = cat.l as i64;
    let (_, f) = expected_cub(t, m, n, offsets)?;
    let name = serde_json::to_string(t).unwrap_or_default();

    // cuddliness
    let report = check_cuddly(&cat, m, n)?;
    out.record(
        depth,
        format!("{}-box tuple is ({}, {})-cuddly", d, m, n),
        report.cuddly(),
    );

    // condition (2): principal specialization
    let a = d * (d * m * n - m - n + 1) / 2;
    let lhs = principal_spec(&cat)?;
    let omega_f_spec = f.omega()?.plethys(&QtAlphabet::one_minus_q())?;
    let one_minus_q = QtRational::one().sub(&QtRational::q());
    let rhs = QtRational::monomial(1, 0, a as i32)
        .mul(&omega_f_spec)
        .try_div(&one_minus_q.pow(l)?)?;
    out.record(
        depth,
        format!("principal specialization with a = {}", a),
        lhs == rhs,
    );

    // condition (1): coproduct over tight subsets, one bidegree at a time
    let mut subtuples: Vec<SkewTuple> = Vec::new();
    for k in 1..d {
        let lhs = f.coproduct_component(k)?;
        let mut rhs: BTreeMap<(Partition, Partition), QtRational> = BTreeMap::new();
        let mut structural = true;
        for tight in &report.tight_subsets {
            if tight.len() as i64 != k * m {
                continue;
            }
            let iset: BTreeSet<usize> = tight.iter().copied().collect();
            // the tight subset must be a union of stretched boxes
            let j_src: Vec<usize> = (1..=t.n_boxes())
                .filter(|&src| stretch_map[src - 1].iter().all(|p| iset.contains(p)))
                .collect();
            let covered: usize = j_src.iter().map(|&s| stretch_map[s - 1].len()).sum();
            if covered != iset.len() {
                structural = false;
                continue;
            }
            let jset: BTreeSet<usize> = j_src.iter().copied().collect();
            let jcomp: BTreeSet<usize> = (1..=t.n_boxes()).filter(|p| !jset.contains(p)).collect();
            let sub = t.sub_tuple(&jset)?;
            let sub_c = t.sub_tuple(&jcomp)?;
            // the restricted Catalanimals agree with the sub-tuple builders
            let (h1, h2) = restrict(&cat, &iset);
            if h1 != build_llt_mn(&sub, m, n, offsets)?
                || h2 != build_llt_mn(&sub_c, m, n, offsets)?
            {
                structural = false;
            }
            // coefficient from the nested-root-set form of the coproduct
            let imask: u32 = tight.iter().map(|&i| 1u32 << (i - 1)).sum();
            let full = RootSet::full(cat.l);
            let a_cnt = full.count_cross(imask) - cat.rq.count_cross(imask);
            let b_cnt = cat.rq.count_cross(imask) - cat.rt.count_cross(imask);
            let c_cnt = cat.rt.count_cross(imask) - cat.rqt.count_cross(imask);
            let sign = if (a_cnt + c_cnt) % 2 == 0 { 1 } else { -1 };
            let coeff = QtRational::monomial(sign, (-c_cnt - b_cnt) as i32, (-c_cnt) as i32);
            let (_, f1) = expected_cub(&sub, m, n, offsets)?;
            let (_, f2) = expected_cub(&sub_c, m, n, offsets)?;
            let f1 = f1.convert(Basis::Schur)?;
            let f2 = f2.convert(Basis::Schur)?;
            for (l1, c1) in f1.coeffs() {
                for (l2, c2) in f2.coeffs() {
                    let key = (l1.clone(), l2.clone());
                    let add = coeff.mul(c1).mul(c2);
                    let cur = rhs.remove(&key).unwrap_or_else(QtRational::zero).add(&add);
                    if !cur.is_zero() {
                        rhs.insert(key, cur);
                    }
                }
            }
            subtuples.push(sub);
            subtuples.push(sub_c);
        }
        out.record(
            depth,
            format!(
                "tight subsets of size {} restrict to sub-tuple Catalanimals",
                k * m
            ),
            structural,
        );
        out.record(
            depth,
            format!(
                "coproduct component ({}, {}) matches the tight-subset sum",
                k,
                d - k
            ),
            lhs == rhs,
        );
    }

    if max_depth > 0 {
        seen.insert(name);
        for sub in subtuples {
            let key = serde_json::to_string(&sub).unwrap_or_default();
            if seen.contains(&key) {
                continue;
            }
            seen.insert(key);
            verify_cub_inner(&sub, m, n, offsets, max_depth - 1, depth + 1, out, seen)?;
        }
    }
    Ok(())
}
