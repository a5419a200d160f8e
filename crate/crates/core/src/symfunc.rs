//! Symmetric functions over Q(q,t) in the classical bases m, e, h, p, s.
//!
//! Base changes go through the monomial basis with exact rational transition
//! matrices, computed once per degree and memoized (optionally on disk via
//! the `CATALANIMALS_CACHE_DIR` environment variable).  Plethystic
//! evaluation is supported at signed sums of q,t-monomials, which covers the
//! alphabets 1-q and q-1; the two-alphabet expansion f[X+Y] is handled
//! structurally by [`SymFunc::coproduct_component`].

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::partition::Partition;
use crate::qt::QtRational;
use crate::varpoly::VarPoly;
use crate::Result;

/// Degrees above this would need transition matrices we never exercise.
const DEGREE_CAP: i64 = 14;

/// The classical bases.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Basis {
    Monomial,
    Elementary,
    Homogeneous,
    PowerSum,
    Schur,
}

impl Basis {
    fn tag(self) -> &'static str {
        match self {
            Basis::Monomial => "m",
            Basis::Elementary => "e",
            Basis::Homogeneous => "h",
            Basis::PowerSum => "p",
            Basis::Schur => "s",
        }
    }
}

type Matrix = Vec<Vec<BigRational>>;

/// Transition data for one degree: the partition list in a fixed order and,
/// per basis, the expansion matrix into monomial coordinates along with its
/// inverse.
struct DegreeTables {
    parts: Vec<Partition>,
    index: HashMap<Partition, usize>,
    to_monomial: HashMap<&'static str, Arc<Matrix>>,
    from_monomial: HashMap<&'static str, Arc<Matrix>>,
}

static TABLES: OnceLock<Mutex<HashMap<i64, Arc<DegreeTables>>>> = OnceLock::new();

fn tables(degree: i64) -> Result<Arc<DegreeTables>> {
    if degree < 0 || degree > DEGREE_CAP {
        return Err(Error::ResourceCap(format!(
            "base-change tables requested at degree {} (cap {})",
            degree, DEGREE_CAP
        )));
    }
    let lock = TABLES.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(t) = lock.lock().unwrap().get(&degree) {
        return Ok(t.clone());
    }
    let t = Arc::new(build_tables(degree));
    lock.lock().unwrap().insert(degree, t.clone());
    Ok(t)
}

fn build_tables(degree: i64) -> DegreeTables {
    let parts = Partition::all(degree);
    let index: HashMap<Partition, usize> = parts
        .iter()
        .enumerate()
        .map(|(i, p)| (p.clone(), i))
        .collect();
    let n = parts.len();

    let expansions = load_cached_expansions(degree, &parts).unwrap_or_else(|| {
        let e = expansion_matrix(&parts, |lam, d| basis_in_vars(BasisKind::E, lam, d));
        let h = expansion_matrix(&parts, |lam, d| basis_in_vars(BasisKind::H, lam, d));
        let p = expansion_matrix(&parts, |lam, d| basis_in_vars(BasisKind::P, lam, d));
        let s = schur_matrix(&parts);
        let out: HashMap<&'static str, Matrix> =
            [("e", e), ("h", h), ("p", p), ("s", s)].into_iter().collect();
        store_cached_expansions(degree, &out);
        out
    });

    let mut to_monomial: HashMap<&'static str, Arc<Matrix>> = HashMap::new();
    let mut from_monomial: HashMap<&'static str, Arc<Matrix>> = HashMap::new();
    let identity: Matrix = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        BigRational::one()
                    } else {
                        BigRational::zero()
                    }
                })
                .collect()
        })
        .collect();
    to_monomial.insert("m", Arc::new(identity.clone()));
    from_monomial.insert("m", Arc::new(identity));
    for (tag, m) in expansions {
        let inv = invert(&m);
        to_monomial.insert(tag, Arc::new(m));
        from_monomial.insert(tag, Arc::new(inv));
    }
    DegreeTables {
        parts,
        index,
        to_monomial,
        from_monomial,
    }
}

// Expansion of e_k / h_k / p_k products as polynomials in `d` variables, then
// coefficient extraction at partition exponent vectors.

enum BasisKind {
    E,
    H,
    P,
}

type VPoly = HashMap<Vec<u8>, BigInt>;

fn vp_one(d: usize) -> VPoly {
    HashMap::from([(vec![0u8; d], BigInt::one())])
}

fn vp_mul(a: &VPoly, b: &VPoly) -> VPoly {
    let mut out: VPoly = HashMap::new();
    for (e1, c1) in a {
        for (e2, c2) in b {
            let e: Vec<u8> = e1.iter().zip(e2).map(|(x, y)| x + y).collect();
            let c = c1 * c2;
            let entry = out.entry(e).or_insert_with(BigInt::zero);
            *entry += c;
        }
    }
    out.retain(|_, c| !c.is_zero());
    out
}

fn one_part_in_vars(kind: &BasisKind, k: i32, d: usize) -> VPoly {
    let mut out: VPoly = HashMap::new();
    match kind {
        BasisKind::P => {
            for i in 0..d {
                let mut e = vec![0u8; d];
                e[i] = k as u8;
                out.insert(e, BigInt::one());
            }
        }
        BasisKind::E => {
            // sum over k-subsets
            fn rec(d: usize, k: usize, start: usize, cur: &mut Vec<usize>, out: &mut VPoly) {
                if cur.len() == k {
                    let mut e = vec![0u8; d];
                    for &i in cur.iter() {
                        e[i] = 1;
                    }
                    out.insert(e, BigInt::one());
                    return;
                }
                for i in start..d {
                    cur.push(i);
                    rec(d, k, i + 1, cur, out);
                    cur.pop();
                }
            }
            rec(d, k as usize, 0, &mut Vec::new(), &mut out);
        }
        BasisKind::H => {
            // sum over degree-k monomials: weakly increasing index sequences
            fn rec(d: usize, left: u8, start: usize, e: &mut Vec<u8>, out: &mut VPoly) {
                if left == 0 {
                    out.insert(e.clone(), BigInt::one());
                    return;
                }
                for i in start..d {
                    e[i] += 1;
                    rec(d, left - 1, i, e, out);
                    e[i] -= 1;
                }
            }
            rec(d, k as u8, 0, &mut vec![0u8; d], &mut out);
        }
    }
    out
}

fn basis_in_vars(kind: BasisKind, lam: &Partition, d: usize) -> VPoly {
    let mut acc = vp_one(d);
    for &k in lam.parts() {
        acc = vp_mul(&acc, &one_part_in_vars(&kind, k, d));
    }
    acc
}

fn expansion_matrix(parts: &[Partition], f: impl Fn(&Partition, usize) -> VPoly) -> Matrix {
    let n = parts.len();
    let d = parts.first().map(|p| p.size()).unwrap_or(0) as usize;
    let mut m = vec![vec![BigRational::zero(); n]; n];
    for (col, lam) in parts.iter().enumerate() {
        let poly = f(lam, d.max(1));
        for (row, mu) in parts.iter().enumerate() {
            let mut e: Vec<u8> = mu.parts().iter().map(|&x| x as u8).collect();
            e.resize(d.max(1), 0);
            if let Some(c) = poly.get(&e) {
                m[row][col] = BigRational::from(c.clone());
            }
        }
    }
    m
}

/// Schur expansions via Kostka numbers: K_{lam,mu} counts SSYT of shape lam
/// and content mu.
fn schur_matrix(parts: &[Partition]) -> Matrix {
    let n = parts.len();
    let mut m = vec![vec![BigRational::zero(); n]; n];
    for (col, lam) in parts.iter().enumerate() {
        for (row, mu) in parts.iter().enumerate() {
            m[row][col] = BigRational::from(BigInt::from(kostka(lam, mu)));
        }
    }
    m
}

fn kostka(lam: &Partition, mu: &Partition) -> u64 {
    if lam.size() != mu.size() {
        return 0;
    }
    // fill French-style rows bottom to top, left to right; rows weakly
    // increase, columns strictly increase upward
    let rows = lam.len();
    let mut grid: Vec<Vec<u8>> = (0..rows)
        .map(|j| vec![0u8; lam.part(j) as usize])
        .collect();
    let mut remaining: Vec<i32> = mu.parts().to_vec();
    fn rec(
        grid: &mut Vec<Vec<u8>>,
        remaining: &mut Vec<i32>,
        j: usize,
        i: usize,
        count: &mut u64,
    ) {
        if j == grid.len() {
            *count += 1;
            return;
        }
        let (nj, ni) = if i + 1 < grid[j].len() {
            (j, i + 1)
        } else {
            (j + 1, 0)
        };
        let lo = {
            let mut lo = 1u8;
            if i > 0 {
                lo = lo.max(grid[j][i - 1]);
            }
            if j > 0 && i < grid[j - 1].len() {
                lo = lo.max(grid[j - 1][i] + 1);
            }
            lo
        };
        for v in lo..=(remaining.len() as u8) {
            let idx = (v - 1) as usize;
            if remaining[idx] == 0 {
                continue;
            }
            remaining[idx] -= 1;
            grid[j][i] = v;
            rec(grid, remaining, nj, ni, count);
            remaining[idx] += 1;
        }
        grid[j][i] = 0;
    }
    let mut count = 0;
    if rows == 0 {
        return 1;
    }
    rec(&mut grid, &mut remaining, 0, 0, &mut count);
    count
}

fn invert(m: &Matrix) -> Matrix {
    let n = m.len();
    let mut a: Vec<Vec<BigRational>> = m.to_vec();
    let mut inv: Matrix = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        BigRational::one()
                    } else {
                        BigRational::zero()
                    }
                })
                .collect()
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n)
            .find(|&r| !a[r][col].is_zero())
            .expect("transition matrix is invertible");
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let p = a[col][col].clone();
        for j in 0..n {
            a[col][j] /= &p;
            inv[col][j] /= &p;
        }
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone();
            for j in 0..n {
                let x = &a[col][j] * &f;
                a[r][j] -= x;
                let y = &inv[col][j] * &f;
                inv[r][j] -= y;
            }
        }
    }
    inv
}

// Optional on-disk cache of the integer expansion matrices.

#[derive(Serialize, Deserialize)]
struct CachedExpansions {
    degree: i64,
    partitions: Vec<Vec<i32>>,
    bases: BTreeMap<String, Vec<Vec<String>>>,
}

fn cache_path(degree: i64) -> Option<std::path::PathBuf> {
    let dir = std::env::var_os("CATALANIMALS_CACHE_DIR")?;
    Some(std::path::Path::new(&dir).join(format!("basechange_d{}.json", degree)))
}

fn load_cached_expansions(
    degree: i64,
    parts: &[Partition],
) -> Option<HashMap<&'static str, Matrix>> {
    let path = cache_path(degree)?;
    let text = std::fs::read_to_string(path).ok()?;
    let cached: CachedExpansions = serde_json::from_str(&text).ok()?;
    let expect: Vec<Vec<i32>> = parts.iter().map(|p| p.parts().to_vec()).collect();
    if cached.degree != degree || cached.partitions != expect {
        return None;
    }
    let mut out = HashMap::new();
    for tag in ["e", "h", "p", "s"] {
        let rows = cached.bases.get(tag)?;
        let mut m: Matrix = Vec::with_capacity(rows.len());
        for row in rows {
            let mut r = Vec::with_capacity(row.len());
            for cell in row {
                r.push(BigRational::from(BigInt::from_str(cell).ok()?));
            }
            m.push(r);
        }
        let key: &'static str = ["e", "h", "p", "s"]
            .iter()
            .find(|&&t| t == tag)
            .unwrap();
        out.insert(key, m);
    }
    Some(out)
}

fn store_cached_expansions(degree: i64, expansions: &HashMap<&'static str, Matrix>) {
    let Some(path) = cache_path(degree) else {
        return;
    };
    let partitions: Vec<Vec<i32>> = Partition::all(degree)
        .iter()
        .map(|p| p.parts().to_vec())
        .collect();
    let mut bases = BTreeMap::new();
    for (tag, m) in expansions {
        let rows: Vec<Vec<String>> = m
            .iter()
            .map(|row| row.iter().map(|c| c.numer().to_string()).collect())
            .collect();
        bases.insert(tag.to_string(), rows);
    }
    let cached = CachedExpansions {
        degree,
        partitions,
        bases,
    };
    if let Some(dir) = path.parent() {
        let _ = std::fs::create_dir_all(dir);
    }
    if let Ok(text) = serde_json::to_string(&cached) {
        let _ = std::fs::write(path, text);
    }
}

// ---------------------------------------------------------------------------

/// A symmetric function: a basis tag and a finite coefficient map.  Mixed
/// degrees are allowed; operations act per homogeneous component.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymFunc {
    basis: Basis,
    coeffs: BTreeMap<Partition, QtRational>,
}

impl SymFunc {
    pub fn zero(basis: Basis) -> Self {
        SymFunc {
            basis,
            coeffs: BTreeMap::new(),
        }
    }

    /// The constant 1 (empty partition, any basis).
    pub fn one(basis: Basis) -> Self {
        SymFunc::basis_element(basis, Partition::empty())
    }

    pub fn basis_element(basis: Basis, lam: Partition) -> Self {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(lam, QtRational::one());
        SymFunc { basis, coeffs }
    }

    pub fn schur(lam: Partition) -> Self {
        SymFunc::basis_element(Basis::Schur, lam)
    }

    pub fn from_coeffs(basis: Basis, coeffs: BTreeMap<Partition, QtRational>) -> Self {
        let coeffs = coeffs.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        SymFunc { basis, coeffs }
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn coeffs(&self) -> &BTreeMap<Partition, QtRational> {
        &self.coeffs
    }

    pub fn coeff(&self, lam: &Partition) -> QtRational {
        self.coeffs.get(lam).cloned().unwrap_or_else(QtRational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Maximum homogeneous degree present.
    pub fn degree(&self) -> i64 {
        self.coeffs.keys().map(|p| p.size()).max().unwrap_or(0)
    }

    pub fn set_coeff(&mut self, lam: Partition, c: QtRational) {
        if c.is_zero() {
            self.coeffs.remove(&lam);
        } else {
            self.coeffs.insert(lam, c);
        }
    }

    pub fn add_coeff(&mut self, lam: Partition, c: &QtRational) {
        let v = self.coeff(&lam).add(c);
        self.set_coeff(lam, v);
    }

    pub fn add(&self, other: &SymFunc) -> SymFunc {
        let other = other.convert(self.basis).expect("degree cap");
        let mut out = self.clone();
        for (lam, c) in other.coeffs {
            out.add_coeff(lam, &c);
        }
        out
    }

    pub fn sub(&self, other: &SymFunc) -> SymFunc {
        self.add(&other.scale(&QtRational::from_int(-1)))
    }

    pub fn scale(&self, c: &QtRational) -> SymFunc {
        SymFunc::from_coeffs(
            self.basis,
            self.coeffs
                .iter()
                .map(|(l, v)| (l.clone(), v.mul(c)))
                .collect(),
        )
    }

    /// Exact base change.
    pub fn convert(&self, target: Basis) -> Result<SymFunc> {
        if self.basis == target {
            return Ok(self.clone());
        }
        let mut out = SymFunc::zero(target);
        // work per homogeneous component
        let mut by_degree: BTreeMap<i64, Vec<(&Partition, &QtRational)>> = BTreeMap::new();
        for (l, c) in &self.coeffs {
            by_degree.entry(l.size()).or_default().push((l, c));
        }
        for (d, entries) in by_degree {
            let t = tables(d)?;
            let n = t.parts.len();
            let mut vec: Vec<QtRational> = vec![QtRational::zero(); n];
            for (l, c) in entries {
                vec[t.index[l]] = (*c).clone();
            }
            let src = t.to_monomial[self.basis.tag()].clone();
            let dst = t.from_monomial[target.tag()].clone();
            let mono = mat_vec(&src, &vec);
            let res = mat_vec(&dst, &mono);
            for (i, c) in res.into_iter().enumerate() {
                if !c.is_zero() {
                    out.add_coeff(t.parts[i].clone(), &c);
                }
            }
        }
        Ok(out)
    }

    /// Product, computed in the power-sum basis where it is concatenation of
    /// parts.
    pub fn mul(&self, other: &SymFunc) -> Result<SymFunc> {
        let a = self.convert(Basis::PowerSum)?;
        let b = other.convert(Basis::PowerSum)?;
        let mut out = SymFunc::zero(Basis::PowerSum);
        for (la, ca) in &a.coeffs {
            for (lb, cb) in &b.coeffs {
                let mut parts = la.parts().to_vec();
                parts.extend_from_slice(lb.parts());
                out.add_coeff(Partition::from_unsorted(parts), &ca.mul(cb));
            }
        }
        out.convert(self.basis)
    }

    /// The involution omega: on power sums, p_k goes to (-1)^(k-1) p_k.
    pub fn omega(&self) -> Result<SymFunc> {
        let p = self.convert(Basis::PowerSum)?;
        let mut out = SymFunc::zero(Basis::PowerSum);
        for (lam, c) in &p.coeffs {
            let sign = (lam.size() - lam.len() as i64) % 2;
            let c = if sign == 1 {
                c.mul(&QtRational::from_int(-1))
            } else {
                c.clone()
            };
            out.add_coeff(lam.clone(), &c);
        }
        out.convert(self.basis)
    }

    /// Scale each power sum p_k by `factor(k)`; this is plethysm by X*A for
    /// an alphabet A with p_k[A] = factor(k).
    pub fn twist_powersum(&self, factor: impl Fn(i32) -> QtRational) -> Result<SymFunc> {
        let p = self.convert(Basis::PowerSum)?;
        let mut out = SymFunc::zero(Basis::PowerSum);
        for (lam, c) in &p.coeffs {
            let mut f = c.clone();
            for &k in lam.parts() {
                f = f.mul(&factor(k));
            }
            out.add_coeff(lam.clone(), &f);
        }
        out.convert(self.basis)
    }

    /// Plethystic evaluation at a signed sum of q,t-monomials.
    pub fn plethys(&self, alphabet: &QtAlphabet) -> Result<QtRational> {
        let p = self.convert(Basis::PowerSum)?;
        let mut acc = QtRational::zero();
        for (lam, c) in &p.coeffs {
            let mut term = c.clone();
            for &k in lam.parts() {
                term = term.mul(&alphabet.power_sum(k));
            }
            acc = acc.add(&term);
        }
        Ok(acc)
    }

    /// The bidegree (k, d-k) component of f[X+Y], expanded in Schur (x) Schur.
    pub fn coproduct_component(
        &self,
        k: i64,
    ) -> Result<BTreeMap<(Partition, Partition), QtRational>> {
        let d = self.degree();
        if self.coeffs.keys().any(|l| l.size() != d) {
            return Err(Error::InvalidInput(
                "coproduct components need a homogeneous input".into(),
            ));
        }
        let p = self.convert(Basis::PowerSum)?;
        // split p_lambda into sub-multisets with binomial multiplicities
        let mut pp: BTreeMap<(Partition, Partition), QtRational> = BTreeMap::new();
        for (lam, c) in &p.coeffs {
            // distinct parts with multiplicities
            let mut mult: BTreeMap<i32, u32> = BTreeMap::new();
            for &a in lam.parts() {
                *mult.entry(a).or_insert(0) += 1;
            }
            let entries: Vec<(i32, u32)> = mult.into_iter().collect();
            fn rec(
                entries: &[(i32, u32)],
                i: usize,
                left: &mut Vec<i32>,
                right: &mut Vec<i32>,
                mult: BigInt,
                c: &QtRational,
                k: i64,
                pp: &mut BTreeMap<(Partition, Partition), QtRational>,
            ) {
                if i == entries.len() {
                    let lsum: i64 = left.iter().map(|&x| x as i64).sum();
                    if lsum == k {
                        let key = (
                            Partition::from_unsorted(left.clone()),
                            Partition::from_unsorted(right.clone()),
                        );
                        let add = c.mul(&QtRational::from(crate::qt::QtPoly::monomial(
                            mult, 0, 0,
                        )));
                        let cur = pp.get(&key).cloned().unwrap_or_else(QtRational::zero);
                        let v = cur.add(&add);
                        if v.is_zero() {
                            pp.remove(&key);
                        } else {
                            pp.insert(key, v);
                        }
                    }
                    return;
                }
                let (a, m) = entries[i];
                for j in 0..=m {
                    let ways = binomial(m, j);
                    for _ in 0..j {
                        left.push(a);
                    }
                    for _ in 0..(m - j) {
                        right.push(a);
                    }
                    rec(
                        entries,
                        i + 1,
                        left,
                        right,
                        &mult * ways,
                        c,
                        k,
                        pp,
                    );
                    for _ in 0..j {
                        left.pop();
                    }
                    for _ in 0..(m - j) {
                        right.pop();
                    }
                }
            }
            rec(
                &entries,
                0,
                &mut Vec::new(),
                &mut Vec::new(),
                BigInt::one(),
                c,
                k,
                &mut pp,
            );
        }
        // convert each side from power sums to Schur
        let tl = tables(k)?;
        let tr = tables(d - k)?;
        let p2s_l = compose(&tl.from_monomial["s"], &tl.to_monomial["p"]);
        let p2s_r = compose(&tr.from_monomial["s"], &tr.to_monomial["p"]);
        let mut out: BTreeMap<(Partition, Partition), QtRational> = BTreeMap::new();
        for ((a, b), c) in pp {
            let ia = tl.index[&a];
            let ib = tr.index[&b];
            for (ra, la) in tl.parts.iter().enumerate() {
                if p2s_l[ra][ia].is_zero() {
                    continue;
                }
                for (rb, lb) in tr.parts.iter().enumerate() {
                    if p2s_r[rb][ib].is_zero() {
                        continue;
                    }
                    let coeff = c
                        .mul(&rat_to_qt(&p2s_l[ra][ia]))
                        .mul(&rat_to_qt(&p2s_r[rb][ib]));
                    if coeff.is_zero() {
                        continue;
                    }
                    let key = (la.clone(), lb.clone());
                    let cur = out.get(&key).cloned().unwrap_or_else(QtRational::zero);
                    let v = cur.add(&coeff);
                    if v.is_zero() {
                        out.remove(&key);
                    } else {
                        out.insert(key, v);
                    }
                }
            }
        }
        Ok(out)
    }

    /// Read a symmetric function off its expansion in `N >= d` variables.
    /// The input must be homogeneous of degree `d` and symmetric; returns the
    /// monomial-basis form.
    pub fn from_polynomial(poly: &VarPoly, d: i64) -> Result<SymFunc> {
        let n = poly.nvars;
        if (n as i64) < d {
            return Err(Error::InvalidInput(format!(
                "need at least {} variables for degree {}",
                d, n
            )));
        }
        // group by sorted exponent vector
        let mut groups: HashMap<Vec<u16>, Vec<(&Vec<u16>, &QtRational)>> = HashMap::new();
        for (e, c) in &poly.terms {
            let deg: i64 = e.iter().map(|&x| x as i64).sum();
            if deg != d {
                return Err(Error::InvalidInput(format!(
                    "input not homogeneous of degree {}",
                    d
                )));
            }
            let mut key = e.clone();
            key.sort_unstable_by(|a, b| b.cmp(a));
            groups.entry(key).or_default().push((e, c));
        }
        let mut out = SymFunc::zero(Basis::Monomial);
        for (key, terms) in groups {
            // all coefficients in the orbit must agree and the orbit must be
            // complete
            let c0 = terms[0].1;
            if terms.iter().any(|(_, c)| *c != c0) {
                return Err(Error::InvalidInput(
                    "input polynomial is not symmetric (coefficients differ within an orbit)"
                        .into(),
                ));
            }
            let expected = orbit_size(&key);
            if terms.len() as u128 != expected {
                return Err(Error::InvalidInput(
                    "input polynomial is not symmetric (incomplete orbit)".into(),
                ));
            }
            let lam = Partition::new(key.iter().map(|&x| x as i32).collect());
            out.add_coeff(lam, c0);
        }
        Ok(out)
    }

    /// Expand in `n` variables (monomial-basis orbits written out in full).
    pub fn expand_in_vars(&self, n: usize) -> Result<VarPoly> {
        let m = self.convert(Basis::Monomial)?;
        let mut out = VarPoly::zero(n);
        for (lam, c) in &m.coeffs {
            if lam.len() > n {
                continue;
            }
            let mut base: Vec<u16> = lam.parts().iter().map(|&x| x as u16).collect();
            base.resize(n, 0);
            base.sort_unstable_by(|a, b| b.cmp(a));
            // all distinct permutations
            let mut perms: Vec<Vec<u16>> = Vec::new();
            distinct_permutations(&base, &mut perms);
            for p in perms {
                out.add_term(p, c.clone());
            }
        }
        Ok(out)
    }

    /// Evaluate coefficients at rational (q0, t0), producing a map used by
    /// specialization tests.
    pub fn eval_coeffs(
        &self,
        q0: &BigRational,
        t0: &BigRational,
    ) -> Result<BTreeMap<Partition, BigRational>> {
        let mut out = BTreeMap::new();
        for (lam, c) in &self.coeffs {
            let v = c.eval_at(q0, t0)?;
            if !v.is_zero() {
                out.insert(lam.clone(), v);
            }
        }
        Ok(out)
    }

    pub fn swap_qt(&self) -> SymFunc {
        SymFunc::from_coeffs(
            self.basis,
            self.coeffs
                .iter()
                .map(|(l, c)| (l.clone(), c.swap_qt()))
                .collect(),
        )
    }
}

fn distinct_permutations(sorted_desc: &[u16], out: &mut Vec<Vec<u16>>) {
    fn rec(
        counts: &mut BTreeMap<u16, usize>,
        n: usize,
        cur: &mut Vec<u16>,
        out: &mut Vec<Vec<u16>>,
    ) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        let keys: Vec<u16> = counts.keys().copied().collect();
        for k in keys {
            if counts[&k] == 0 {
                continue;
            }
            *counts.get_mut(&k).unwrap() -= 1;
            cur.push(k);
            rec(counts, n, cur, out);
            cur.pop();
            *counts.get_mut(&k).unwrap() += 1;
        }
    }
    let mut counts: BTreeMap<u16, usize> = BTreeMap::new();
    for &x in sorted_desc {
        *counts.entry(x).or_insert(0) += 1;
    }
    rec(&mut counts, sorted_desc.len(), &mut Vec::new(), out);
}

fn orbit_size(sorted_desc: &[u16]) -> u128 {
    let mut mult: HashMap<u16, u128> = HashMap::new();
    for &x in sorted_desc {
        *mult.entry(x).or_insert(0) += 1;
    }
    let mut num: u128 = 1;
    for k in 1..=(sorted_desc.len() as u128) {
        num *= k;
    }
    for (_, m) in mult {
        for k in 1..=m {
            num /= k;
        }
    }
    num
}

fn binomial(n: u32, k: u32) -> BigInt {
    let mut out = BigInt::one();
    for i in 0..k {
        out = out * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    out
}

fn rat_to_qt(r: &BigRational) -> QtRational {
    QtRational::new(
        crate::qt::QtPoly::monomial(r.numer().clone(), 0, 0),
        crate::qt::QtPoly::monomial(r.denom().clone(), 0, 0),
    )
    .expect("nonzero denominator")
}

fn mat_vec(m: &Matrix, v: &[QtRational]) -> Vec<QtRational> {
    m.iter()
        .map(|row| {
            let mut acc = QtRational::zero();
            for (c, x) in row.iter().zip(v) {
                if c.is_zero() || x.is_zero() {
                    continue;
                }
                acc = acc.add(&x.mul(&rat_to_qt(c)));
            }
            acc
        })
        .collect()
}

fn compose(a: &Matrix, b: &Matrix) -> Matrix {
    let n = a.len();
    let mut out = vec![vec![BigRational::zero(); n]; n];
    for i in 0..n {
        for k in 0..n {
            if a[i][k].is_zero() {
                continue;
            }
            for j in 0..n {
                if b[k][j].is_zero() {
                    continue;
                }
                let add = &a[i][k] * &b[k][j];
                out[i][j] += add;
            }
        }
    }
    out
}

/// A signed finite multiset of q,t-monomials, such as 1 - q; plethystic
/// evaluation sends p_k to the signed sum of k-th powers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QtAlphabet {
    /// (positive?, q-exponent, t-exponent)
    terms: Vec<(bool, i32, i32)>,
}

impl QtAlphabet {
    pub fn new(terms: Vec<(bool, i32, i32)>) -> Self {
        QtAlphabet { terms }
    }

    /// The alphabet 1 - q.
    pub fn one_minus_q() -> Self {
        QtAlphabet::new(vec![(true, 0, 0), (false, 1, 0)])
    }

    /// The alphabet q - 1.
    pub fn q_minus_one() -> Self {
        QtAlphabet::new(vec![(true, 1, 0), (false, 0, 0)])
    }

    /// p_k of the alphabet.
    pub fn power_sum(&self, k: i32) -> QtRational {
        let mut acc = QtRational::zero();
        for &(pos, a, b) in &self.terms {
            let m = QtRational::monomial(if pos { 1 } else { -1 }, a * k, b * k);
            acc = acc.add(&m);
        }
        acc
    }
}

// ---------------------------------------------------------------------------
// Textual Schur-style rendering: `s[3,1] + (q+t)*s[2,2]`, constants printed
// bare.  Any basis prints with its own letter.

impl fmt::Display for SymFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let letter = self.basis.tag();
        let mut first = true;
        for (lam, c) in &self.coeffs {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let cs = c.to_string();
            let simple = c.is_polynomial()
                && c.numer().num_terms() == 1
                && !cs.contains('(')
                && !cs.starts_with('-');
            if lam.is_empty() {
                if simple {
                    write!(f, "{}", cs)?;
                } else {
                    write!(f, "({})", cs)?;
                }
                continue;
            }
            if c.is_one() {
                write!(f, "{}{}", letter, lam)?;
            } else if simple {
                write!(f, "{}*{}{}", cs, letter, lam)?;
            } else {
                write!(f, "({})*{}{}", cs, letter, lam)?;
            }
        }
        Ok(())
    }
}

impl SymFunc {
    /// Parse the textual format produced by `Display` (Schur letter `s`,
    /// monomial `m`, etc.).
    pub fn parse(s: &str, basis: Basis) -> Result<SymFunc> {
        let letter = basis.tag();
        let mut out = SymFunc::zero(basis);
        for chunk in split_top_level_plus(s) {
            let chunk = chunk.trim();
            if chunk.is_empty() || chunk == "0" {
                continue;
            }
            let (coeff_str, part_str) = match chunk.find(&format!("{}[", letter)) {
                Some(idx) => {
                    let coeff = chunk[..idx].trim().trim_end_matches('*').trim();
                    (coeff, Some(&chunk[idx..]))
                }
                None => (chunk, None),
            };
            let coeff = if coeff_str.is_empty() {
                QtRational::one()
            } else {
                let stripped = strip_outer_parens(coeff_str);
                stripped.parse::<QtRational>()?
            };
            let lam = match part_str {
                None => Partition::empty(),
                Some(p) => {
                    let inner = p
                        .strip_prefix(&format!("{}[", letter))
                        .and_then(|x| x.strip_suffix(']'))
                        .ok_or_else(|| Error::Parse(format!("bad basis element '{}'", p)))?;
                    if inner.trim().is_empty() {
                        Partition::empty()
                    } else {
                        let parts = inner
                            .split(',')
                            .map(|x| {
                                x.trim()
                                    .parse::<i32>()
                                    .map_err(|e| Error::Parse(e.to_string()))
                            })
                            .collect::<Result<Vec<i32>>>()?;
                        Partition::new(parts)
                    }
                }
            };
            out.add_coeff(lam, &coeff);
        }
        Ok(out)
    }

    /// JSON mirror: a list of {partition, coeff} entries plus the basis tag.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "basis": self.basis.tag(),
            "terms": self
                .coeffs
                .iter()
                .map(|(l, c)| serde_json::json!({
                    "partition": l.parts(),
                    "coeff": c.to_string(),
                }))
                .collect::<Vec<_>>(),
        })
    }
}

fn split_top_level_plus(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    for ch in s.chars() {
        match ch {
            '(' | '[' => {
                depth += 1;
                cur.push(ch);
            }
            ')' | ']' => {
                depth -= 1;
                cur.push(ch);
            }
            '+' if depth == 0 => {
                out.push(std::mem::take(&mut cur));
            }
            _ => cur.push(ch),
        }
    }
    out.push(cur);
    out
}

fn strip_outer_parens(s: &str) -> &str {
    let t = s.trim();
    if let Some(inner) = t.strip_prefix('(').and_then(|x| x.strip_suffix(')')) {
        // only strip when the parens match each other
        let mut depth = 0i32;
        for (i, ch) in inner.char_indices() {
            match ch {
                '(' => depth += 1,
                ')' => {
                    depth -= 1;
                    if depth < 0 && i != inner.len() {
                        return t;
                    }
                }
                _ => {}
            }
        }
        if depth == 0 {
            return inner;
        }
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    fn part(p: &[i32]) -> Partition {
        Partition::new(p.to_vec())
    }

    #[test]
    fn classical_conversions() {
        // e3 = s_{111}
        let e3 = SymFunc::basis_element(Basis::Elementary, part(&[3]));
        let s = e3.convert(Basis::Schur).unwrap();
        assert_eq!(s, SymFunc::schur(part(&[1, 1, 1])));
        // h2 = s_2
        let h2 = SymFunc::basis_element(Basis::Homogeneous, part(&[2]));
        assert_eq!(h2.convert(Basis::Schur).unwrap(), SymFunc::schur(part(&[2])));
        // p2 = s_2 - s_{11}
        let p2 = SymFunc::basis_element(Basis::PowerSum, part(&[2]));
        let s = p2.convert(Basis::Schur).unwrap();
        assert_eq!(s.coeff(&part(&[2])), QtRational::one());
        assert_eq!(s.coeff(&part(&[1, 1])), QtRational::from_int(-1));
    }

    #[test]
    fn conversions_round_trip() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let d = rng.gen_range(1..=5i64);
            let parts = Partition::all(d);
            let mut f = SymFunc::zero(Basis::Schur);
            for p in &parts {
                if rng.gen_bool(0.5) {
                    f.add_coeff(
                        p.clone(),
                        &QtRational::monomial(
                            rng.gen_range(-3..4),
                            rng.gen_range(0..3),
                            rng.gen_range(0..3),
                        ),
                    );
                }
            }
            for b in [
                Basis::Monomial,
                Basis::Elementary,
                Basis::Homogeneous,
                Basis::PowerSum,
            ] {
                let g = f.convert(b).unwrap().convert(Basis::Schur).unwrap();
                assert_eq!(f, g);
            }
        }
    }

    #[test]
    fn omega_examples() {
        // omega s_{21} = s_{21}
        let f = SymFunc::schur(part(&[2, 1]));
        assert_eq!(f.omega().unwrap(), f);
        // omega e_n = h_n
        let e = SymFunc::basis_element(Basis::Elementary, part(&[4]));
        let h = SymFunc::basis_element(Basis::Homogeneous, part(&[4]));
        assert_eq!(
            e.omega().unwrap().convert(Basis::Homogeneous).unwrap(),
            h
        );
        // omega p_k = (-1)^(k-1) p_k
        let p = SymFunc::basis_element(Basis::PowerSum, part(&[4]));
        assert_eq!(p.omega().unwrap(), p.scale(&QtRational::from_int(-1)));
        // omega s_lambda = s_{lambda*}
        let f = SymFunc::schur(part(&[3, 1]));
        assert_eq!(f.omega().unwrap(), SymFunc::schur(part(&[2, 1, 1])));
    }

    #[test]
    fn omega_involution_random() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for _ in 0..10 {
            let d = rng.gen_range(1..=6i64);
            let mut f = SymFunc::zero(Basis::Schur);
            for p in Partition::all(d) {
                if rng.gen_bool(0.4) {
                    f.add_coeff(p, &QtRational::monomial(rng.gen_range(-2..3), 0, 1));
                }
            }
            assert_eq!(f.omega().unwrap().omega().unwrap(), f);
        }
    }

    #[test]
    fn plethysm_examples() {
        let a = QtAlphabet::one_minus_q();
        // p_k[1-q] = 1 - q^k
        let p3 = SymFunc::basis_element(Basis::PowerSum, part(&[3]));
        assert_eq!(
            p3.plethys(&a).unwrap(),
            "1 + (-1)*q^3".parse().unwrap()
        );
        // (omega p_d)[1-q] = (-1)^(d-1) (1-q^d)
        for d in 1..=5 {
            let p = SymFunc::basis_element(Basis::PowerSum, part(&[d]));
            let lhs = p.omega().unwrap().plethys(&a).unwrap();
            let sign = QtRational::from_int(if (d - 1) % 2 == 0 { 1 } else { -1 });
            let rhs = sign.mul(
                &QtRational::one().sub(&QtRational::monomial(1, d, 0)),
            );
            assert_eq!(lhs, rhs);
        }
        // (omega s_2)[1-q] = -q(1-q)
        let s2 = SymFunc::schur(part(&[2]));
        let lhs = s2.omega().unwrap().plethys(&a).unwrap();
        assert_eq!(lhs, "(-1)*q + q^2".parse().unwrap());
    }

    #[test]
    fn plethysm_multiplicative() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let a = QtAlphabet::one_minus_q();
        for _ in 0..10 {
            let mut mk = |rng: &mut rand_chacha::ChaCha8Rng| {
                let d = rng.gen_range(1..=3i64);
                let parts = Partition::all(d);
                let mut f = SymFunc::zero(Basis::Schur);
                for p in parts {
                    f.add_coeff(p, &QtRational::from_int(rng.gen_range(-2..3)));
                }
                f
            };
            let f = mk(&mut rng);
            let g = mk(&mut rng);
            let lhs = f.mul(&g).unwrap().plethys(&a).unwrap();
            let rhs = f.plethys(&a).unwrap().mul(&g.plethys(&a).unwrap());
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn coproduct_components() {
        // s_2[X+Y]_{1,1} = s_1 (x) s_1
        let s2 = SymFunc::schur(part(&[2]));
        let c = s2.coproduct_component(1).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c[&(part(&[1]), part(&[1]))], QtRational::one());
        // e_2[X+Y]_{1,1} = e_1 (x) e_1 = s_1 (x) s_1
        let e2 = SymFunc::basis_element(Basis::Elementary, part(&[2]));
        let c = e2.coproduct_component(1).unwrap();
        assert_eq!(c[&(part(&[1]), part(&[1]))], QtRational::one());
        // p_d is primitive: inner components vanish
        for d in 2..=5 {
            let p = SymFunc::basis_element(Basis::PowerSum, part(&[d]));
            for k in 1..d as i64 {
                assert!(p.coproduct_component(k).unwrap().is_empty());
            }
        }
    }

    #[test]
    fn coproduct_coassociative() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        for _ in 0..6 {
            let d = rng.gen_range(2..=5i64);
            let mut f = SymFunc::zero(Basis::Schur);
            for p in Partition::all(d) {
                f.add_coeff(p, &QtRational::from_int(rng.gen_range(-2..3)));
            }
            for k1 in 0..=d {
                for k2 in 0..=(d - k1) {
                    let k3 = d - k1 - k2;
                    // route 1: split off degree k1, then split the rest
                    let mut lhs: BTreeMap<(Partition, Partition, Partition), QtRational> =
                        BTreeMap::new();
                    for ((a, rest), c) in f.coproduct_component(k1).unwrap() {
                        let rest_f = SymFunc::basis_element(Basis::Schur, rest.clone());
                        for ((b, cc), c2) in rest_f.coproduct_component(k2).unwrap() {
                            let _ = k3;
                            let key = (a.clone(), b, cc);
                            let add = c.mul(&c2);
                            let cur = lhs.get(&key).cloned().unwrap_or_else(QtRational::zero);
                            let v = cur.add(&add);
                            if v.is_zero() {
                                lhs.remove(&key);
                            } else {
                                lhs.insert(key, v);
                            }
                        }
                    }
                    // route 2: split off degree k1+k2, then split the front
                    let mut rhs: BTreeMap<(Partition, Partition, Partition), QtRational> =
                        BTreeMap::new();
                    for ((front, c3), c) in f.coproduct_component(k1 + k2).unwrap() {
                        let front_f = SymFunc::basis_element(Basis::Schur, front.clone());
                        for ((a, b), c2) in front_f.coproduct_component(k1).unwrap() {
                            let key = (a, b, c3.clone());
                            let add = c.mul(&c2);
                            let cur = rhs.get(&key).cloned().unwrap_or_else(QtRational::zero);
                            let v = cur.add(&add);
                            if v.is_zero() {
                                rhs.remove(&key);
                            } else {
                                rhs.insert(key, v);
                            }
                        }
                    }
                    assert_eq!(lhs, rhs);
                }
            }
        }
    }

    #[test]
    fn from_polynomial_examples() {
        // x1x2 + x1x3 + x2x3 = m_{11} = e_2
        let mut p = VarPoly::zero(3);
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            let mut e = vec![0u16; 3];
            e[i] = 1;
            e[j] = 1;
            p.add_term(e, QtRational::one());
        }
        let f = SymFunc::from_polynomial(&p, 2).unwrap();
        assert_eq!(f.coeff(&part(&[1, 1])), QtRational::one());
        assert!(f.coeff(&part(&[2])).is_zero());

        // sum_{i<=j} x_i x_j + q sum_{i>j} = s_2 + q s_{11}
        let mut p = VarPoly::zero(3);
        for i in 0..3 {
            for j in 0..3 {
                let mut e = vec![0u16; 3];
                e[i] += 1;
                e[j] += 1;
                let c = if i <= j {
                    QtRational::one()
                } else {
                    QtRational::q()
                };
                p.add_term(e, c);
            }
        }
        let f = SymFunc::from_polynomial(&p, 2)
            .unwrap()
            .convert(Basis::Schur)
            .unwrap();
        assert_eq!(f.coeff(&part(&[2])), QtRational::one());
        assert_eq!(f.coeff(&part(&[1, 1])), QtRational::q());

        // asymmetric input is rejected
        let mut p = VarPoly::zero(2);
        p.add_term(vec![2, 0], QtRational::one());
        assert!(SymFunc::from_polynomial(&p, 2).is_err());
    }

    #[test]
    fn from_polynomial_inverts_expansion() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        for _ in 0..8 {
            let d = rng.gen_range(1..=6i64);
            let mut f = SymFunc::zero(Basis::Monomial);
            for p in Partition::all(d) {
                if rng.gen_bool(0.5) {
                    f.add_coeff(p, &QtRational::monomial(rng.gen_range(-2..3), 1, 0));
                }
            }
            let poly = f.expand_in_vars(6).unwrap();
            if f.is_zero() {
                continue;
            }
            let g = SymFunc::from_polynomial(&poly, d).unwrap();
            assert_eq!(f, g);
        }
    }

    #[test]
    fn schur_text_round_trip() {
        let mut f = SymFunc::zero(Basis::Schur);
        f.add_coeff(part(&[3, 1]), &QtRational::one());
        f.add_coeff(part(&[2, 2]), &QtRational::q().add(&QtRational::t()));
        let s = f.to_string();
        assert_eq!(s, "(q + t)*s[2,2] + s[3,1]");
        let g = SymFunc::parse(&s, Basis::Schur).unwrap();
        assert_eq!(f, g);
        // constants print bare
        let one = SymFunc::one(Basis::Schur);
        assert_eq!(one.to_string(), "1");
        assert_eq!(SymFunc::parse("1", Basis::Schur).unwrap(), one);
    }
}
