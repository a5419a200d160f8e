//! The modified Macdonald basis and the nabla operator, built independently
//! of the Catalanimal pipeline so it can serve as an oracle.
//!
//! Each basis element is computed from the inv/maj statistics of fillings of
//! the partition diagram.  nabla acts diagonally with eigenvalue
//! t^{n(mu)} q^{n(mu*)}; expansion in the basis is done by a triangular
//! solve after the plethystic twist X -> X(q-1), verified by an exact
//! residual check (with a dense solve as fallback).

use std::collections::{BTreeMap, HashMap};
use std::sync::atomic::{AtomicI64, Ordering};
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::Error;
use crate::par;
use crate::partition::Partition;
use crate::qt::{QtPoly, QtRational};
use crate::symfunc::{Basis, SymFunc};
use crate::Result;

static DEGREE_CAP: AtomicI64 = AtomicI64::new(8);

/// Raise or lower the largest degree for which the basis may be built.
pub fn set_degree_cap(cap: i64) {
    DEGREE_CAP.store(cap, Ordering::SeqCst);
}

pub fn degree_cap() -> i64 {
    DEGREE_CAP.load(Ordering::SeqCst)
}

/// n(mu) = sum (i-1) mu_i.
pub fn n_stat(mu: &Partition) -> i64 {
    mu.parts()
        .iter()
        .enumerate()
        .map(|(i, &p)| i as i64 * p as i64)
        .sum()
}

/// The modified Macdonald basis of one degree: Schur expansions of every
/// H-tilde_mu.
#[derive(Clone, Debug)]
pub struct MacdonaldBasis {
    pub degree: i64,
    pub table: BTreeMap<Partition, SymFunc>,
}

struct NablaTables {
    basis: MacdonaldBasis,
    /// rows: partitions in descending lex order
    rows: Vec<Partition>,
    row_index: HashMap<Partition, usize>,
    /// column j is the basis element H-tilde_mu with mu* = rows[j]
    cols: Vec<Partition>,
    /// twisted[i][j]: coefficient of s_{rows[i]} in H-tilde_{cols[j]}[X(q-1)]
    twisted: Vec<Vec<QtRational>>,
}

static TABLES: OnceLock<Mutex<HashMap<i64, Arc<NablaTables>>>> = OnceLock::new();

fn nabla_tables(d: i64) -> Result<Arc<NablaTables>> {
    let lock = TABLES.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(t) = lock.lock().unwrap().get(&d) {
        return Ok(t.clone());
    }
    let basis = build_basis(d)?;
    let mut rows = Partition::all(d);
    rows.sort_by(|a, b| b.parts().cmp(a.parts()));
    let row_index: HashMap<Partition, usize> = rows
        .iter()
        .enumerate()
        .map(|(i, p)| (p.clone(), i))
        .collect();
    let cols: Vec<Partition> = rows.iter().map(|r| r.conjugate()).collect();
    let q_pow_minus_one = |k: i32| {
        QtRational::monomial(1, k, 0).sub(&QtRational::one())
    };
    let mut twisted = vec![vec![QtRational::zero(); cols.len()]; rows.len()];
    for (j, mu) in cols.iter().enumerate() {
        let g = basis.table[mu].twist_powersum(q_pow_minus_one)?;
        for (lam, c) in g.coeffs() {
            twisted[row_index[lam]][j] = c.clone();
        }
    }
    let t = Arc::new(NablaTables {
        basis,
        rows,
        row_index,
        cols,
        twisted,
    });
    lock.lock().unwrap().insert(d, t.clone());
    Ok(t)
}

/// Build the basis table for one degree from inv/maj fillings.
pub fn modified_macdonald(d: i64) -> Result<MacdonaldBasis> {
    Ok(nabla_tables(d)?.basis.clone())
}

fn build_basis(d: i64) -> Result<MacdonaldBasis> {
    if d < 0 || d > degree_cap() {
        return Err(Error::ResourceCap(format!(
            "modified Macdonald basis requested at degree {} (cap {})",
            d,
            degree_cap()
        )));
    }
    let parts = Partition::all(d);
    let entries = par::map_collect(parts.clone(), |mu| {
        let f = htilde(&mu, d);
        (mu, f)
    });
    let mut table = BTreeMap::new();
    for (mu, f) in entries {
        table.insert(mu, f?);
    }
    Ok(MacdonaldBasis { degree: d, table })
}

struct DiagramData {
    /// boxes in reading order (rows top to bottom, left to right)
    n: usize,
    south: Vec<Option<usize>>,
    arm: Vec<i64>,
    leg_plus_one: Vec<i64>,
    attacks: Vec<(usize, usize)>,
}

fn diagram_data(mu: &Partition) -> DiagramData {
    let rows = mu.len();
    let mut boxes: Vec<(i32, i32)> = Vec::new(); // (col, row), row 1 at bottom
    for j in (1..=rows).rev() {
        for i in 1..=mu.part(j - 1) {
            boxes.push((i, j as i32));
        }
    }
    let pos: HashMap<(i32, i32), usize> = boxes
        .iter()
        .enumerate()
        .map(|(k, &b)| (b, k))
        .collect();
    let contains = |i: i32, j: i32| -> bool {
        j >= 1 && (j as usize) <= rows && i >= 1 && i <= mu.part(j as usize - 1)
    };
    let n = boxes.len();
    let mut south = vec![None; n];
    let mut arm = vec![0i64; n];
    let mut leg_plus_one = vec![0i64; n];
    let mut attacks = Vec::new();
    for (k, &(i, j)) in boxes.iter().enumerate() {
        if contains(i, j - 1) {
            south[k] = Some(pos[&(i, j - 1)]);
        }
        arm[k] = (mu.part(j as usize - 1) - i) as i64;
        let mut leg = 0i64;
        let mut jj = j + 1;
        while contains(i, jj) {
            leg += 1;
            jj += 1;
        }
        leg_plus_one[k] = leg + 1;
        // attacking partners appearing later in reading order: same row to
        // the east, or the row below strictly to the west
        for (k2, &(i2, j2)) in boxes.iter().enumerate().skip(k + 1) {
            if (j2 == j && i2 > i) || (j2 == j - 1 && i2 < i) {
                attacks.push((k, k2));
            }
        }
    }
    DiagramData {
        n,
        south,
        arm,
        leg_plus_one,
        attacks,
    }
}

/// H-tilde_mu as a Schur-basis symmetric function: the generating function
/// q^{inv} t^{maj} over all fillings, with monomial coefficients read off at
/// partition contents (the generating function is symmetric).
fn htilde(mu: &Partition, d: i64) -> Result<SymFunc> {
    if d == 0 {
        return Ok(SymFunc::one(Basis::Schur));
    }
    let data = diagram_data(mu);
    let contents = Partition::all(d);
    let pieces = par::map_collect(contents, |lam| {
        let hist = fill_histogram(&data, &lam);
        (lam, hist)
    });
    let mut coeffs = BTreeMap::new();
    for (lam, hist) in pieces {
        let mut coeff = QtPoly::zero();
        for ((inv, maj), count) in hist {
            coeff.add_term((inv, maj), &num_bigint::BigInt::from(count));
        }
        coeffs.insert(lam, QtRational::from(coeff));
    }
    SymFunc::from_coeffs(Basis::Monomial, coeffs).convert(Basis::Schur)
}

/// Histogram of (inv, maj) over fillings of the diagram with content lam.
fn fill_histogram(data: &DiagramData, lam: &Partition) -> HashMap<(i32, i32), i64> {
    let mut counts: Vec<i64> = lam.parts().iter().map(|&x| x as i64).collect();
    let mut values = vec![0u8; data.n];
    let mut hist = HashMap::new();
    fn rec(
        data: &DiagramData,
        counts: &mut Vec<i64>,
        values: &mut Vec<u8>,
        idx: usize,
        hist: &mut HashMap<(i32, i32), i64>,
    ) {
        if idx == data.n {
            let mut maj = 0i64;
            let mut arm_des = 0i64;
            for (k, s) in data.south.iter().enumerate() {
                if let Some(sk) = s {
                    if values[k] > values[*sk] {
                        maj += data.leg_plus_one[k];
                        arm_des += data.arm[k];
                    }
                }
            }
            let big_inv = data
                .attacks
                .iter()
                .filter(|&&(u, v)| values[u] > values[v])
                .count() as i64;
            let inv = big_inv - arm_des;
            debug_assert!(inv >= 0, "negative inv statistic");
            *hist.entry((inv as i32, maj as i32)).or_insert(0) += 1;
            return;
        }
        for v in 0..counts.len() {
            if counts[v] == 0 {
                continue;
            }
            counts[v] -= 1;
            values[idx] = (v + 1) as u8;
            rec(data, counts, values, idx + 1, hist);
            counts[v] += 1;
        }
    }
    rec(data, &mut counts, &mut values, 0, &mut hist);
    hist
}

/// Apply nabla^m: expand in the modified Macdonald basis, scale by the
/// eigenvalues (t^{n(mu)} q^{n(mu*)})^m, and convert back to Schur.
pub fn nabla_pow(f: &SymFunc, m: i64) -> Result<SymFunc> {
    let schur = f.convert(Basis::Schur)?;
    let mut degrees: Vec<i64> = schur.coeffs().keys().map(|p| p.size()).collect();
    degrees.sort_unstable();
    degrees.dedup();
    let mut out = SymFunc::zero(Basis::Schur);
    for d in degrees {
        let component = SymFunc::from_coeffs(
            Basis::Schur,
            schur
                .coeffs()
                .iter()
                .filter(|(l, _)| l.size() == d)
                .map(|(l, c)| (l.clone(), c.clone()))
                .collect(),
        );
        let t = nabla_tables(d)?;
        let coords = expand_in_htilde(&t, &component)?;
        for (j, c) in coords.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mu = &t.cols[j];
            let eig = QtRational::monomial(
                1,
                (m * n_stat(&mu.conjugate())) as i32,
                (m * n_stat(mu)) as i32,
            );
            let scaled = c.mul(&eig);
            for (lam, hc) in t.basis.table[mu].coeffs() {
                out.add_coeff(lam.clone(), &scaled.mul(hc));
            }
        }
    }
    out.convert(f.basis())
}

/// Coordinates of f in the H-tilde basis, ordered like `tables.cols`.
fn expand_in_htilde(t: &NablaTables, f: &SymFunc) -> Result<Vec<QtRational>> {
    let n = t.rows.len();
    // twist f the same way and solve the triangular system
    let twisted = f.twist_powersum(|k| QtRational::monomial(1, k, 0).sub(&QtRational::one()))?;
    let mut rhs = vec![QtRational::zero(); n];
    for (lam, c) in twisted.coeffs() {
        rhs[t.row_index[lam]] = c.clone();
    }
    let mut coords = vec![QtRational::zero(); n];
    let mut residual = rhs.clone();
    for j in 0..n {
        let diag = &t.twisted[j][j];
        let c = residual[j].try_div(diag)?;
        if !c.is_zero() {
            for i in j..n {
                let sub = c.mul(&t.twisted[i][j]);
                residual[i] = residual[i].sub(&sub);
            }
        }
        coords[j] = c;
    }
    if residual.iter().all(|r| r.is_zero()) {
        return Ok(coords);
    }
    // dense fallback; only reachable if the triangular pattern failed
    dense_solve(&t.twisted, &rhs)
}

fn dense_solve(m: &[Vec<QtRational>], rhs: &[QtRational]) -> Result<Vec<QtRational>> {
    let n = rhs.len();
    let mut a: Vec<Vec<QtRational>> = m.to_vec();
    let mut b = rhs.to_vec();
    let mut perm: Vec<usize> = (0..n).collect();
    for col in 0..n {
        let pivot = (col..n)
            .find(|&r| !a[r][col].is_zero())
            .ok_or_else(|| Error::InvalidInput("singular basis matrix".into()))?;
        a.swap(col, pivot);
        b.swap(col, pivot);
        perm.swap(col, pivot);
        let p = a[col][col].clone();
        for r in (col + 1)..n {
            if a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].try_div(&p)?;
            for j in col..n {
                let sub = f.mul(&a[col][j]);
                a[r][j] = a[r][j].sub(&sub);
            }
            let sub = f.mul(&b[col]);
            b[r] = b[r].sub(&sub);
        }
    }
    let mut x = vec![QtRational::zero(); n];
    for col in (0..n).rev() {
        let mut acc = b[col].clone();
        for j in (col + 1)..n {
            let sub = a[col][j].mul(&x[j]);
            acc = acc.sub(&sub);
        }
        x[col] = acc.try_div(&a[col][col])?;
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    fn part(p: &[i32]) -> Partition {
        Partition::new(p.to_vec())
    }

    fn qtr(s: &str) -> QtRational {
        s.parse().unwrap()
    }

    #[test]
    fn n_stat_examples() {
        assert_eq!(n_stat(&part(&[5])), 0);
        assert_eq!(n_stat(&part(&[1, 1, 1, 1])), 6);
        assert_eq!(n_stat(&part(&[2, 1])), 1);
        assert_eq!(n_stat(&part(&[2, 1]).conjugate()), 1);
    }

    #[test]
    fn small_tables() {
        let b1 = modified_macdonald(1).unwrap();
        assert_eq!(b1.table[&part(&[1])], SymFunc::schur(part(&[1])));

        let b2 = modified_macdonald(2).unwrap();
        let h2 = &b2.table[&part(&[2])];
        assert_eq!(h2.coeff(&part(&[2])), QtRational::one());
        assert_eq!(h2.coeff(&part(&[1, 1])), QtRational::q());
        let h11 = &b2.table[&part(&[1, 1])];
        assert_eq!(h11.coeff(&part(&[1, 1])), QtRational::t());

        let b3 = modified_macdonald(3).unwrap();
        let h21 = &b3.table[&part(&[2, 1])];
        assert_eq!(h21.coeff(&part(&[3])), QtRational::one());
        assert_eq!(h21.coeff(&part(&[2, 1])), QtRational::q().add(&QtRational::t()));
        assert_eq!(h21.coeff(&part(&[1, 1, 1])), QtRational::q().mul(&QtRational::t()));
        let h3 = &b3.table[&part(&[3])];
        assert_eq!(h3.coeff(&part(&[2, 1])), qtr("q + q^2"));
        assert_eq!(h3.coeff(&part(&[1, 1, 1])), qtr("q^3"));
        let h111 = &b3.table[&part(&[1, 1, 1])];
        assert_eq!(h111.coeff(&part(&[2, 1])), qtr("t + t^2"));
        assert_eq!(h111.coeff(&part(&[1, 1, 1])), qtr("t^3"));
    }

    #[test]
    fn self_checks() {
        for d in 1..=5i64 {
            let b = modified_macdonald(d).unwrap();
            for (mu, h) in &b.table {
                // conjugation symmetry: H_{mu*}(X;t,q) = H_mu(X;q,t)
                assert_eq!(b.table[&mu.conjugate()].swap_qt(), h.clone(), "mu = {}", mu);
                // specialization at q = t = 1 is (s_1)^d = p_1^d
                let p = h.convert(Basis::PowerSum).unwrap();
                let one = BigRational::from_integer(1.into());
                let vals = p.eval_coeffs(&one, &one).unwrap();
                let ones = Partition::new(vec![1; d as usize]);
                assert_eq!(vals.len(), 1);
                assert_eq!(vals[&ones], BigRational::from_integer(1.into()));
                // single row: coefficients in Z[q] only
                if mu.len() == 1 {
                    for (_, c) in h.coeffs() {
                        assert!(c.is_polynomial() && c.numer().is_q_only());
                    }
                }
            }
        }
    }

    #[test]
    fn eigen_property() {
        for d in 1..=5i64 {
            let b = modified_macdonald(d).unwrap();
            for (mu, h) in &b.table {
                let lhs = nabla_pow(h, 1).unwrap();
                let eig = QtRational::monomial(
                    1,
                    n_stat(&mu.conjugate()) as i32,
                    n_stat(mu) as i32,
                );
                assert_eq!(lhs, h.scale(&eig), "mu = {}", mu);
            }
        }
    }

    #[test]
    fn nabla_fixes_s1_and_inverts() {
        let s1 = SymFunc::schur(part(&[1]));
        assert_eq!(nabla_pow(&s1, 5).unwrap(), s1);
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        for _ in 0..5 {
            let d = rng.gen_range(1..=5i64);
            let mut f = SymFunc::zero(Basis::Schur);
            for p in Partition::all(d) {
                f.add_coeff(p, &QtRational::from_int(rng.gen_range(-2..3)));
            }
            let m = rng.gen_range(1..=2i64);
            let g = nabla_pow(&nabla_pow(&f, m).unwrap(), -m).unwrap();
            assert_eq!(f, g);
        }
    }

    #[test]
    fn omega_nabla_e3() {
        let e3 = SymFunc::basis_element(Basis::Elementary, part(&[3]));
        let result = nabla_pow(&e3, 1).unwrap().omega().unwrap();
        let mut expect = SymFunc::zero(Basis::Schur);
        expect.add_coeff(part(&[1, 1, 1]), &QtRational::one());
        expect.add_coeff(part(&[2, 1]), &qtr("q + t + q^2 + q*t + t^2"));
        expect.add_coeff(part(&[3]), &qtr("q*t + q^3 + q^2*t + q*t^2 + t^3"));
        assert_eq!(result.convert(Basis::Schur).unwrap(), expect);
    }

    #[test]
    fn degree_cap_enforced() {
        assert!(modified_macdonald(9).is_err());
    }
}
