//! Shared helpers for the integration suites: an independent cap-truncated
//! oracle for the polynomial part, and random rational points.

use std::collections::{BTreeMap, HashMap};

use catalanimals::catalanimal::Catalanimal;
use catalanimals::partition::Partition;
use catalanimals::qt::{QtPoly, QtRational};
use num_bigint::BigInt;
use num_rational::BigRational;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Brute-force polynomial part: every geometric factor is truncated at
/// multiplicity `cap` and the series is expanded factor by factor.  After the
/// factors with first index i are absorbed, coordinate i is final, so terms
/// whose i-th entry cannot symmetrize to a polynomial character are dropped
/// (an algebraic fact, not part of the truncation).  Callers accept the
/// result only when `cap` and `cap + 1` agree.
pub fn h_pol_oracle(c: &Catalanimal, cap: usize) -> BTreeMap<Partition, QtRational> {
    let l = c.len();
    let d: i64 = c.lambda().iter().sum();
    if d < 0 || l == 0 {
        return BTreeMap::new();
    }
    let rho: Vec<i64> = (0..l).map(|i| (l - 1 - i) as i64).collect();
    let hi = d + l as i64 - 1;
    let mut terms: HashMap<Vec<i64>, QtPoly> = HashMap::new();
    terms.insert(c.lambda().to_vec(), QtPoly::one());
    for i in 1..=l {
        for j in (i + 1)..=l {
            // three independent factors per root, one per membership
            let mut factors: Vec<Vec<QtPoly>> = Vec::new();
            if c.rq().contains(i, j) {
                factors.push((0..=cap).map(|k| QtPoly::monomial(BigInt::from(1), k as i32, 0)).collect());
            }
            if c.rt().contains(i, j) {
                factors.push((0..=cap).map(|k| QtPoly::monomial(BigInt::from(1), 0, k as i32)).collect());
            }
            if c.rqt().contains(i, j) {
                factors.push(vec![QtPoly::one(), QtPoly::monomial(BigInt::from(-1), 1, 1)]);
            }
            for series in factors {
                let mut next: HashMap<Vec<i64>, QtPoly> = HashMap::new();
                for (u, coeff) in &terms {
                    for (k, factor) in series.iter().enumerate() {
                        if factor.is_zero() {
                            continue;
                        }
                        let mut v = u.clone();
                        v[i - 1] += k as i64;
                        v[j - 1] -= k as i64;
                        let add = coeff.mul(factor);
                        let entry = next.entry(v).or_insert_with(QtPoly::zero);
                        *entry = entry.add(&add);
                    }
                }
                next.retain(|_, p| !p.is_zero());
                terms = next;
            }
        }
        terms.retain(|u, _| {
            let vi = u[i - 1] + rho[i - 1];
            0 <= vi && vi <= hi
        });
    }
    let mut out: BTreeMap<Partition, QtRational> = BTreeMap::new();
    for (u, coeff) in terms {
        let vals: Vec<i64> = u.iter().zip(&rho).map(|(x, r)| x + r).collect();
        let mut seen = vals.clone();
        seen.sort_unstable();
        if seen.windows(2).any(|w| w[0] == w[1]) {
            continue;
        }
        let mut inv = 0usize;
        for a in 0..vals.len() {
            for b in (a + 1)..vals.len() {
                if vals[a] < vals[b] {
                    inv += 1;
                }
            }
        }
        let mut sorted = vals;
        sorted.sort_unstable_by(|a, b| b.cmp(a));
        let parts: Vec<i32> = sorted
            .iter()
            .enumerate()
            .map(|(i, &v)| (v - rho[i]) as i32)
            .collect();
        if parts.iter().any(|&p| p < 0) {
            continue;
        }
        let lam = Partition::new(parts);
        let signed = if inv % 2 == 1 { coeff.neg() } else { coeff };
        let cur = out
            .remove(&lam)
            .unwrap_or_else(QtRational::zero)
            .add(&QtRational::from(signed));
        if !cur.is_zero() {
            out.insert(lam, cur);
        }
    }
    out
}

pub fn random_rat(rng: &mut ChaCha8Rng) -> BigRational {
    let num = loop {
        let x = rng.gen_range(-100i64..=100);
        if x != 0 {
            break x;
        }
    };
    let den = rng.gen_range(1i64..=100);
    BigRational::new(BigInt::from(num), BigInt::from(den))
}
