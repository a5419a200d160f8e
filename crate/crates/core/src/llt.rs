//! LLT polynomials by tableau enumeration: the attacking-inversions
//! generating function over semistandard tableaux on a tuple of skew shapes,
//! super tableaux over a signed alphabet, the coproduct statistic, and the
//! plethystic specialization at 1-q.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::error::Error;
use crate::par;
use crate::qt::QtRational;
use crate::shapes::{SkewShape, SkewTuple};
use crate::symfunc::{Basis, SymFunc};
use crate::varpoly::VarPoly;
use crate::Result;

/// A letter of the signed alphabet 1 < 2 < ... < 1' < 2' < ...; negatives
/// compare above every positive.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct SuperLetter {
    pub negative: bool,
    pub value: u32,
}

/// Semistandard fillings of one skew shape with entries 1..=n, returned as
/// value vectors aligned with `fill_order`.
fn enumerate_ssyt(shape: &SkewShape, n: usize, fill_order: &[(i32, i32)]) -> Vec<Vec<u8>> {
    let pos: HashMap<(i32, i32), usize> = fill_order
        .iter()
        .enumerate()
        .map(|(i, &b)| (b, i))
        .collect();
    let mut out = Vec::new();
    let mut values = vec![0u8; fill_order.len()];
    fn rec(
        shape: &SkewShape,
        n: u8,
        fill_order: &[(i32, i32)],
        pos: &HashMap<(i32, i32), usize>,
        values: &mut Vec<u8>,
        idx: usize,
        out: &mut Vec<Vec<u8>>,
    ) {
        if idx == fill_order.len() {
            out.push(values.clone());
            return;
        }
        let (col, row) = fill_order[idx];
        let mut lo = 1u8;
        if shape.contains(col - 1, row) {
            lo = lo.max(values[pos[&(col - 1, row)]]);
        }
        if shape.contains(col, row - 1) {
            lo = lo.max(values[pos[&(col, row - 1)]] + 1);
        }
        for v in lo..=n {
            values[idx] = v;
            rec(shape, n, fill_order, pos, values, idx + 1, out);
        }
        values[idx] = 0;
    }
    rec(shape, n as u8, fill_order, &pos, &mut values, 0, &mut out);
    out
}

/// Row-major bottom-up order; west and south neighbours come first.
fn fill_order(shape: &SkewShape) -> Vec<(i32, i32)> {
    let mut boxes = shape.boxes();
    boxes.sort_unstable_by_key(|&(i, j)| (j, i));
    boxes
}

struct TupleEnumeration {
    /// per shape: fillings (value vectors in that shape's fill order)
    fillings: Vec<Vec<Vec<u8>>>,
    /// per shape: global 0-based reading index of each fill-order box
    positions: Vec<Vec<usize>>,
    /// attacking pairs as 0-based reading indices
    attacks: Vec<(usize, usize)>,
    n_boxes: usize,
}

fn prepare(t: &SkewTuple, n: usize) -> TupleEnumeration {
    let reading: HashMap<(usize, i32, i32), usize> = t
        .reading_order()
        .iter()
        .enumerate()
        .map(|(i, b)| ((b.shape, b.col, b.row), i))
        .collect();
    let mut fillings = Vec::new();
    let mut positions = Vec::new();
    for (s, shape) in t.shapes().iter().enumerate() {
        let order = fill_order(shape);
        positions.push(
            order
                .iter()
                .map(|&(col, row)| reading[&(s + 1, col, row)])
                .collect(),
        );
        fillings.push(enumerate_ssyt(shape, n, &order));
    }
    TupleEnumeration {
        fillings,
        positions,
        attacks: t
            .attacking_pairs()
            .into_iter()
            .map(|(a, b)| (a - 1, b - 1))
            .collect(),
        n_boxes: t.n_boxes(),
    }
}

/// The full monomial expansion of the LLT polynomial in `n` variables: the
/// sum of q^{inv(T)} x^T over semistandard tableaux with entries <= n.
pub fn llt_varpoly(t: &SkewTuple, n: usize) -> VarPoly {
    let nv = n.max(1);
    if t.n_boxes() == 0 {
        let mut out = VarPoly::zero(nv);
        out.add_term(vec![0; nv], QtRational::one());
        return out;
    }
    let data = prepare(t, n);
    // parallelize over the first shape's fillings
    let first: Vec<Vec<u8>> = data.fillings[0].clone();
    par::map_reduce(
        first,
        |f0| {
            let mut out = VarPoly::zero(nv);
            let mut values = vec![0u8; data.n_boxes];
            for (i, &v) in f0.iter().enumerate() {
                values[data.positions[0][i]] = v;
            }
            merge_shapes(&data, 1, &mut values, &mut out);
            out
        },
        || VarPoly::zero(nv),
        VarPoly::merge,
    )
}

fn merge_shapes(data: &TupleEnumeration, s: usize, values: &mut Vec<u8>, out: &mut VarPoly) {
    if s == data.fillings.len() {
        let inv = data
            .attacks
            .iter()
            .filter(|&&(a, b)| values[a] > values[b])
            .count();
        let mut content = vec![0u16; out.nvars];
        for &v in values.iter() {
            content[(v - 1) as usize] += 1;
        }
        out.add_term(content, QtRational::monomial(1, inv as i32, 0));
        return;
    }
    for f in &data.fillings[s] {
        for (i, &v) in f.iter().enumerate() {
            values[data.positions[s][i]] = v;
        }
        merge_shapes(data, s + 1, values, out);
    }
}

/// The LLT polynomial G_nu(X;q) as a symmetric function in the Schur basis,
/// computed by enumerating tableaux with entries <= n and reading the result
/// off its expansion.  Requires n >= number of boxes.
pub fn llt(t: &SkewTuple, n: usize) -> Result<SymFunc> {
    let d = t.n_boxes() as i64;
    if (n as i64) < d {
        return Err(Error::InvalidInput(format!(
            "{} variables cannot determine a degree-{} symmetric function",
            n, d
        )));
    }
    if d == 0 {
        return Ok(SymFunc::one(Basis::Schur));
    }
    let poly = llt_varpoly(t, n);
    SymFunc::from_polynomial(&poly, d)?.convert(Basis::Schur)
}

/// The statistic A(nu'', nu') of a lower-ideal split: attacking pairs (a, b)
/// with a in the complement and b in the ideal.
pub fn coproduct_statistic(t: &SkewTuple, ideal: &BTreeSet<usize>) -> Result<i64> {
    if !t.is_lower_ideal(ideal) {
        return Err(Error::InvalidInput(
            "index set is not a lower order ideal".into(),
        ));
    }
    Ok(t.attacking_pairs()
        .into_iter()
        .filter(|(a, b)| !ideal.contains(a) && ideal.contains(b))
        .count() as i64)
}

/// Super tableaux on one shape: entries encoded 1..=nx (positive) and
/// nx+1..=nx+ny (negative), weakly increasing along rows and columns,
/// positives strict up columns, negatives strict along rows.
fn enumerate_super(
    shape: &SkewShape,
    nx: usize,
    ny: usize,
    fill_order: &[(i32, i32)],
) -> Vec<Vec<u8>> {
    let pos: HashMap<(i32, i32), usize> = fill_order
        .iter()
        .enumerate()
        .map(|(i, &b)| (b, i))
        .collect();
    let top = (nx + ny) as u8;
    let mut out = Vec::new();
    let mut values = vec![0u8; fill_order.len()];
    #[allow(clippy::too_many_arguments)]
    fn rec(
        shape: &SkewShape,
        top: u8,
        nx: usize,
        fill_order: &[(i32, i32)],
        pos: &HashMap<(i32, i32), usize>,
        values: &mut Vec<u8>,
        idx: usize,
        out: &mut Vec<Vec<u8>>,
    ) {
        if idx == fill_order.len() {
            out.push(values.clone());
            return;
        }
        let (col, row) = fill_order[idx];
        let west = shape
            .contains(col - 1, row)
            .then(|| values[pos[&(col - 1, row)]]);
        let south = shape
            .contains(col, row - 1)
            .then(|| values[pos[&(col, row - 1)]]);
        for v in 1..=top {
            let neg = v as usize > nx;
            if let Some(w) = west {
                if v < w || (v == w && neg) {
                    continue;
                }
            }
            if let Some(s) = south {
                if v < s || (v == s && !neg) {
                    continue;
                }
            }
            values[idx] = v;
            rec(shape, top, nx, fill_order, pos, values, idx + 1, out);
        }
        values[idx] = 0;
    }
    rec(shape, top, nx, fill_order, &pos, &mut values, 0, &mut out);
    out
}

/// The super LLT expansion: sum of q^{inv(T)} x^{T+} y^{T-} over super
/// tableaux with positive letters <= nx and negative letters <= ny, as a
/// polynomial in nx + ny variables (x's first).
pub fn super_llt(t: &SkewTuple, nx: usize, ny: usize) -> VarPoly {
    let nv = (nx + ny).max(1);
    let mut out = VarPoly::zero(nv);
    if t.n_boxes() == 0 {
        out.add_term(vec![0; nv], QtRational::one());
        return out;
    }
    let reading: HashMap<(usize, i32, i32), usize> = t
        .reading_order()
        .iter()
        .enumerate()
        .map(|(i, b)| ((b.shape, b.col, b.row), i))
        .collect();
    let mut fillings = Vec::new();
    let mut positions: Vec<Vec<usize>> = Vec::new();
    for (s, shape) in t.shapes().iter().enumerate() {
        let order = fill_order(shape);
        positions.push(
            order
                .iter()
                .map(|&(col, row)| reading[&(s + 1, col, row)])
                .collect(),
        );
        fillings.push(enumerate_super(shape, nx, ny, &order));
    }
    let attacks: Vec<(usize, usize)> = t
        .attacking_pairs()
        .into_iter()
        .map(|(a, b)| (a - 1, b - 1))
        .collect();
    fn rec(
        fillings: &[Vec<Vec<u8>>],
        positions: &[Vec<usize>],
        attacks: &[(usize, usize)],
        nx: usize,
        s: usize,
        values: &mut Vec<u8>,
        out: &mut VarPoly,
    ) {
        if s == fillings.len() {
            let inv = attacks
                .iter()
                .filter(|&&(a, b)| {
                    values[a] > values[b] || (values[a] == values[b] && values[a] as usize > nx)
                })
                .count();
            let mut exps = vec![0u16; out.nvars];
            for &v in values.iter() {
                exps[(v - 1) as usize] += 1;
            }
            out.add_term(exps, QtRational::monomial(1, inv as i32, 0));
            return;
        }
        for f in &fillings[s] {
            for (i, &v) in f.iter().enumerate() {
                values[positions[s][i]] = v;
            }
            rec(fillings, positions, attacks, nx, s + 1, values, out);
        }
    }
    rec(
        &fillings,
        &positions,
        &attacks,
        nx,
        0,
        &mut vec![0u8; t.n_boxes()],
        &mut out,
    );
    out
}

/// The plethystic specialization (omega G_nu)[1-q].  Nonzero exactly when
/// every diagonal of the tuple has one box and there are no attacking pairs;
/// the value is then a product of (-q)^p (1-q) over the connected ribbon
/// pieces, where p is one less than the piece's number of columns.
pub fn llt_at_one_minus_q(t: &SkewTuple) -> QtRational {
    if t.n_boxes() == 0 {
        return QtRational::one();
    }
    let stats = t.stats();
    if stats.attack_a > 0 || stats.gamma.iter().any(|&g| g > 1) {
        return QtRational::zero();
    }
    let one_minus_q = QtRational::one().sub(&QtRational::q());
    let mut acc = QtRational::one();
    for shape in t.shapes() {
        for comp in shape.connected_components() {
            let cols: BTreeSet<i32> = comp.iter().map(|b| b.0).collect();
            let p = cols.len() as i64 - 1;
            let sign = QtRational::monomial(if p % 2 == 0 { 1 } else { -1 }, p as i32, 0);
            acc = acc.mul(&sign).mul(&one_minus_q);
        }
    }
    acc
}

/// Expand omega_Y G_nu[X+Y] in nx + ny variables through the coproduct; used
/// to check the super-tableau identity.
pub fn omega_y_coproduct_expansion(t: &SkewTuple, nx: usize, ny: usize) -> Result<VarPoly> {
    let d = t.n_boxes() as i64;
    let nv = (nx + ny).max(1);
    let mut out = VarPoly::zero(nv);
    if d == 0 {
        out.add_term(vec![0; nv], QtRational::one());
        return Ok(out);
    }
    let g = llt(t, d as usize)?;
    for k in 0..=d {
        let comp: BTreeMap<_, _> = g.coproduct_component(k)?;
        for ((a, b), c) in comp {
            // omega on the Y side sends s_b to s_{b*}
            if a.len() > nx || b.conjugate().len() > ny {
                continue;
            }
            let fx = SymFunc::schur(a).expand_in_vars(nx.max(1))?;
            let fy = SymFunc::schur(b.conjugate()).expand_in_vars(ny.max(1))?;
            for (ex, cx) in &fx.terms {
                for (ey, cy) in &fy.terms {
                    let mut e = vec![0u16; nv];
                    e[..nx].copy_from_slice(&ex[..nx]);
                    e[nx..nx + ny].copy_from_slice(&ey[..ny]);
                    out.add_term(e, c.mul(cx).mul(cy));
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::Partition;
    use crate::symfunc::QtAlphabet;
    use crate::testutil::random_tuple;

    fn shape(outer: &[i32], inner: &[i32]) -> SkewShape {
        SkewShape::new(outer.to_vec(), inner.to_vec()).unwrap()
    }

    fn part(p: &[i32]) -> Partition {
        Partition::new(p.to_vec())
    }

    #[test]
    fn single_shape_is_schur() {
        let t = SkewTuple::new(vec![shape(&[2, 1], &[])]);
        let g = llt(&t, 3).unwrap();
        assert_eq!(g, SymFunc::schur(part(&[2, 1])));
        // q-free even for skew shapes
        let t = SkewTuple::new(vec![shape(&[3, 2], &[1, 0])]);
        let g = llt(&t, 4).unwrap();
        for (_, c) in g.coeffs() {
            assert!(c.is_polynomial() && c.numer().is_q_only());
        }
    }

    #[test]
    fn two_single_boxes() {
        let t = SkewTuple::new(vec![shape(&[1], &[]), shape(&[1], &[])]);
        let g = llt(&t, 2).unwrap();
        assert_eq!(g.coeff(&part(&[2])), QtRational::one());
        assert_eq!(g.coeff(&part(&[1, 1])), QtRational::q());
    }

    #[test]
    fn empty_tuple_is_one() {
        let t = SkewTuple::new(vec![]);
        assert_eq!(llt(&t, 1).unwrap(), SymFunc::one(Basis::Schur));
    }

    #[test]
    fn too_few_variables_rejected() {
        let t = SkewTuple::new(vec![shape(&[2, 1], &[])]);
        assert!(llt(&t, 2).is_err());
    }

    #[test]
    fn stability_in_variable_count() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        for _ in 0..6 {
            let t = random_tuple(&mut rng, 5);
            let d = t.n_boxes();
            let a = llt(&t, d).unwrap();
            let b = llt(&t, d + 1).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn coproduct_statistic_examples() {
        let t = SkewTuple::new(vec![shape(&[1], &[]), shape(&[1], &[])]);
        let all: BTreeSet<usize> = [1, 2].into_iter().collect();
        assert_eq!(coproduct_statistic(&t, &all).unwrap(), 0);
        assert_eq!(coproduct_statistic(&t, &BTreeSet::new()).unwrap(), 0);
        // ideal {1}: the attacking pair (1,2) has a = 1 inside the ideal
        let i1: BTreeSet<usize> = [1].into_iter().collect();
        assert_eq!(coproduct_statistic(&t, &i1).unwrap(), 0);
        // ideal {2}: pair (1,2) goes from the complement into the ideal
        let i2: BTreeSet<usize> = [2].into_iter().collect();
        assert_eq!(coproduct_statistic(&t, &i2).unwrap(), 1);
        // non-ideals are rejected
        let t2 = SkewTuple::new(vec![shape(&[2], &[])]);
        let bad: BTreeSet<usize> = [2].into_iter().collect();
        assert!(coproduct_statistic(&t2, &bad).is_err());
    }

    #[test]
    fn super_single_box() {
        let t = SkewTuple::new(vec![shape(&[1], &[])]);
        let p = super_llt(&t, 1, 1);
        assert_eq!(p.coeff(&[1, 0]), QtRational::one());
        assert_eq!(p.coeff(&[0, 1]), QtRational::one());
        assert_eq!(p.terms.len(), 2);
    }

    #[test]
    fn super_two_boxes() {
        // x1^2 + (1+q) x1 y1 + q y1^2
        let t = SkewTuple::new(vec![shape(&[1], &[]), shape(&[1], &[])]);
        let p = super_llt(&t, 1, 1);
        assert_eq!(p.coeff(&[2, 0]), QtRational::one());
        assert_eq!(p.coeff(&[1, 1]), QtRational::one().add(&QtRational::q()));
        assert_eq!(p.coeff(&[0, 2]), QtRational::q());
    }

    #[test]
    fn super_with_no_negatives_is_llt() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(13);
        for _ in 0..5 {
            let t = random_tuple(&mut rng, 4);
            let d = t.n_boxes();
            let a = super_llt(&t, d, 0);
            let b = llt_varpoly(&t, d);
            assert!(a.equals(&b));
        }
    }

    #[test]
    fn one_minus_q_specialization() {
        // any tuple with an attacking pair vanishes
        let t = SkewTuple::new(vec![shape(&[1], &[]), shape(&[1], &[])]);
        assert!(llt_at_one_minus_q(&t).is_zero());
        // single ribbon: (-q)^p (1-q) with p = columns - 1
        let ribbon = shape(&[3, 1], &[]); // hook with 3 columns
        let t = SkewTuple::new(vec![ribbon]);
        let expect = QtRational::monomial(1, 2, 0).mul(&QtRational::one().sub(&QtRational::q()));
        assert_eq!(llt_at_one_minus_q(&t), expect);
        // empty tuple
        assert_eq!(llt_at_one_minus_q(&SkewTuple::new(vec![])), QtRational::one());
        // a non-ribbon single shape vanishes
        let t = SkewTuple::new(vec![shape(&[2, 2], &[])]);
        assert!(llt_at_one_minus_q(&t).is_zero());
    }

    #[test]
    fn one_minus_q_matches_plethysm() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        let alphabet = QtAlphabet::one_minus_q();
        for _ in 0..12 {
            let t = random_tuple(&mut rng, 5);
            let g = llt(&t, t.n_boxes()).unwrap();
            let via_plethysm = g.omega().unwrap().plethys(&alphabet).unwrap();
            assert_eq!(llt_at_one_minus_q(&t), via_plethysm);
        }
    }
}
