//! Cross-module properties on randomized inputs, plus proptest round trips
//! for the textual formats.

mod common;

use std::collections::BTreeSet;

use catalanimals::catalanimal::{build_llt, build_llt_mn, h_pol};
use catalanimals::llt::{llt, llt_varpoly};
use catalanimals::partition::Partition;
use catalanimals::qt::{QtPoly, QtRational};
use catalanimals::shapes::{SkewTuple, StretchSpec};
use catalanimals::symfunc::{Basis, SymFunc};
use catalanimals::testutil::random_tuple;
use catalanimals::varpoly::VarPoly;
use num_bigint::BigInt;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn llt_symmetry_on_random_tuples() {
    // the tableau generating function always passes the symmetry check in
    // from_polynomial
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for _ in 0..100 {
        let t = random_tuple(&mut rng, 6);
        let d = t.n_boxes();
        let poly = llt_varpoly(&t, d);
        assert!(SymFunc::from_polynomial(&poly, d as i64).is_ok());
    }
}

#[test]
fn llt_coproduct_identity() {
    // G_nu[X+Y] agrees with the ideal/co-ideal expansion with the attacking
    // statistic as the q power, in Schur (x) Schur
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    for _ in 0..10 {
        let t = random_tuple(&mut rng, 5);
        let d = t.n_boxes() as i64;
        let g = llt(&t, d.max(1) as usize).unwrap();
        for k in 0..=d {
            let lhs = g.coproduct_component(k).unwrap();
            let mut rhs: std::collections::BTreeMap<(Partition, Partition), QtRational> =
                Default::default();
            for ideal in t.lower_ideals().unwrap() {
                if ideal.len() as i64 != k {
                    continue;
                }
                let stat = catalanimals::llt::coproduct_statistic(&t, &ideal).unwrap();
                let comp: BTreeSet<usize> =
                    (1..=t.n_boxes()).filter(|p| !ideal.contains(p)).collect();
                let inner = t.sub_tuple(&ideal).unwrap();
                let outer = t.sub_tuple(&comp).unwrap();
                let gi = llt(&inner, inner.n_boxes().max(1)).unwrap();
                let go = llt(&outer, outer.n_boxes().max(1)).unwrap();
                let qs = QtRational::monomial(1, stat as i32, 0);
                for (l1, c1) in gi.coeffs() {
                    for (l2, c2) in go.coeffs() {
                        let key = (l1.clone(), l2.clone());
                        let add = qs.mul(c1).mul(c2);
                        let cur = rhs.remove(&key).unwrap_or_else(QtRational::zero).add(&add);
                        if !cur.is_zero() {
                            rhs.insert(key, cur);
                        }
                    }
                }
            }
            assert_eq!(lhs, rhs, "tuple {:?} bidegree ({}, {})", t, k, d - k);
        }
    }
}

#[test]
fn super_tableau_identity() {
    // omega_Y G_nu[X+Y] expanded in (2,2) variables equals the super tableau
    // generating function
    let mut rng = ChaCha8Rng::seed_from_u64(107);
    for _ in 0..10 {
        let t = random_tuple(&mut rng, 4);
        let via_coproduct = catalanimals::llt::omega_y_coproduct_expansion(&t, 2, 2).unwrap();
        let via_super = catalanimals::llt::super_llt(&t, 2, 2);
        assert!(
            via_coproduct.equals(&via_super),
            "super identity failed for {:?}",
            t
        );
    }
}

#[test]
fn h_pol_matches_cap_oracle() {
    // the windowed series expansion agrees with the independent cap-stable
    // truncation
    let mut rng = ChaCha8Rng::seed_from_u64(109);
    let mut done = 0;
    while done < 8 {
        let t = random_tuple(&mut rng, 5);
        if t.n_boxes() > 5 {
            continue;
        }
        done += 1;
        // shift the weight so the degree is positive and h_pol is nonempty
        let c = build_llt(&t).unwrap().shift_weight(1);
        let fast = h_pol(&c).unwrap();
        let cap = 4;
        let a = common::h_pol_oracle(&c, cap);
        let b = common::h_pol_oracle(&c, cap + 1);
        assert_eq!(a, b, "oracle not stable at cap {} for {:?}", cap, t);
        assert_eq!(fast.coeffs, a, "h_pol disagrees with oracle for {:?}", t);
    }
}

#[test]
fn h_pol_coefficients_are_polynomial() {
    let mut rng = ChaCha8Rng::seed_from_u64(113);
    for _ in 0..6 {
        let t = random_tuple(&mut rng, 4);
        let c = build_llt(&t).unwrap().shift_weight(1);
        let h = h_pol(&c).unwrap();
        let d: i64 = c.lambda().iter().sum();
        for (lam, coeff) in &h.coeffs {
            assert_eq!(lam.size(), d, "homogeneity of h_pol keys");
            assert!(coeff.is_polynomial(), "h_pol coefficient not in Z[q,t]");
        }
    }
}

#[test]
fn nabla_consistency_with_nonconstant_offsets() {
    // omega nabla^m G_nu against the raising-operator route for a stretching
    // with genuinely distinct offsets
    let t = SkewTuple::from_json(r#"{"shapes":[{"outer":[2]},{"outer":[1]}]}"#).unwrap();
    let m = 2i64;
    let offsets = vec![0i64, 1];
    let g = llt(&t, t.n_boxes()).unwrap();
    let oracle = catalanimals::nabla::nabla_pow(&g, m).unwrap().omega().unwrap();
    let (scalar, _) = catalanimals::catalanimal::expected_cub(&t, m, 1, &offsets).unwrap();
    let cat = build_llt_mn(&t, m, 1, &offsets).unwrap();
    let h = h_pol(&cat).unwrap();
    let inv = scalar.inverse().unwrap();
    let raised = catalanimals::catalanimal::GlCharPoly {
        l: h.l,
        coeffs: h.coeffs.iter().map(|(k, v)| (k.clone(), v.mul(&inv))).collect(),
    };
    assert!(raised.matches_symfunc(&oracle).unwrap());
}

#[test]
fn stretch_respects_offsets_in_expected_cub() {
    // the scalar of the (1,0) case equals the plain statistics even with a
    // nonzero constant offset
    let mut rng = ChaCha8Rng::seed_from_u64(127);
    for _ in 0..5 {
        let t = random_tuple(&mut rng, 4);
        let k = t.n_shapes();
        let (s0, f0) = catalanimals::catalanimal::expected_cub(&t, 1, 0, &vec![0; k]).unwrap();
        let (s1, f1) = catalanimals::catalanimal::expected_cub(&t, 1, 0, &vec![2; k]).unwrap();
        assert_eq!(s0, s1);
        assert_eq!(f0, f1);
    }
}

#[test]
fn stretched_tuple_invariants() {
    // |stretch| = m |t| and the b-vector sums telescope to n
    let mut rng = ChaCha8Rng::seed_from_u64(131);
    for _ in 0..20 {
        let t = random_tuple(&mut rng, 4);
        let m = rng.gen_range(1..=3i64);
        let mut offs: Vec<i64> = (0..t.n_shapes()).map(|_| rng.gen_range(0..m)).collect();
        offs.sort_unstable();
        let spec = StretchSpec::new(m, offs).unwrap();
        let (st, map) = t.stretch(&spec).unwrap();
        assert_eq!(st.n_boxes(), t.n_boxes() * m as usize);
        assert!(map.iter().all(|p| p.len() == m as usize));
    }
    for m in 1..=6i64 {
        for n in -6..=6i64 {
            assert_eq!(catalanimals::shapes::b_vector(m, n).iter().sum::<i64>(), n);
        }
    }
}

fn arb_qt_rational() -> impl Strategy<Value = QtRational> {
    // random small Laurent fractions
    let term = (any::<i8>(), -3i32..4, -3i32..4);
    (
        proptest::collection::vec(term.clone(), 1..4),
        proptest::collection::vec(term, 1..3),
    )
        .prop_filter_map("nonzero denominator", |(num, den)| {
            let mut n = QtPoly::zero();
            for (c, a, b) in num {
                n.add_term((a, b), &BigInt::from(c as i64));
            }
            let mut d = QtPoly::zero();
            for (c, a, b) in den {
                d.add_term((a, b), &BigInt::from(c as i64));
            }
            if d.is_zero() {
                None
            } else {
                Some(QtRational::new(n, d).unwrap())
            }
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn qt_rational_text_round_trip(x in arb_qt_rational()) {
        let s = x.to_string();
        let y: QtRational = s.parse().unwrap();
        prop_assert_eq!(x, y);
    }

    #[test]
    fn schur_text_round_trip(coeffs in proptest::collection::vec((arb_qt_rational(), 0usize..5), 1..4)) {
        let parts = Partition::all(4);
        let mut f = SymFunc::zero(Basis::Schur);
        for (c, idx) in coeffs {
            f.add_coeff(parts[idx % parts.len()].clone(), &c);
        }
        let s = f.to_string();
        let g = SymFunc::parse(&s, Basis::Schur).unwrap();
        prop_assert_eq!(f, g);
    }

    #[test]
    fn field_axioms_on_random_values(a in arb_qt_rational(), b in arb_qt_rational(), c in arb_qt_rational()) {
        // associativity and distributivity come out bit-identical in
        // canonical form
        let lhs = a.mul(&b.add(&c));
        let rhs = a.mul(&b).add(&a.mul(&c));
        prop_assert_eq!(lhs, rhs);
        if !b.is_zero() {
            let q = a.try_div(&b).unwrap();
            prop_assert_eq!(q.mul(&b), a);
        }
    }

    #[test]
    fn varpoly_expand_round_trip(seed in 0u64..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = rng.gen_range(1..=5i64);
        let mut f = SymFunc::zero(Basis::Monomial);
        for p in Partition::all(d) {
            if rng.gen_bool(0.5) {
                f.add_coeff(p, &QtRational::from_int(rng.gen_range(-3..4)));
            }
        }
        if !f.is_zero() {
            let poly: VarPoly = f.expand_in_vars(6).unwrap();
            let g = SymFunc::from_polynomial(&poly, d).unwrap();
            prop_assert_eq!(f, g);
        }
    }
}
