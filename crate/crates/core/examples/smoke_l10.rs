use catalanimals::catalanimal::{build_llt_mn, h_pol, expected_cub, GlCharPoly};
use catalanimals::llt::llt;
use catalanimals::nabla::nabla_pow;
use catalanimals::shapes::{SkewShape, SkewTuple};
use std::time::Instant;

fn check(t: &SkewTuple, m: i64) {
    let t0 = Instant::now();
    let g = llt(t, t.n_boxes()).unwrap();
    let oracle = nabla_pow(&g, m).unwrap().omega().unwrap();
    let tn = t0.elapsed();
    let t0 = Instant::now();
    let zeros = vec![0i64; t.n_shapes()];
    let (scalar, _) = expected_cub(t, m, 1, &zeros).unwrap();
    let cat = build_llt_mn(t, m, 1, &zeros).unwrap();
    let h = h_pol(&cat).unwrap();
    let inv = scalar.inverse().unwrap();
    let raised = GlCharPoly { l: h.l, coeffs: h.coeffs.iter().map(|(k, v)| (k.clone(), v.mul(&inv))).collect() };
    println!("m={} nabla {:?} h_pol {:?} match={}", m, tn, t0.elapsed(), raised.matches_symfunc(&oracle).unwrap());
}

fn main() {
    let worst = SkewTuple::new(vec![
        SkewShape::new(vec![2, 1], vec![]).unwrap(),
        SkewShape::new(vec![1, 1], vec![]).unwrap(),
    ]);
    check(&worst, 1);
    check(&worst, 2);
    let five_singles = SkewTuple::new(vec![
        SkewShape::new(vec![1], vec![]).unwrap(); 5
    ]);
    check(&five_singles, 2);
    let t433ish = SkewTuple::new(vec![SkewShape::new(vec![3, 2], vec![]).unwrap()]);
    check(&t433ish, 2);
}
