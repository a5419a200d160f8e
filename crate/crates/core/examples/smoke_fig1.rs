use catalanimals::catalanimal::{build_llt_mn, h_pol, expected_cub};
use catalanimals::llt::llt;
use catalanimals::nabla::nabla_pow;
use catalanimals::shapes::{SkewShape, SkewTuple};
use std::time::Instant;

fn main() {
    let t = SkewTuple::new(vec![
        SkewShape::new(vec![3, 2], vec![1, 0]).unwrap(),
        SkewShape::new(vec![3, 3], vec![1, 1]).unwrap(),
    ]);
    let t0 = Instant::now();
    let g = llt(&t, 8).unwrap();
    println!("llt in {:?} ({} Schur terms)", t0.elapsed(), g.coeffs().len());

    let t0 = Instant::now();
    let nab = nabla_pow(&g, 1).unwrap().omega().unwrap();
    println!("nabla oracle in {:?}", t0.elapsed());

    let t0 = Instant::now();
    let cat = build_llt_mn(&t, 1, 1, &[0, 0]).unwrap();
    let h = h_pol(&cat).unwrap();
    println!("h_pol in {:?} ({} characters)", t0.elapsed(), h.coeffs.len());

    let (scalar, _) = expected_cub(&t, 1, 1, &[0, 0]).unwrap();
    let inv = scalar.inverse().unwrap();
    let scaled = catalanimals::catalanimal::GlCharPoly {
        l: h.l,
        coeffs: h.coeffs.iter().map(|(k, v)| (k.clone(), v.mul(&inv))).collect(),
    };
    println!("match: {}", scaled.matches_symfunc(&nab).unwrap());
}
