use catalanimals::nabla::modified_macdonald;
use catalanimals::partition::Partition;
use catalanimals::symfunc::{Basis, SymFunc};
use catalanimals::qt::QtRational;
use std::time::Instant;

fn main() {
    for d in [5i64, 6, 7, 8] {
        let t0 = Instant::now();
        let b = modified_macdonald(d).unwrap();
        println!("degree {} basis in {:?}", d, t0.elapsed());
        let mu = Partition::new(vec![d as i32]);
        let t0 = Instant::now();
        let tw = b.table[&mu]
            .twist_powersum(|k| QtRational::monomial(1, k, 0).sub(&QtRational::one()))
            .unwrap();
        println!("  one twist in {:?} ({} terms)", t0.elapsed(), tw.coeffs().len());
        let t0 = Instant::now();
        let f = SymFunc::basis_element(Basis::Elementary, Partition::new(vec![d as i32]));
        let g = catalanimals::nabla::nabla_pow(&f, 1).unwrap();
        println!("  nabla e_{} in {:?} ({} terms)", d, t0.elapsed(), g.coeffs().len());
    }
}
