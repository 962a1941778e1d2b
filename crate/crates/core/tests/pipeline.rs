use graded_torsion::cohomology::{GradedInnerProduct, WeightedCohomology};
use graded_torsion::graded_lie::GradedLieAlgebra;
use graded_torsion::rumin::rumin_complex;
use graded_torsion::sieve::{sieve_check, poincare_polynomial, DimensionVector};
use num_bigint::BigInt;

fn presets() -> Vec<GradedLieAlgebra> {
    vec![
        GradedLieAlgebra::two_three_five(),
        GradedLieAlgebra::heisenberg(1),
        GradedLieAlgebra::heisenberg(2),
        GradedLieAlgebra::abelian(3, -1).unwrap(),
    ]
}

#[test]
fn weight_supertrace_is_the_poincare_polynomial() {
    for alg in presets() {
        let c = WeightedCohomology::compute(&alg, &GradedInnerProduct::identity(&alg));
        let dv = DimensionVector::new(alg.dimension_vector()).unwrap();
        let mut p = poincare_polynomial(&dv);
        let mut s = c.weight_supertrace();
        let len = p.len().max(s.len());
        p.resize(len, BigInt::from(0));
        s.resize(len, BigInt::from(0));
        assert_eq!(p, s, "{:?}", alg.degrees());
    }
}

#[test]
fn pure_presets_pass_the_sieve_and_share_n() {
    for alg in presets() {
        let c = WeightedCohomology::compute(&alg, &GradedInnerProduct::identity(&alg));
        assert!(c.pure);
        let dv = DimensionVector::new(alg.dimension_vector()).unwrap();
        let r = sieve_check(&dv);
        assert!(r.pass, "{dv}");
        assert_eq!(r.n, c.homogeneous_dimension);
    }
}

#[test]
fn rumin_orders_are_the_cohomology_gaps() {
    for alg in presets() {
        let inner = GradedInnerProduct::identity(&alg);
        let rc = rumin_complex(&alg, &inner).unwrap();
        let k = rc.cohomology.k.clone().unwrap();
        let orders: Vec<u64> = rc.orders().into_iter().map(Option::unwrap).collect();
        assert_eq!(orders, k);
        assert!(rc.d_squared_zero());
        assert!(rc.star_duality_check().all_hold());
    }
}
