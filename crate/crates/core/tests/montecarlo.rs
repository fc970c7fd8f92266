//! Monte Carlo route: determinism, thread-count independence and agreement
//! with the exact route at small degree.

use zerovar::geometry::TestForm;
use zerovar::montecarlo::{mc_variance, sample_section, zeros_of_section, BACKWARD_TOL};
use zerovar::variance::zonal_variance_oracle;

#[test]
fn estimate_is_independent_of_thread_count() {
    let psi1 = TestForm::by_name("psi1").unwrap();
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| mc_variance(30, &psi1, 400, 5).unwrap())
    };
    let one = run(1);
    assert_eq!(one, run(3));
    assert_eq!(one, run(8));
}

#[test]
fn different_seeds_give_different_samples() {
    let a = sample_section(10, 1, 0).unwrap();
    let b = sample_section(10, 2, 0).unwrap();
    let c = sample_section(10, 1, 1).unwrap();
    assert_ne!(a.coeffs, b.coeffs);
    assert_ne!(a.coeffs, c.coeffs);
    assert_eq!(a.coeffs, sample_section(10, 1, 0).unwrap().coeffs);
}

#[test]
fn zero_sets_are_certified() {
    for k in [1u32, 5, 60, 400] {
        for i in 0..5 {
            let zs = zeros_of_section(&sample_section(k, 77, i).unwrap()).unwrap();
            assert_eq!(zs.points.len(), k as usize);
            assert!(zs.max_backward_error <= BACKWARD_TOL);
        }
    }
}

#[test]
fn mc_agrees_with_oracle_at_moderate_degree() {
    for name in ["psi1", "quadrupole"] {
        let tf = TestForm::by_name(name).unwrap();
        let est = mc_variance(12, &tf, 6000, 31).unwrap();
        let oracle = zonal_variance_oracle(&tf, 12).unwrap();
        assert!(
            (est.variance - oracle).abs() <= 4.0 * est.stderr_variance,
            "{name}: {} ± {} vs {oracle}",
            est.variance,
            est.stderr_variance
        );
        assert_eq!(est.n_rejected, 0);
    }
}
