//! Randomized invariants of the measurement geometry, the measures and the
//! optimizer.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qutrit_discord::io::{state_from_json, state_to_json};
use qutrit_discord::matlib::{kron, ComplexMatrix, DensityMatrix};
use qutrit_discord::measgeo::{full_basis, full_unitary, spin_diagram, type_ii_basis, type_iii_basis, MeasurementParams};
use qutrit_discord::models::aligned_mixture;
use qutrit_discord::optim::{minimize_all_families, MeasurementFamily, OptimizerConfig, Target};
use qutrit_discord::qmeasures::{apply_measurement, commutator_with_parity, measure_given, stationarity_for, Measure};
use qutrit_discord::spinops::composite_parity;
use qutrit_discord::verify::{random_parity_state, random_state};

fn params() -> impl Strategy<Value = MeasurementParams> {
    (0.0..=FRAC_PI_4, 0.0..=FRAC_PI_4, -FRAC_PI_2..FRAC_PI_2, 0.0..2.0 * PI, 0.0..PI, 0.0..2.0 * PI)
        .prop_map(|(a, b, g, p, t, f)| MeasurementParams::from_array([a, b, g, p, t, f]))
}

fn state(seed: u64, da: usize) -> DensityMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_state(&mut rng, da, 1 + (seed as usize % (3 * da)))
}

const MEASURES: [Measure; 3] = [Measure::D, Measure::I1, Measure::I2];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn bases_are_orthonormal(p in params()) {
        let b = full_basis(&p);
        prop_assert!(b.orthonormality_error() < 1e-12);
        prop_assert!(b.completeness_error() < 1e-12);
    }

    #[test]
    fn diagrams_sum_to_zero_in_a_plane(p in params()) {
        let d = spin_diagram(&full_basis(&p)).unwrap();
        prop_assert!(d.sum().iter().all(|x| x.abs() < 1e-10));
        prop_assert!(d.coplanarity_residual() < 1e-10);
        prop_assert!(d.max_pairwise_dot() <= 1e-10);
        prop_assert!(d.total_length_sq <= 8.0 / 3.0 + 1e-9);
    }

    #[test]
    fn measures_are_ordered_and_nonnegative(p in params(), seed in any::<u64>(), da in 1usize..=3) {
        let rho = state(seed, da);
        let b = full_basis(&p);
        let d = measure_given(&rho, &b, &Measure::D).unwrap().value;
        let i1 = measure_given(&rho, &b, &Measure::I1).unwrap().value;
        let i2 = measure_given(&rho, &b, &Measure::I2).unwrap();
        prop_assert!(d >= -1e-10);
        prop_assert!(i1 >= d - 1e-10, "I1 {} < D {}", i1, d);
        let purity_loss = rho.purity() - i2.rho_prime.purity();
        prop_assert!((i2.value - 2.0 * purity_loss).abs() < 1e-12);
        prop_assert!(i2.value >= -1e-12);
    }

    #[test]
    fn local_unitaries_on_the_unmeasured_side_change_nothing(p in params(), q in params(), seed in any::<u64>()) {
        let rho = state(seed, 3);
        let u = kron(&full_unitary(&q), &ComplexMatrix::identity(3));
        let turned = DensityMatrix::new(rho.matrix().conjugate_by(&u).unwrap().hermitian_part(), (3, 3)).unwrap();
        let b = full_basis(&p);
        for m in MEASURES {
            let a = measure_given(&rho, &b, &m).unwrap().value;
            let c = measure_given(&turned, &b, &m).unwrap().value;
            prop_assert!((a - c).abs() < 1e-9, "{}: {} vs {}", m.name(), a, c);
        }
    }

    #[test]
    fn stationarity_operators_are_antihermitian_with_empty_diagonal(p in params(), seed in any::<u64>()) {
        let rho = state(seed, 3);
        let b = full_basis(&p);
        for m in MEASURES {
            let s = stationarity_for(&rho, &b, &m).unwrap();
            prop_assert!((&s.delta + &s.delta.adjoint()).max_abs() < 1e-10);
            let inb = s.in_basis(&b);
            prop_assert!((0..3).all(|k| inb[(k, k)].norm() < 1e-10));
        }
    }

    #[test]
    fn parity_survives_parity_preserving_measurements(seed in any::<u64>(), alpha in 0.0..=FRAC_PI_4, gamma in -FRAC_PI_2..FRAC_PI_2, phi in 0.0..2.0 * PI) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = random_parity_state(&mut rng);
        let p = composite_parity(&[1.0, 1.0]).unwrap();
        for b in [type_ii_basis(alpha, phi), type_iii_basis(alpha, gamma, phi)] {
            let after = apply_measurement(&rho, &b).unwrap();
            prop_assert!(commutator_with_parity(after.matrix(), &p) < 1e-10);
        }
    }

    #[test]
    fn state_files_round_trip(seed in any::<u64>(), da in 1usize..=3) {
        let rho = state(seed, da);
        let back = state_from_json(&state_to_json(&rho)).unwrap();
        prop_assert_eq!(back.dims(), rho.dims());
        prop_assert_eq!(back.matrix().max_abs_diff(rho.matrix()), 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn general_family_is_never_worse(theta in 0.05..1.5f64) {
        let rho = aligned_mixture(theta).unwrap().rho;
        let cfg = OptimizerConfig::default();
        for m in MEASURES {
            let c = minimize_all_families(&Target::new(&rho, m).unwrap().with_aligned_theta(theta), &cfg).unwrap();
            let general = c.results[&MeasurementFamily::General].value;
            for r in c.results.values() {
                prop_assert!(general <= r.value + 1e-9, "{}: {:?} {} < general {}", m.name(), r.family, r.value, general);
            }
            prop_assert!(c.best_value >= -1e-12);
        }
    }
}
