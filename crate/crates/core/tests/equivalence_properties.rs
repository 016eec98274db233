mod common;

use fraxion::{
    bed_uniform, effects_equal, min_total_dose, phi, tumor_effect, DoseBounds, EquivalenceQuery,
    Protocol, Radiosensitivity,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn tissue() -> impl Strategy<Value = Radiosensitivity<f64>> {
    (common::log_uniform(0.01, 0.5), common::log_uniform(0.001, 0.1))
        .prop_map(|(a, b)| Radiosensitivity::new(a, b).unwrap())
}

/// Random protocol with exactly `E_T = gamma`: random doses, then one
/// coordinate solved for the remaining effect. `None` when that coordinate
/// would leave the bounds.
fn projected(
    rng: &mut ChaCha8Rng,
    t: &Radiosensitivity<f64>,
    b: &DoseBounds<f64>,
    gamma: f64,
    n: usize,
) -> Option<Protocol<f64>> {
    let mut d: Vec<f64> = (0..n - 1).map(|_| rng.gen_range(b.d_min()..=b.d_max())).collect();
    let rest = gamma - d.iter().map(|&x| phi(t, 1.0, x)).sum::<f64>();
    if rest <= 0.0 {
        return None;
    }
    let last = t.dose_for_effect(1.0, rest);
    if !b.contains(last) {
        return None;
    }
    d.push(last);
    Protocol::from_doses(&d).ok()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn bed_preserves_effect(t in tissue(), n in 1u64..60, d in 0.5..10.0_f64, m in 1u64..60) {
        let dt = bed_uniform(&t, n, d, m).unwrap();
        let lhs = m as f64 * phi(&t, 1.0, dt);
        let rhs = n as f64 * phi(&t, 1.0, d);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1.0));
        let back = bed_uniform(&t, m, dt, n).unwrap();
        prop_assert!((back - d).abs() <= 1e-12 * d.max(1.0));
    }

    #[test]
    fn bed_decreases_with_target_count(t in tissue(), n in 1u64..60, d in 0.5..10.0_f64, m in 1u64..60) {
        prop_assert!(bed_uniform(&t, n, d, m + 1).unwrap() < bed_uniform(&t, n, d, m).unwrap());
    }

    #[test]
    fn effects_equal_is_reflexive_and_symmetric(
        t in tissue(),
        a in prop::collection::vec(0.5..10.0_f64, 1..20),
        b in prop::collection::vec(0.5..10.0_f64, 1..20),
    ) {
        let p = Protocol::from_doses(&a).unwrap();
        let q = Protocol::from_doses(&b).unwrap();
        prop_assert!(effects_equal(&t, &p, &p, 1e-12));
        // Symmetric up to the max(1, E) scaling of the tolerance.
        let tol = 1e-3;
        if effects_equal(&t, &p, &q, tol) {
            let scale = tumor_effect(&t, &p).max(1.0) / tumor_effect(&t, &q).max(1.0);
            prop_assert!(effects_equal(&t, &q, &p, tol * scale.max(1.0) * (1.0 + 1e-12)));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn min_total_dose_beats_projected_protocols(
        t in tissue(),
        d_min in 0.5..2.5_f64,
        width in 0.5..8.0_f64,
        rho in common::log_uniform(1.0, 60.0),
        seed in any::<u64>(),
    ) {
        let b = DoseBounds::new(d_min, d_min + width).unwrap();
        let gamma = rho * phi(&t, 1.0, d_min);
        let r = min_total_dose(&EquivalenceQuery::new(t, b, gamma).unwrap()).unwrap();
        prop_assert!(r.protocol.check_bounds(&b).is_ok());
        if r.constraint_active {
            prop_assert!((tumor_effect(&t, &r.protocol) - gamma).abs() <= 1e-9 * gamma.max(1.0));
        }
        let lambda = (gamma / phi(&t, 1.0, b.d_max())).max(1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut checked = 0;
        for i in 0..1000 {
            let n = lambda.ceil() as usize + i % (rho.ceil() as usize + 1);
            if let Some(p) = projected(&mut rng, &t, &b, gamma, n) {
                checked += 1;
                prop_assert!(r.objective_primary <= p.total_dose() * (1.0 + 1e-9), "{} vs {}", r.protocol, p);
            }
        }
        prop_assume!(checked > 0);
    }
}
