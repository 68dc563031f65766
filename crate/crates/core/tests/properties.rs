//! Property tests for measures and costs.

use ceflow::cost::ConcaveCost;
use ceflow::fields::Modulus;
use ceflow::measure::{jordan_decompose, push_forward, Atom, AtomicSignedMeasure};
use proptest::prelude::*;

fn measure(dim: usize) -> impl Strategy<Value = AtomicSignedMeasure> {
    prop::collection::vec((prop::collection::vec(-5.0f64..5.0, dim), -3.0f64..3.0), 1..12).prop_map(move |raw| {
        let atoms = raw.into_iter().filter(|(_, w)| w.abs() > 1e-6).map(|(x, w)| Atom::new(x, w)).collect();
        AtomicSignedMeasure::new(dim, atoms, 0.0).unwrap()
    })
}

proptest! {
    #[test]
    fn jordan_parts_recombine(m in measure(2)) {
        let (p, n) = jordan_decompose(&m);
        prop_assert!(p.is_nonnegative() && n.is_nonnegative());
        prop_assert!((p.mass() - n.mass() - m.mass()).abs() <= 1e-12 * (1.0 + m.total_variation()));
        prop_assert!((p.mass() + n.mass() - m.total_variation()).abs() <= 1e-12 * (1.0 + m.total_variation()));
    }

    #[test]
    fn translation_preserves_mass_bitwise(m in measure(3), v in prop::collection::vec(-1.0f64..1.0, 3)) {
        let moved = push_forward(&m, |_, x| Ok(x.iter().zip(&v).map(|(a, b)| a + b).collect())).unwrap();
        prop_assert_eq!(moved.mass().to_bits(), m.mass().to_bits());
        prop_assert_eq!(moved.total_variation().to_bits(), m.total_variation().to_bits());
    }

    #[test]
    fn difference_with_self_vanishes(m in measure(1)) {
        let d = m.difference(&m).unwrap();
        prop_assert_eq!(d.total_variation(), 0.0);
    }

    #[test]
    fn cost_is_monotone_subadditive(a in 0.0f64..50.0, b in 0.0f64..50.0, which in 0usize..3, delta in 0.01f64..2.0) {
        let omega = [Modulus::linear(), Modulus::log_lipschitz(), Modulus::iterated_log(1)][which].clone();
        let c = ConcaveCost::new(&omega, 1.0, delta).unwrap();
        let (ca, cb, cab) = (c.eval(a), c.eval(b), c.eval(a + b));
        prop_assert!(cab <= ca + cb + 1e-12);
        prop_assert!(cab + 1e-15 >= ca.max(cb));
        prop_assert!(cab <= c.c_infinity() + 1e-15);
    }

    #[test]
    fn cost_inverse_round_trips(r in 1e-6f64..20.0, delta in 0.01f64..2.0) {
        let c = ConcaveCost::new(&Modulus::log_lipschitz(), 0.5, delta).unwrap();
        let back = c.inverse(c.eval(r)).unwrap();
        prop_assert!((back - r).abs() <= 1e-8 * (1.0 + r), "{} vs {}", back, r);
    }
}
