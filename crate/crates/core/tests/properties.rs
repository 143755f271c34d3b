use proptest::prelude::*;

use parity_die::chain::{analyze, build_chain};
use parity_die::enumerate::{config_distribution, path_distribution};
use parity_die::montecarlo::{batch_with, simulate_path, Execution};
use parity_die::stats::{exact_binomial_tail, normal_cdf, z_score, TossSequence};
use parity_die::{
    flip_parities, parity_probability, transitions, DieConfig, MutationRule, Parity, Ratio,
};

fn config() -> impl Strategy<Value = DieConfig> {
    (0u8..=3)
        .prop_flat_map(|a| (Just(a), 0..=3 - a))
        .prop_map(|(a, b)| DieConfig::new(a, b, 3 - a - b).unwrap())
}

fn rule() -> impl Strategy<Value = MutationRule> {
    prop::sample::select(MutationRule::ALL.to_vec())
}

fn flip_seq(s: &str) -> String {
    s.chars().map(|c| if c == 'E' { 'O' } else { 'E' }).collect()
}

proptest! {
    #[test]
    fn transitions_are_a_distribution(s in config(), r in rule()) {
        let ts = transitions(s, r);
        prop_assert!(ts.iter().all(|t| t.probability.is_positive()));
        prop_assert_eq!(Ratio::sum(ts.iter().map(|t| t.probability)).unwrap(), Ratio::ONE);
        // merged: no duplicate (outcome, next)
        for (i, a) in ts.iter().enumerate() {
            for b in &ts[i + 1..] {
                prop_assert!(a.outcome != b.outcome || a.next != b.next);
            }
        }
    }

    #[test]
    fn parity_probabilities_sum_to_one(s in config()) {
        let e = parity_probability(s, Parity::Even);
        let o = parity_probability(s, Parity::Odd);
        prop_assert_eq!(e.checked_add(o).unwrap(), Ratio::ONE);
    }

    #[test]
    fn flip_equivariance(s in config(), r in rule()) {
        let mut direct: Vec<_> = transitions(flip_parities(s), r)
            .into_iter()
            .map(|t| (t.outcome, t.next, t.probability))
            .collect();
        let mut mirrored: Vec<_> = transitions(s, r)
            .into_iter()
            .map(|t| (t.outcome.flip(), flip_parities(t.next), t.probability))
            .collect();
        direct.sort();
        mirrored.sort();
        prop_assert_eq!(direct, mirrored);
        prop_assert_eq!(flip_parities(flip_parities(s)), s);
    }

    #[test]
    fn even_face_count_moves_by_rule(s in config()) {
        for t in transitions(s, MutationRule::ParityCopy) {
            let d = t.next.even_faces() as i32 - s.even_faces() as i32;
            match t.outcome {
                Parity::Even => prop_assert!(d == 0 || d == 1),
                Parity::Odd => prop_assert!(d == 0 || d == -1),
            }
        }
        for b in parity_die::die::branches(s, MutationRule::Increment) {
            use parity_die::die::FaceKind::*;
            let d = b.next.even_faces() as i32 - s.even_faces() as i32;
            let want = match b.face {
                MatchedEven | MixedOdd => -1,
                MixedEven | MatchedOdd => 1,
            };
            prop_assert_eq!(d, want);
        }
    }

    #[test]
    fn copy_frozen_iff_no_mixed_pairs(s in config()) {
        prop_assert_eq!(parity_die::is_frozen(s, MutationRule::ParityCopy), s.mixed_pairs() == 0);
    }

    #[test]
    fn path_distribution_invariants(r in rule(), depth in 1usize..=8) {
        let d = path_distribution(r, depth).unwrap();
        prop_assert_eq!(d.total().unwrap(), Ratio::ONE);
        for (k, &p) in &d.entries {
            prop_assert_eq!(k.len(), depth);
            prop_assert!(p.is_positive());
            prop_assert_eq!(d.get(&flip_seq(k)), Some(p));
        }
        if depth > 1 {
            prop_assert_eq!(d.marginal().unwrap(), path_distribution(r, depth - 1).unwrap());
        }
        if r == MutationRule::NoMutation {
            let uniform = Ratio::new(1, 1i128 << depth).unwrap();
            prop_assert_eq!(d.entries.len(), 1 << depth);
            prop_assert!(d.entries.values().all(|&p| p == uniform));
        }
    }

    #[test]
    fn ensemble_even_probability_is_half(steps in 0usize..=20) {
        let d = config_distribution(MutationRule::ParityCopy, steps).unwrap();
        prop_assert_eq!(d.next_parity_probability(Parity::Even).unwrap(), Ratio::new(1, 2).unwrap());
    }

    #[test]
    fn ratio_field_laws(a in -1000i128..1000, b in 1i128..1000, c in -1000i128..1000, d in 1i128..1000) {
        let x = Ratio::new(a, b).unwrap();
        let y = Ratio::new(c, d).unwrap();
        prop_assert_eq!(x.checked_add(y).unwrap().checked_sub(y).unwrap(), x);
        prop_assert_eq!(x.checked_mul(y).unwrap(), y.checked_mul(x).unwrap());
        prop_assert_eq!(x < y, (a * d) < (c * b));
        if !y.is_zero() {
            prop_assert_eq!(x.checked_mul(y).unwrap().checked_div(y).unwrap(), x);
        }
    }

    #[test]
    fn z_score_antisymmetric(n in 1u64..500, d in 0u64..250) {
        let d = d.min(n / 2);
        let mean = n / 2;
        if n % 2 == 0 {
            let up = z_score(mean + d, n, 0.5).unwrap();
            let down = z_score(mean - d, n, 0.5).unwrap();
            prop_assert!((up + down).abs() < 1e-12);
        }
    }

    #[test]
    fn normal_cdf_reflection_and_monotone(z in -8.0f64..8.0, dz in 0.0f64..1.0) {
        prop_assert!((normal_cdf(z) + normal_cdf(-z) - 1.0).abs() < 1e-7);
        prop_assert!(normal_cdf(z + dz) >= normal_cdf(z));
    }

    #[test]
    fn binomial_tail_shape(n in 0u64..40, num in 1i128..6) {
        let p = Ratio::new(num, 6).unwrap();
        prop_assert_eq!(exact_binomial_tail(n, 0, p).unwrap().exact(), Some(Ratio::ONE));
        let top = exact_binomial_tail(n, n, p).unwrap().to_f64();
        let want = p.to_f64().powi(n as i32);
        prop_assert!((top - want).abs() <= 1e-12 * want.max(1e-300));
        let mut prev = 1.0;
        for k in 0..=n {
            let t = exact_binomial_tail(n, k, p).unwrap().to_f64();
            prop_assert!(t <= prev + 1e-15);
            prev = t;
        }
    }

    #[test]
    fn sequence_text_round_trip(bits in prop::collection::vec(any::<bool>(), 0..200)) {
        let seq: TossSequence = bits.iter().map(|&b| if b { Parity::Even } else { Parity::Odd }).collect();
        let parsed: TossSequence = seq.to_string().parse().unwrap();
        prop_assert_eq!(parsed, seq);
    }

    #[test]
    fn simulation_is_deterministic(r in rule(), n in 0usize..60, seed in any::<u64>()) {
        let a = simulate_path(r, n, seed);
        prop_assert_eq!(&a, &simulate_path(r, n, seed));
        prop_assert_eq!(a.trajectory.len(), n + 1);
        prop_assert_eq!(a.trajectory[0], parity_die::initial_config());
    }
}

#[test]
fn exact_tail_at_n_is_power() {
    let p = Ratio::new(1, 3).unwrap();
    for n in 1..=30u64 {
        assert_eq!(exact_binomial_tail(n, n, p).unwrap().exact(), Some(p.checked_pow(n as u32).unwrap()));
    }
}

#[test]
fn chain_rows_are_stochastic() {
    for r in MutationRule::ALL {
        let c = build_chain(r);
        for row in &c.matrix {
            assert_eq!(Ratio::sum(row.iter().copied()).unwrap(), Ratio::ONE);
        }
        let unique: std::collections::HashSet<_> = c.states.iter().collect();
        assert_eq!(unique.len(), c.states.len());
    }
}

#[test]
fn absorption_invariant_under_parity_flip() {
    let rep = analyze(MutationRule::ParityCopy).unwrap().absorption;
    let total = Ratio::sum(rep.classes.iter().map(|c| c.probability)).unwrap();
    assert_eq!(total, Ratio::ONE);
    for c in &rep.classes {
        let mirror = rep
            .classes
            .iter()
            .find(|m| m.states[0] == flip_parities(c.states[0]))
            .unwrap();
        assert_eq!(mirror.probability, c.probability);
        assert_eq!(mirror.even_share, c.even_share.complement().unwrap());
    }
    assert!(rep.expected_steps.is_positive());
}

#[test]
fn batch_independent_of_execution() {
    for r in MutationRule::ALL {
        let serial = batch_with(r, 5, 10_000, 99, Execution::Serial).unwrap();
        let parallel = batch_with(r, 5, 10_000, 99, Execution::Parallel).unwrap();
        assert_eq!(serial, parallel);
        let freq: f64 = serial.sequence_frequencies().unwrap().values().sum();
        assert!((freq - 1.0).abs() < 1e-9);
    }
}
