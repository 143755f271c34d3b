//! Independent oracles checked against the library.

use std::collections::{BTreeMap, HashSet};

use parity_die::chain::{build_chain, classify, is_ergodic};
use parity_die::enumerate::path_distribution;
use parity_die::stats::{binomial_moments, exact_binomial_tail, normal_cdf};
use parity_die::{transitions, DieConfig, MutationRule, Ratio};

/// Position-labeled die: face `i` shows `i + 1` pips and sits opposite `5 - i`.
/// Enumerates every sequence of `depth` equally likely faces.
fn brute_force_paths(rule: MutationRule, depth: u32) -> BTreeMap<String, Ratio> {
    let total = 6u64.pow(depth);
    let mut counts: BTreeMap<String, u64> = BTreeMap::new();
    for code in 0..total {
        let mut even = [false, true, false, true, false, true];
        let mut c = code;
        let mut key = String::new();
        for _ in 0..depth {
            let face = (c % 6) as usize;
            c /= 6;
            let hidden = 5 - face;
            key.push(if even[face] { 'E' } else { 'O' });
            match rule {
                MutationRule::NoMutation => {}
                MutationRule::ParityCopy => even[hidden] = even[face],
                MutationRule::Increment => even[hidden] = !even[hidden],
            }
        }
        *counts.entry(key).or_default() += 1;
    }
    counts
        .into_iter()
        .map(|(k, n)| (k, Ratio::new(n as i128, total as i128).unwrap()))
        .collect()
}

#[test]
fn path_distribution_matches_face_level_brute_force() {
    for rule in MutationRule::ALL {
        for depth in 1..=4 {
            let exact = path_distribution(rule, depth as usize).unwrap();
            assert_eq!(exact.entries, brute_force_paths(rule, depth), "{rule} depth {depth}");
        }
    }
}

#[test]
fn brute_force_three_roll_values() {
    let bf = brute_force_paths(MutationRule::ParityCopy, 3);
    assert_eq!(bf["EEE"], Ratio::new(1, 4).unwrap());
    assert_eq!(bf["EEO"], Ratio::new(1, 12).unwrap());
    assert_eq!(bf["OOE"], Ratio::new(1, 12).unwrap());
    assert_eq!(bf["OOO"], Ratio::new(1, 4).unwrap());
    // the reference table's 7/27 and 2/27 are not reachable from sixths
    assert_ne!(bf["EEE"], Ratio::new(7, 27).unwrap());
    assert_ne!(bf["EEO"], Ratio::new(2, 27).unwrap());
}

/// Transitive closure by repeated relaxation.
fn closure(rule: MutationRule) -> (Vec<DieConfig>, Vec<Vec<bool>>) {
    let states: Vec<DieConfig> = DieConfig::all().collect();
    let n = states.len();
    let idx = |s: DieConfig| states.iter().position(|&x| x == s).unwrap();
    let mut reach = vec![vec![false; n]; n];
    for (i, &s) in states.iter().enumerate() {
        reach[i][i] = true;
        for t in transitions(s, rule) {
            reach[i][idx(t.next)] = true;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if reach[i][k] && reach[k][j] {
                    reach[i][j] = true;
                }
            }
        }
    }
    (states, reach)
}

#[test]
fn classification_agrees_with_reachability() {
    for rule in MutationRule::ALL {
        let (states, reach) = closure(rule);
        let pos = |s: DieConfig| states.iter().position(|&x| x == s).unwrap();
        let chain = build_chain(rule);
        let cl = classify(&chain);
        let start = pos(parity_die::initial_config());
        let reachable: HashSet<DieConfig> = states
            .iter()
            .enumerate()
            .filter(|(j, _)| reach[start][*j])
            .map(|(_, &s)| s)
            .collect();
        assert_eq!(chain.states.iter().copied().collect::<HashSet<_>>(), reachable, "{rule}");

        for (a, &s) in chain.states.iter().enumerate() {
            for (b, &t) in chain.states.iter().enumerate() {
                let same = reach[pos(s)][pos(t)] && reach[pos(t)][pos(s)];
                assert_eq!(cl.class_of[a] == cl.class_of[b], same, "{rule}: {s} {t}");
            }
            // closed iff everything reachable from s reaches back
            let closed = chain
                .states
                .iter()
                .all(|&t| !reach[pos(s)][pos(t)] || reach[pos(t)][pos(s)]);
            assert_eq!(cl.classes[cl.class_of[a]].closed, closed, "{rule}: {s}");
        }

        let all_mutual = chain
            .states
            .iter()
            .all(|&s| chain.states.iter().all(|&t| reach[pos(s)][pos(t)]));
        let verdict = is_ergodic(&chain, &cl);
        assert_eq!(verdict.ergodic, all_mutual, "{rule}");
        if let Some((from, to)) = verdict.witness {
            assert!(!reach[pos(from)][pos(to)]);
        }
    }
}

#[test]
fn absorption_matches_value_iteration() {
    // iterate the state distribution in floating point until it settles
    let mut dist: BTreeMap<DieConfig, f64> = BTreeMap::from([(parity_die::initial_config(), 1.0)]);
    let mut expected_steps = 0.0;
    for _ in 0..400 {
        let unfrozen: f64 = dist.iter().filter(|(s, _)| s.mixed_pairs() > 0).map(|(_, p)| p).sum();
        expected_steps += unfrozen;
        let mut next: BTreeMap<DieConfig, f64> = BTreeMap::new();
        for (&s, &p) in &dist {
            for t in transitions(s, MutationRule::ParityCopy) {
                *next.entry(t.next).or_default() += p * t.probability.to_f64();
            }
        }
        dist = next;
    }
    let chain = build_chain(MutationRule::ParityCopy);
    let cl = classify(&chain);
    let rep = parity_die::chain::absorption(&chain, &cl).unwrap();
    for c in &rep.classes {
        let iterated = dist.get(&c.states[0]).copied().unwrap_or(0.0);
        assert!((c.probability.to_f64() - iterated).abs() < 1e-12, "{}", c.states[0]);
    }
    assert!((rep.expected_steps.to_f64() - expected_steps).abs() < 1e-9);
}

#[test]
fn normal_cdf_matches_quadrature() {
    // composite Simpson on the density from -12 to z
    fn simpson(z: f64) -> f64 {
        let a = -12.0;
        let n = 20_000;
        let h = (z - a) / n as f64;
        let pdf = |x: f64| (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let mut s = pdf(a) + pdf(z);
        for i in 1..n {
            let x = a + i as f64 * h;
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * pdf(x);
        }
        s * h / 3.0
    }
    for z in [-3.0, -1.6, -0.5, 0.0, 0.7, 1.6, 1.96, 2.5, 4.0] {
        assert!((normal_cdf(z) - simpson(z)).abs() < 1e-7, "z = {z}");
    }
}

#[test]
fn binomial_sd_matches_enumeration() {
    for n in 0..=12u32 {
        for p in [0.1f64, 0.25, 0.5, 2.0 / 3.0, 0.9] {
            // brute force over all 2^n outcome vectors
            let mut mean = 0.0;
            let mut second = 0.0;
            for mask in 0u32..(1 << n) {
                let k = mask.count_ones() as f64;
                let w = p.powf(k) * (1.0 - p).powf(n as f64 - k);
                mean += w * k;
                second += w * k * k;
            }
            let sd = (second - mean * mean).max(0.0).sqrt();
            let (m, s) = binomial_moments(n as u64, p).unwrap();
            assert!((m - mean).abs() < 1e-12);
            assert!((s - sd).abs() < 1e-12, "n={n} p={p}: {s} vs {sd}");
        }
    }
}

#[test]
fn binomial_tail_matches_direct_count() {
    // count subsets of 100 with at least 58 members via Pascal's triangle in u128
    let mut row = vec![1u128];
    for _ in 0..100 {
        let mut next = vec![1u128; row.len() + 1];
        for k in 1..row.len() {
            next[k] = row[k - 1] + row[k];
        }
        row = next;
    }
    let hits: u128 = row[58..].iter().sum();
    let want = Ratio::new(hits as i128, 1i128 << 100).unwrap();
    let got = exact_binomial_tail(100, 58, Ratio::new(1, 2).unwrap()).unwrap();
    assert_eq!(got.exact(), Some(want));
    // the normal approximation without continuity correction sits near it
    assert!((got.to_f64() - (1.0 - 0.9452)).abs() < 0.02);
}

#[test]
fn run_counts_match_enumeration() {
    // fraction of 10-toss fair sequences that are all Even
    let all_even = (0u32..1 << 10).filter(|&m| m == 0).count();
    assert_eq!(
        parity_die::stats::run_probability(10, Ratio::new(1, 2).unwrap()).unwrap(),
        Ratio::new(all_even as i128, 1024).unwrap()
    );
}
