//! Seeded simulation of toss paths and reproducible batches.
//!
//! Each run draws from a ChaCha8 stream seeded with [`mix_seed`]`(master, i)`,
//! so batch results do not depend on how runs are scheduled.

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::die::{branches, initial_config, is_frozen, DieConfig, MutationRule, Parity};
use crate::stats::TossSequence;

/// Sequence-level counts are only kept for paths up to this length.
pub const MAX_TRACKED_DEPTH: usize = 16;

/// SplitMix64 finalizer applied to `master + (index + 1) * golden_gamma`.
pub fn mix_seed(master: u64, index: u64) -> u64 {
    let mut z = master.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Draws one roll from `state` using cumulative thresholds in face order.
pub fn roll<R: Rng + ?Sized>(state: DieConfig, rule: MutationRule, rng: &mut R) -> (Parity, DieConfig) {
    let options = branches(state, rule);
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for b in &options {
        acc += b.probability.to_f64();
        if u < acc {
            return (b.outcome, b.next);
        }
    }
    // rounding left u past the last threshold
    let last = options.last().expect("every state has a branch");
    (last.outcome, last.next)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationRun {
    pub seed: u64,
    pub rule: MutationRule,
    pub tosses: TossSequence,
    pub trajectory: Vec<DieConfig>,
}

pub fn simulate_path(rule: MutationRule, n: usize, seed: u64) -> SimulationRun {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = initial_config();
    let mut tosses = Vec::with_capacity(n);
    let mut trajectory = Vec::with_capacity(n + 1);
    trajectory.push(state);
    for _ in 0..n {
        let (outcome, next) = roll(state, rule, &mut rng);
        tosses.push(outcome);
        trajectory.push(next);
        state = next;
    }
    SimulationRun {
        seed,
        rule,
        tosses: TossSequence(tosses),
        trajectory,
    }
}

/// Pure counts; merging two tallies is order-insensitive.
#[derive(Debug, Clone, Default, PartialEq)]
struct Tally {
    even_counts: BTreeMap<usize, u64>,
    sequences: BTreeMap<String, u64>,
    final_states: BTreeMap<DieConfig, u64>,
    frozen: u64,
    /// Runs whose first toss was Even.
    first_even: u64,
}

impl Tally {
    fn record(&mut self, run: &SimulationRun, track_sequences: bool) {
        *self.even_counts.entry(run.tosses.even_count()).or_default() += 1;
        if track_sequences {
            *self.sequences.entry(run.tosses.to_string()).or_default() += 1;
        }
        let last = *run.trajectory.last().expect("nonempty trajectory");
        *self.final_states.entry(last).or_default() += 1;
        if is_frozen(last, run.rule) {
            self.frozen += 1;
        }
        if run.tosses.0.first() == Some(&Parity::Even) {
            self.first_even += 1;
        }
    }

    fn merge(mut self, other: Tally) -> Tally {
        for (k, v) in other.even_counts {
            *self.even_counts.entry(k).or_default() += v;
        }
        for (k, v) in other.sequences {
            *self.sequences.entry(k).or_default() += v;
        }
        for (k, v) in other.final_states {
            *self.final_states.entry(k).or_default() += v;
        }
        self.frozen += other.frozen;
        self.first_even += other.first_even;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Serial,
    #[default]
    Parallel,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BatchSummary {
    pub rule: MutationRule,
    pub master_seed: u64,
    pub runs: u64,
    pub tosses: usize,
    /// Even-count histogram over runs.
    pub even_counts: BTreeMap<usize, u64>,
    /// Full-sequence counts, present when `tosses <= MAX_TRACKED_DEPTH`.
    pub sequences: Option<BTreeMap<String, u64>>,
    #[serde(serialize_with = "crate::serde_util::config_map")]
    pub final_states: BTreeMap<DieConfig, u64>,
    pub frozen_runs: u64,
    pub first_toss_even: u64,
    pub mean_even_count: f64,
    pub sd_even_count: f64,
}

impl BatchSummary {
    pub fn frequency(count: u64, runs: u64) -> f64 {
        count as f64 / runs as f64
    }

    pub fn sequence_frequencies(&self) -> Option<BTreeMap<String, f64>> {
        self.sequences.as_ref().map(|m| {
            m.iter()
                .map(|(k, &v)| (k.clone(), Self::frequency(v, self.runs)))
                .collect()
        })
    }

    pub fn even_count_frequencies(&self) -> BTreeMap<usize, f64> {
        self.even_counts
            .iter()
            .map(|(&k, &v)| (k, Self::frequency(v, self.runs)))
            .collect()
    }

    pub fn frozen_fraction(&self) -> f64 {
        Self::frequency(self.frozen_runs, self.runs)
    }
}

fn tally_range(rule: MutationRule, n: usize, master_seed: u64, range: std::ops::Range<u64>) -> Tally {
    let track = n <= MAX_TRACKED_DEPTH;
    let mut t = Tally::default();
    for i in range {
        t.record(&simulate_path(rule, n, mix_seed(master_seed, i)), track);
    }
    t
}

const CHUNK: u64 = 4096;

pub fn batch_with(
    rule: MutationRule,
    n: usize,
    runs: u64,
    master_seed: u64,
    execution: Execution,
) -> crate::Result<BatchSummary> {
    if runs == 0 {
        return Err(crate::Error::InvalidParameter("runs must be at least 1".into()));
    }
    let chunks: Vec<std::ops::Range<u64>> = (0..runs.div_ceil(CHUNK))
        .map(|c| c * CHUNK..((c + 1) * CHUNK).min(runs))
        .collect();
    let tally = match execution {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            chunks
                .into_par_iter()
                .map(|r| tally_range(rule, n, master_seed, r))
                .reduce(Tally::default, Tally::merge)
        }
        _ => chunks
            .into_iter()
            .map(|r| tally_range(rule, n, master_seed, r))
            .fold(Tally::default(), Tally::merge),
    };
    let total = runs as f64;
    let mean = tally
        .even_counts
        .iter()
        .map(|(&k, &v)| k as f64 * v as f64)
        .sum::<f64>()
        / total;
    let var = if runs > 1 {
        tally
            .even_counts
            .iter()
            .map(|(&k, &v)| (k as f64 - mean).powi(2) * v as f64)
            .sum::<f64>()
            / (total - 1.0)
    } else {
        0.0
    };
    Ok(BatchSummary {
        rule,
        master_seed,
        runs,
        tosses: n,
        even_counts: tally.even_counts,
        sequences: (n <= MAX_TRACKED_DEPTH).then_some(tally.sequences),
        final_states: tally.final_states,
        frozen_runs: tally.frozen,
        first_toss_even: tally.first_even,
        mean_even_count: mean,
        sd_even_count: var.sqrt(),
    })
}

pub fn batch(rule: MutationRule, n: usize, runs: u64, master_seed: u64) -> crate::Result<BatchSummary> {
    batch_with(rule, n, runs, master_seed, Execution::default())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FreezeSummary {
    pub rule: MutationRule,
    pub runs: u64,
    pub max_steps: usize,
    /// Frozen state reached -> run count.
    #[serde(serialize_with = "crate::serde_util::config_map")]
    pub frozen_states: BTreeMap<DieConfig, u64>,
    /// Runs still unfrozen after `max_steps`.
    pub unfrozen: u64,
    /// Mean steps to freeze over frozen runs.
    pub mean_steps: f64,
}

/// Rolls each run until the die freezes (or `max_steps` elapse) and
/// records the frozen configuration.
pub fn freeze_batch(rule: MutationRule, max_steps: usize, runs: u64, master_seed: u64) -> crate::Result<FreezeSummary> {
    if runs == 0 {
        return Err(crate::Error::InvalidParameter("runs must be at least 1".into()));
    }
    let mut frozen_states: BTreeMap<DieConfig, u64> = BTreeMap::new();
    let mut unfrozen = 0;
    let mut step_total = 0u64;
    for i in 0..runs {
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(master_seed, i));
        let mut state = initial_config();
        let mut steps = 0;
        while !is_frozen(state, rule) && steps < max_steps {
            state = roll(state, rule, &mut rng).1;
            steps += 1;
        }
        if is_frozen(state, rule) {
            *frozen_states.entry(state).or_default() += 1;
            step_total += steps as u64;
        } else {
            unfrozen += 1;
        }
    }
    let frozen_runs = runs - unfrozen;
    Ok(FreezeSummary {
        rule,
        runs,
        max_steps,
        frozen_states,
        unfrozen,
        mean_steps: if frozen_runs > 0 { step_total as f64 / frozen_runs as f64 } else { 0.0 },
    })
}
