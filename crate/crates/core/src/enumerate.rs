//! Exact breadth-first enumeration of toss-path and configuration
//! distributions from the initial die.

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use crate::die::{initial_config, parity_probability, transitions, DieConfig, MutationRule, Parity};
use crate::error::{Error, Result};
use crate::rational::Ratio;

/// Deepest enumeration supported with 128-bit rationals.
pub const MAX_DEPTH: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathDistribution {
    pub rule: MutationRule,
    pub depth: usize,
    /// Keys are `E`/`O` strings of length `depth`, in lexicographic order.
    pub entries: BTreeMap<String, Ratio>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfigDistribution {
    pub rule: MutationRule,
    pub step: usize,
    #[serde(serialize_with = "crate::serde_util::config_map")]
    pub entries: BTreeMap<DieConfig, Ratio>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImbalanceDistribution {
    pub rule: MutationRule,
    pub steps: usize,
    /// Number of Even outcomes -> probability.
    pub entries: BTreeMap<usize, Ratio>,
}

fn check_depth(depth: usize, allow_zero: bool) -> Result<()> {
    if depth > MAX_DEPTH || (!allow_zero && depth == 0) {
        return Err(Error::DepthOutOfRange {
            depth,
            max: MAX_DEPTH,
        });
    }
    Ok(())
}

/// Expands `frontier` one roll. `key` maps (old key, outcome) to the new key;
/// nodes with equal (key, state) merge.
fn expand<K, F>(
    frontier: HashMap<(K, DieConfig), Ratio>,
    rule: MutationRule,
    key: F,
) -> Result<HashMap<(K, DieConfig), Ratio>>
where
    K: std::hash::Hash + Eq + Copy,
    F: Fn(K, Parity) -> K,
{
    let mut next: HashMap<(K, DieConfig), Ratio> = HashMap::with_capacity(frontier.len() * 2);
    for ((k, state), p) in frontier {
        for t in transitions(state, rule) {
            let mass = p.checked_mul(t.probability)?;
            let slot = next.entry((key(k, t.outcome), t.next)).or_insert(Ratio::ZERO);
            *slot = slot.checked_add(mass)?;
        }
    }
    Ok(next)
}

fn path_key(bits: u32, depth: usize) -> String {
    (0..depth)
        .rev()
        .map(|i| if bits >> i & 1 == 0 { 'E' } else { 'O' })
        .collect()
}

pub fn path_distribution(rule: MutationRule, depth: usize) -> Result<PathDistribution> {
    check_depth(depth, false)?;
    // path bits: first toss most significant, Even = 0
    let mut frontier = HashMap::from([((0u32, initial_config()), Ratio::ONE)]);
    for _ in 0..depth {
        frontier = expand(frontier, rule, |bits, outcome| {
            bits << 1 | (outcome == Parity::Odd) as u32
        })?;
    }
    let mut merged: BTreeMap<u32, Ratio> = BTreeMap::new();
    for ((bits, _), p) in frontier {
        let slot = merged.entry(bits).or_insert(Ratio::ZERO);
        *slot = slot.checked_add(p)?;
    }
    Ok(PathDistribution {
        rule,
        depth,
        entries: merged
            .into_iter()
            .map(|(bits, p)| (path_key(bits, depth), p))
            .collect(),
    })
}

pub fn config_distribution(rule: MutationRule, steps: usize) -> Result<ConfigDistribution> {
    check_depth(steps, true)?;
    let mut frontier = HashMap::from([(((), initial_config()), Ratio::ONE)]);
    for _ in 0..steps {
        frontier = expand(frontier, rule, |_, _| ())?;
    }
    Ok(ConfigDistribution {
        rule,
        step: steps,
        entries: frontier.into_iter().map(|(((), s), p)| (s, p)).collect(),
    })
}

pub fn imbalance_distribution(rule: MutationRule, steps: usize) -> Result<ImbalanceDistribution> {
    check_depth(steps, false)?;
    let mut frontier = HashMap::from([((0usize, initial_config()), Ratio::ONE)]);
    for _ in 0..steps {
        frontier = expand(frontier, rule, |evens, outcome| {
            evens + (outcome == Parity::Even) as usize
        })?;
    }
    let mut entries: BTreeMap<usize, Ratio> = BTreeMap::new();
    for ((evens, _), p) in frontier {
        let slot = entries.entry(evens).or_insert(Ratio::ZERO);
        *slot = slot.checked_add(p)?;
    }
    Ok(ImbalanceDistribution {
        rule,
        steps,
        entries,
    })
}

impl ConfigDistribution {
    /// Ensemble probability that the next toss shows `parity`.
    pub fn next_parity_probability(&self, parity: Parity) -> Result<Ratio> {
        Ratio::sum(
            self.entries
                .iter()
                .map(|(&s, &p)| p.checked_mul(parity_probability(s, parity)))
                .collect::<Result<Vec<_>>>()?,
        )
    }

    pub fn total(&self) -> Result<Ratio> {
        Ratio::sum(self.entries.values().copied())
    }
}

impl PathDistribution {
    pub fn total(&self) -> Result<Ratio> {
        Ratio::sum(self.entries.values().copied())
    }

    pub fn get(&self, sequence: &str) -> Option<Ratio> {
        self.entries.get(sequence).copied()
    }

    /// Sums over the last toss, giving the distribution one level shallower.
    pub fn marginal(&self) -> Result<PathDistribution> {
        if self.depth <= 1 {
            return Err(Error::DepthOutOfRange {
                depth: self.depth.saturating_sub(1),
                max: MAX_DEPTH,
            });
        }
        let mut entries: BTreeMap<String, Ratio> = BTreeMap::new();
        for (k, &p) in &self.entries {
            let slot = entries.entry(k[..k.len() - 1].to_string()).or_insert(Ratio::ZERO);
            *slot = slot.checked_add(p)?;
        }
        Ok(PathDistribution {
            rule: self.rule,
            depth: self.depth - 1,
            entries,
        })
    }
}

/// (sequence, standard die, nonstandard die), each as (numerator, denominator).
pub type ReferenceRow = (&'static str, (i128, i128), (i128, i128));

/// Values printed in the published three-roll table, kept for side-by-side
/// display only. Columns: sequence, standard die, nonstandard die.
pub const REFERENCE_TABLE: [ReferenceRow; 8] = [
    ("EEE", (1, 8), (7, 27)),
    ("EEO", (1, 8), (2, 27)),
    ("EOE", (1, 8), (1, 12)),
    ("EOO", (1, 8), (1, 12)),
    ("OEE", (1, 8), (1, 12)),
    ("OEO", (1, 8), (1, 12)),
    ("OOE", (1, 8), (2, 27)),
    ("OOO", (1, 8), (7, 27)),
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableRow {
    pub sequence: String,
    pub standard: Ratio,
    pub standard_reference: Ratio,
    pub nonstandard: Ratio,
    pub nonstandard_reference: Ratio,
    pub standard_matches: bool,
    pub nonstandard_matches: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableAudit {
    pub rule: MutationRule,
    pub rows: Vec<TableRow>,
    pub mismatches: usize,
}

/// Enumerates depth 3 under `NoMutation` and `rule`, next to the reference table.
pub fn table_audit(rule: MutationRule) -> Result<TableAudit> {
    let standard = path_distribution(MutationRule::NoMutation, 3)?;
    let nonstandard = path_distribution(rule, 3)?;
    let mut rows = Vec::with_capacity(REFERENCE_TABLE.len());
    for (seq, (sn, sd), (nn, nd)) in REFERENCE_TABLE {
        let std_exact = standard.get(seq).unwrap_or(Ratio::ZERO);
        let non_exact = nonstandard.get(seq).unwrap_or(Ratio::ZERO);
        let std_ref = Ratio::new(sn, sd)?;
        let non_ref = Ratio::new(nn, nd)?;
        rows.push(TableRow {
            sequence: seq.to_string(),
            standard: std_exact,
            standard_reference: std_ref,
            nonstandard: non_exact,
            nonstandard_reference: non_ref,
            standard_matches: std_exact == std_ref,
            nonstandard_matches: non_exact == non_ref,
        });
    }
    let mismatches = rows
        .iter()
        .filter(|r| !(r.standard_matches && r.nonstandard_matches))
        .count();
    Ok(TableAudit {
        rule,
        rows,
        mismatches,
    })
}
