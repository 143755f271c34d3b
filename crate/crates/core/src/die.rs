//! Die configurations, mutation rules and single-roll transitions.
//!
//! A six-faced die is three opposite-face pairs. Only the parity of each
//! face matters, and face identity is irrelevant to the dynamics, so a
//! configuration is the multiset of pair types: `(#EE, #EO, #OO)`.
//! After each roll the hidden face (opposite the rolled one) is mutated
//! according to a [`MutationRule`].

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::Ratio;

pub const FACES: i128 = 6;
pub const PAIRS: u8 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn flip(self) -> Parity {
        match self {
            Parity::Even => Parity::Odd,
            Parity::Odd => Parity::Even,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Parity::Even => 'E',
            Parity::Odd => 'O',
        }
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

/// Canonical die state: counts of even-even, mixed and odd-odd opposite pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DieConfig {
    even_pairs: u8,
    mixed_pairs: u8,
    odd_pairs: u8,
}

impl DieConfig {
    pub fn new(even_pairs: u8, mixed_pairs: u8, odd_pairs: u8) -> Result<Self> {
        if even_pairs as u16 + mixed_pairs as u16 + odd_pairs as u16 != PAIRS as u16 {
            return Err(Error::InvalidConfig(even_pairs, mixed_pairs, odd_pairs));
        }
        Ok(DieConfig {
            even_pairs,
            mixed_pairs,
            odd_pairs,
        })
    }

    /// All ten canonical configurations, ordered by `(a, b, c)` descending in `a`.
    pub fn all() -> impl Iterator<Item = DieConfig> {
        (0..=PAIRS).rev().flat_map(|a| {
            (0..=PAIRS - a).rev().map(move |b| DieConfig {
                even_pairs: a,
                mixed_pairs: b,
                odd_pairs: PAIRS - a - b,
            })
        })
    }

    pub fn even_pairs(&self) -> u8 {
        self.even_pairs
    }

    pub fn mixed_pairs(&self) -> u8 {
        self.mixed_pairs
    }

    pub fn odd_pairs(&self) -> u8 {
        self.odd_pairs
    }

    pub fn triple(&self) -> (u8, u8, u8) {
        (self.even_pairs, self.mixed_pairs, self.odd_pairs)
    }

    pub fn even_faces(&self) -> u8 {
        2 * self.even_pairs + self.mixed_pairs
    }

    pub fn odd_faces(&self) -> u8 {
        2 * self.odd_pairs + self.mixed_pairs
    }

    pub fn faces(&self, parity: Parity) -> u8 {
        match parity {
            Parity::Even => self.even_faces(),
            Parity::Odd => self.odd_faces(),
        }
    }

    // Pair-type moves. Callers only invoke these for branches with positive
    // probability, so the source count is nonzero.
    fn shift(self, from: PairKind, to: PairKind) -> DieConfig {
        let mut counts = [self.even_pairs, self.mixed_pairs, self.odd_pairs];
        counts[from as usize] -= 1;
        counts[to as usize] += 1;
        DieConfig {
            even_pairs: counts[0],
            mixed_pairs: counts[1],
            odd_pairs: counts[2],
        }
    }
}

impl fmt::Display for DieConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({},{},{})",
            self.even_pairs, self.mixed_pairs, self.odd_pairs
        )
    }
}

impl FromStr for DieConfig {
    type Err = Error;

    /// Parses `"a,b,c"` with optional surrounding parentheses.
    fn from_str(s: &str) -> Result<Self> {
        let inner = s.trim().trim_start_matches('(').trim_end_matches(')');
        let parts: Vec<u8> = inner
            .split(',')
            .map(|p| p.trim().parse::<u8>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::InvalidNumber(s.to_string()))?;
        match parts[..] {
            [a, b, c] => DieConfig::new(a, b, c),
            _ => Err(Error::InvalidNumber(s.to_string())),
        }
    }
}

impl Serialize for DieConfig {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        [self.even_pairs, self.mixed_pairs, self.odd_pairs].serialize(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum PairKind {
    Even = 0,
    Mixed = 1,
    Odd = 2,
}

/// How a roll mutates the hidden face.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MutationRule {
    /// Standard die: nothing ever changes.
    #[serde(rename = "none")]
    NoMutation,
    /// The hidden face takes the parity of the rolled face.
    #[default]
    #[serde(rename = "copy")]
    ParityCopy,
    /// The hidden face gains one dot, flipping its parity.
    #[serde(rename = "increment")]
    Increment,
}

impl MutationRule {
    pub const ALL: [MutationRule; 3] = [
        MutationRule::NoMutation,
        MutationRule::ParityCopy,
        MutationRule::Increment,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MutationRule::NoMutation => "none",
            MutationRule::ParityCopy => "copy",
            MutationRule::Increment => "increment",
        }
    }
}

impl fmt::Display for MutationRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MutationRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "none" | "standard" => Ok(MutationRule::NoMutation),
            "copy" | "paritycopy" => Ok(MutationRule::ParityCopy),
            "increment" | "inc" => Ok(MutationRule::Increment),
            _ => Err(Error::InvalidRule(s.to_string())),
        }
    }
}

/// Which kind of face came up. Also the fixed sampling order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum FaceKind {
    /// A face of an even-even pair.
    MatchedEven,
    /// The even face of a mixed pair.
    MixedEven,
    /// The odd face of a mixed pair.
    MixedOdd,
    /// A face of an odd-odd pair.
    MatchedOdd,
}

impl FaceKind {
    pub const ORDER: [FaceKind; 4] = [
        FaceKind::MatchedEven,
        FaceKind::MixedEven,
        FaceKind::MixedOdd,
        FaceKind::MatchedOdd,
    ];

    pub fn parity(self) -> Parity {
        match self {
            FaceKind::MatchedEven | FaceKind::MixedEven => Parity::Even,
            FaceKind::MixedOdd | FaceKind::MatchedOdd => Parity::Odd,
        }
    }

    /// Number of faces of this kind on `config`.
    pub fn count(self, config: DieConfig) -> u8 {
        match self {
            FaceKind::MatchedEven => 2 * config.even_pairs,
            FaceKind::MixedEven | FaceKind::MixedOdd => config.mixed_pairs,
            FaceKind::MatchedOdd => 2 * config.odd_pairs,
        }
    }
}

/// One unmerged roll branch: the face kind that came up and where it leads.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Branch {
    pub face: FaceKind,
    pub outcome: Parity,
    pub next: DieConfig,
    pub probability: Ratio,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RollResult {
    pub outcome: Parity,
    pub next: DieConfig,
    pub probability: Ratio,
}

pub fn initial_config() -> DieConfig {
    DieConfig {
        even_pairs: 0,
        mixed_pairs: PAIRS,
        odd_pairs: 0,
    }
}

pub fn parity_probability(config: DieConfig, parity: Parity) -> Ratio {
    // denominators are fixed at 6, never overflows
    Ratio::new(config.faces(parity) as i128, FACES).expect("nonzero denominator")
}

fn successor(config: DieConfig, face: FaceKind, rule: MutationRule) -> DieConfig {
    use FaceKind::*;
    use PairKind as P;
    match rule {
        MutationRule::NoMutation => config,
        MutationRule::ParityCopy => match face {
            MatchedEven | MatchedOdd => config,
            MixedEven => config.shift(P::Mixed, P::Even),
            MixedOdd => config.shift(P::Mixed, P::Odd),
        },
        MutationRule::Increment => match face {
            MatchedEven => config.shift(P::Even, P::Mixed),
            MixedEven => config.shift(P::Mixed, P::Even),
            MixedOdd => config.shift(P::Mixed, P::Odd),
            MatchedOdd => config.shift(P::Odd, P::Mixed),
        },
    }
}

/// Positive-probability roll branches in [`FaceKind::ORDER`].
pub fn branches(config: DieConfig, rule: MutationRule) -> Vec<Branch> {
    FaceKind::ORDER
        .iter()
        .filter(|face| face.count(config) > 0)
        .map(|&face| Branch {
            face,
            outcome: face.parity(),
            next: successor(config, face, rule),
            probability: Ratio::new(face.count(config) as i128, FACES).expect("nonzero"),
        })
        .collect()
}

/// Roll results with identical `(outcome, next)` merged, in first-seen branch order.
pub fn transitions(config: DieConfig, rule: MutationRule) -> Vec<RollResult> {
    let mut out: Vec<RollResult> = Vec::with_capacity(4);
    for b in branches(config, rule) {
        match out
            .iter_mut()
            .find(|r| r.outcome == b.outcome && r.next == b.next)
        {
            Some(r) => {
                r.probability = r
                    .probability
                    .checked_add(b.probability)
                    .expect("sixths never overflow")
            }
            None => out.push(RollResult {
                outcome: b.outcome,
                next: b.next,
                probability: b.probability,
            }),
        }
    }
    out
}

pub fn is_frozen(config: DieConfig, rule: MutationRule) -> bool {
    transitions(config, rule).iter().all(|r| r.next == config)
}

pub fn flip_parities(config: DieConfig) -> DieConfig {
    DieConfig {
        even_pairs: config.odd_pairs,
        mixed_pairs: config.mixed_pairs,
        odd_pairs: config.even_pairs,
    }
}
