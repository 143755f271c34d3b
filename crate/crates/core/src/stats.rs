//! Binomial fairness tests, run probabilities and sequential testing over
//! toss streams.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use statrs::function::erf::{erfc, erfc_inv};
use statrs::function::gamma::ln_gamma;

use crate::die::Parity;
use crate::error::{Error, Result};
use crate::rational::Ratio;

/// Run probability below which a same-parity streak counts as evidence.
pub const RUN_EVIDENCE_LEVEL: f64 = 0.001;
pub const DEFAULT_T_MIN: usize = 10;
pub const DEFAULT_ALPHA: f64 = 0.05;

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct TossSequence(pub Vec<Parity>);

impl TossSequence {
    pub fn new(tosses: Vec<Parity>) -> Self {
        TossSequence(tosses)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn even_count(&self) -> usize {
        self.0.iter().filter(|&&p| p == Parity::Even).count()
    }

    pub fn prefix(&self, t: usize) -> TossSequence {
        TossSequence(self.0[..t.min(self.len())].to_vec())
    }

    pub fn iter(&self) -> impl Iterator<Item = Parity> + '_ {
        self.0.iter().copied()
    }

    fn repeat(parity: Parity, n: usize) -> impl Iterator<Item = Parity> {
        std::iter::repeat_n(parity, n)
    }
}

impl fmt::Display for TossSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.0 {
            write!(f, "{}", p.symbol())?;
        }
        Ok(())
    }
}

impl FromStr for TossSequence {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        crate::cli::parse_sequence(s)
    }
}

impl Serialize for TossSequence {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl FromIterator<Parity> for TossSequence {
    fn from_iter<I: IntoIterator<Item = Parity>>(iter: I) -> Self {
        TossSequence(iter.into_iter().collect())
    }
}

fn check_unit(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::InvalidProbability(p.to_string()))
    }
}

fn check_open_unit(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::DegenerateProbability(p))
    }
}

/// Mean and standard deviation of Binomial(n, p).
pub fn binomial_moments(n: u64, p: f64) -> Result<(f64, f64)> {
    check_unit(p)?;
    let n = n as f64;
    Ok((n * p, (n * p * (1.0 - p)).sqrt()))
}

pub fn z_score(even_count: u64, n: u64, p0: f64) -> Result<f64> {
    check_open_unit(p0)?;
    if n == 0 {
        return Err(Error::EmptySequence);
    }
    let (mean, sd) = binomial_moments(n, p0)?;
    Ok((even_count as f64 - mean) / sd)
}

/// Standard normal CDF, `0.5 * erfc(-z / sqrt 2)`.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

/// Inverse of [`normal_cdf`] on (0, 1).
pub fn normal_quantile(p: f64) -> Result<f64> {
    check_open_unit(p)?;
    Ok(-std::f64::consts::SQRT_2 * erfc_inv(2.0 * p))
}

/// `P(X >= k)` for `X ~ Binomial(n, p)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TailProbability {
    Exact { value: Ratio },
    /// Computed in floating point because the exact sum left the 128-bit range.
    Approximate { value: f64 },
}

impl TailProbability {
    pub fn to_f64(&self) -> f64 {
        match self {
            TailProbability::Exact { value } => value.to_f64(),
            TailProbability::Approximate { value } => *value,
        }
    }

    pub fn exact(&self) -> Option<Ratio> {
        match self {
            TailProbability::Exact { value } => Some(*value),
            TailProbability::Approximate { .. } => None,
        }
    }
}

fn exact_tail(n: u64, k: u64, p: Ratio) -> Result<Ratio> {
    let q = p.complement()?;
    let n32 = u32::try_from(n).map_err(|_| Error::Overflow)?;
    let mut total = Ratio::ZERO;
    // C(n, j) built incrementally
    let mut coeff: i128 = 1;
    for j in 0..=n {
        if j >= k {
            let term = Ratio::from_integer(coeff)
                .checked_mul(p.checked_pow(j as u32)?)?
                .checked_mul(q.checked_pow(n32 - j as u32)?)?;
            total = total.checked_add(term)?;
        }
        if j < n {
            let g = num_integer::gcd(coeff, (j + 1) as i128);
            coeff = (coeff / g)
                .checked_mul((n - j) as i128)
                .ok_or(Error::Overflow)?
                / ((j + 1) as i128 / g);
        }
    }
    Ok(total)
}

fn float_tail(n: u64, k: u64, p: f64) -> f64 {
    if p <= 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    if p >= 1.0 {
        return 1.0;
    }
    let nf = n as f64;
    let sum: f64 = (k..=n)
        .map(|j| {
            let jf = j as f64;
            (ln_gamma(nf + 1.0) - ln_gamma(jf + 1.0) - ln_gamma(nf - jf + 1.0)
                + jf * p.ln()
                + (nf - jf) * (1.0 - p).ln())
            .exp()
        })
        .sum();
    sum.min(1.0)
}

pub fn exact_binomial_tail(n: u64, k: u64, p: Ratio) -> Result<TailProbability> {
    if k > n {
        return Err(Error::InvalidParameter(format!("k = {k} exceeds n = {n}")));
    }
    if p < Ratio::ZERO || p > Ratio::ONE {
        return Err(Error::InvalidProbability(p.to_string()));
    }
    if k == 0 {
        return Ok(TailProbability::Exact { value: Ratio::ONE });
    }
    match exact_tail(n, k, p) {
        Ok(value) => Ok(TailProbability::Exact { value }),
        Err(Error::Overflow) => Ok(TailProbability::Approximate {
            value: float_tail(n, k, p.to_f64()),
        }),
        Err(e) => Err(e),
    }
}

/// Probability of `length` consecutive independent outcomes of probability `p`.
pub fn run_probability(length: u32, p: Ratio) -> Result<Ratio> {
    if length == 0 {
        return Err(Error::InvalidParameter("run length must be at least 1".into()));
    }
    p.checked_pow(length)
}

/// Smallest run length `L` with `p^L` below [`RUN_EVIDENCE_LEVEL`].
pub fn default_run_threshold(p: f64) -> Result<u32> {
    check_open_unit(p)?;
    let mut len = 1u32;
    let mut prob = p;
    while prob >= RUN_EVIDENCE_LEVEL {
        len += 1;
        prob *= p;
    }
    Ok(len)
}

pub fn proportion_after(sequence: &TossSequence) -> Result<f64> {
    if sequence.is_empty() {
        return Err(Error::EmptySequence);
    }
    Ok(sequence.even_count() as f64 / sequence.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Alternative {
    #[default]
    TwoSided,
    /// Excess of Even outcomes.
    Greater,
    /// Excess of Odd outcomes.
    Less,
}

impl Alternative {
    fn critical(self, alpha: f64) -> Result<f64> {
        match self {
            Alternative::TwoSided => normal_quantile(1.0 - alpha / 2.0),
            Alternative::Greater | Alternative::Less => normal_quantile(1.0 - alpha),
        }
    }

    fn rejects(self, z: f64, critical: f64) -> bool {
        match self {
            Alternative::TwoSided => z.abs() >= critical,
            Alternative::Greater => z >= critical,
            Alternative::Less => -z >= critical,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestReport {
    pub n: usize,
    pub even_count: usize,
    pub p0: Ratio,
    pub mean: f64,
    pub sd: f64,
    pub z: f64,
    /// Normal upper tail `1 - Phi(z)`.
    pub p_value_one_sided: f64,
    pub p_value_two_sided: f64,
    /// Exact `P(X >= even_count)` under the null.
    pub p_value_exact: Option<TailProbability>,
    pub alpha: f64,
    pub alternative: Alternative,
    pub reject: bool,
}

fn check_p0(p0: Ratio) -> Result<f64> {
    let p = p0.to_f64();
    check_open_unit(p)?;
    Ok(p)
}

pub fn test_report(
    sequence: &TossSequence,
    p0: Ratio,
    alpha: f64,
    alternative: Alternative,
) -> Result<TestReport> {
    let p = check_p0(p0)?;
    check_open_unit(alpha)?;
    let n = sequence.len();
    let even_count = sequence.even_count();
    let z = z_score(even_count as u64, n as u64, p)?;
    let (mean, sd) = binomial_moments(n as u64, p)?;
    let upper = 1.0 - normal_cdf(z);
    Ok(TestReport {
        n,
        even_count,
        p0,
        mean,
        sd,
        z,
        p_value_one_sided: upper,
        p_value_two_sided: (2.0 * (1.0 - normal_cdf(z.abs()))).min(1.0),
        p_value_exact: exact_binomial_tail(n as u64, even_count as u64, p0).ok(),
        alpha,
        alternative,
        reject: alternative.rejects(z, alternative.critical(alpha)?),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SequentialConfig {
    pub p0: Ratio,
    pub alpha: f64,
    pub t_min: usize,
    /// Overrides the per-parity default run thresholds when set.
    pub run_threshold: Option<u32>,
    pub alternative: Alternative,
    /// Divide alpha by the number of prefixes tested.
    pub bonferroni: bool,
    /// Width of the trailing window for the windowed z statistic.
    pub window: usize,
}

impl Default for SequentialConfig {
    fn default() -> Self {
        SequentialConfig {
            p0: Ratio::new(1, 2).expect("1/2"),
            alpha: DEFAULT_ALPHA,
            t_min: DEFAULT_T_MIN,
            run_threshold: None,
            alternative: Alternative::TwoSided,
            bonferroni: false,
            window: DEFAULT_T_MIN,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrefixRecord {
    pub t: usize,
    pub even_count: usize,
    pub z: f64,
    pub flagged: bool,
    /// z over the trailing window, once `t >= window`.
    pub window_z: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunEvent {
    pub parity: Parity,
    /// 1-based index of the first toss of the run.
    pub start: usize,
    /// Toss index at which the run reached its threshold.
    pub fired_at: usize,
    /// Final length of the maximal run.
    pub length: usize,
    /// Null probability of a run of the threshold length.
    pub threshold_probability: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RunThresholds {
    pub even: u32,
    pub odd: u32,
}

impl RunThresholds {
    pub fn for_parity(&self, p: Parity) -> u32 {
        match p {
            Parity::Even => self.even,
            Parity::Odd => self.odd,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SequentialReport {
    pub config: SequentialConfig,
    pub critical_z: f64,
    pub run_thresholds: RunThresholds,
    pub records: Vec<PrefixRecord>,
    pub runs: Vec<RunEvent>,
    pub first_z_rejection: Option<usize>,
    pub first_run_rejection: Option<usize>,
    pub first_rejection: Option<usize>,
}

pub fn sequential_report(sequence: &TossSequence, config: &SequentialConfig) -> Result<SequentialReport> {
    let p = check_p0(config.p0)?;
    check_open_unit(config.alpha)?;
    if config.t_min == 0 {
        return Err(Error::InvalidParameter("t_min must be at least 1".into()));
    }
    if config.window == 0 {
        return Err(Error::InvalidParameter("window must be at least 1".into()));
    }
    let tested = sequence.len().saturating_sub(config.t_min) + 1;
    let alpha = if config.bonferroni {
        config.alpha / tested as f64
    } else {
        config.alpha
    };
    let critical_z = config.alternative.critical(alpha)?;
    let run_thresholds = match config.run_threshold {
        Some(0) => return Err(Error::InvalidParameter("run threshold must be at least 1".into())),
        Some(l) => RunThresholds { even: l, odd: l },
        None => RunThresholds {
            even: default_run_threshold(p)?,
            odd: default_run_threshold(1.0 - p)?,
        },
    };

    let mut records = Vec::new();
    let mut runs: Vec<RunEvent> = Vec::new();
    let mut evens = 0usize;
    let mut run_parity: Option<Parity> = None;
    let mut run_len = 0usize;
    let mut run_open_event = false;
    let tosses = &sequence.0;

    for (i, &toss) in tosses.iter().enumerate() {
        let t = i + 1;
        if toss == Parity::Even {
            evens += 1;
        }
        if run_parity == Some(toss) {
            run_len += 1;
        } else {
            run_parity = Some(toss);
            run_len = 1;
            run_open_event = false;
        }
        if run_open_event {
            runs.last_mut().expect("open event").length = run_len;
        } else if run_len == run_thresholds.for_parity(toss) as usize {
            let pp = if toss == Parity::Even { p } else { 1.0 - p };
            runs.push(RunEvent {
                parity: toss,
                start: t + 1 - run_len,
                fired_at: t,
                length: run_len,
                threshold_probability: pp.powi(run_len as i32),
            });
            run_open_event = true;
        }
        if t >= config.t_min {
            let z = z_score(evens as u64, t as u64, p)?;
            let window_z = if t >= config.window {
                let w = config.window;
                let wev = tosses[t - w..t].iter().filter(|&&x| x == Parity::Even).count();
                Some(z_score(wev as u64, w as u64, p)?)
            } else {
                None
            };
            records.push(PrefixRecord {
                t,
                even_count: evens,
                z,
                flagged: config.alternative.rejects(z, critical_z),
                window_z,
            });
        }
    }

    let first_z_rejection = records.iter().find(|r| r.flagged).map(|r| r.t);
    let first_run_rejection = runs.first().map(|r| r.fired_at);
    let first_rejection = match (first_z_rejection, first_run_rejection) {
        (Some(a), Some(b)) => Some(a.min(b)),
        (a, b) => a.or(b),
    };
    Ok(SequentialReport {
        config: config.clone(),
        critical_z,
        run_thresholds,
        records,
        runs,
        first_z_rejection,
        first_run_rejection,
        first_rejection,
    })
}

/// The three orderings of 58 Even and 42 Odd tosses.
pub fn scenario(id: u8) -> Result<TossSequence> {
    use Parity::{Even, Odd};
    let tosses: Vec<Parity> = match id {
        1 => TossSequence::repeat(Even, 58)
            .chain(TossSequence::repeat(Odd, 42))
            .collect(),
        2 => TossSequence::repeat(Even, 42)
            .chain(TossSequence::repeat(Odd, 42))
            .chain(TossSequence::repeat(Even, 16))
            .collect(),
        3 => std::iter::repeat_n([Even, Odd], 42)
            .flatten()
            .chain(TossSequence::repeat(Even, 16))
            .collect(),
        other => return Err(Error::InvalidScenario(other)),
    };
    Ok(TossSequence(tosses))
}
