//! Markov chain over canonical die configurations: construction,
//! communicating-class classification, ergodicity, absorption.

use std::collections::{HashMap, VecDeque};

use serde::Serialize;

use crate::die::{initial_config, parity_probability, transitions, flip_parities, DieConfig, MutationRule, Parity};
use crate::error::{Error, Result};
use crate::linalg::solve;
use crate::rational::Ratio;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainModel {
    pub rule: MutationRule,
    /// Reachable states in breadth-first discovery order; index 0 is the initial die.
    pub states: Vec<DieConfig>,
    /// Row-stochastic transition matrix indexed like `states`.
    pub matrix: Vec<Vec<Ratio>>,
}

impl ChainModel {
    pub fn index_of(&self, state: DieConfig) -> Option<usize> {
        self.states.iter().position(|&s| s == state)
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn successors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.matrix[i]
            .iter()
            .enumerate()
            .filter(|(_, p)| !p.is_zero())
            .map(|(j, _)| j)
    }

    pub fn probability(&self, from: DieConfig, to: DieConfig) -> Option<Ratio> {
        Some(self.matrix[self.index_of(from)?][self.index_of(to)?])
    }
}

pub fn build_chain(rule: MutationRule) -> ChainModel {
    let start = initial_config();
    let mut states = vec![start];
    let mut index = HashMap::from([(start, 0usize)]);
    let mut rows: Vec<Vec<(usize, Ratio)>> = Vec::new();
    let mut queue = VecDeque::from([start]);
    while let Some(s) = queue.pop_front() {
        let mut row = Vec::new();
        for t in transitions(s, rule) {
            let j = *index.entry(t.next).or_insert_with(|| {
                states.push(t.next);
                queue.push_back(t.next);
                states.len() - 1
            });
            // an (Even, s') and (Odd, s') pair can share a target
            match row.iter_mut().find(|(k, _)| *k == j) {
                Some((_, p)) => {
                    *p = Ratio::checked_add(*p, t.probability).expect("sixths never overflow")
                }
                None => row.push((j, t.probability)),
            }
        }
        rows.push(row);
    }
    let n = states.len();
    let matrix = rows
        .into_iter()
        .map(|row| {
            let mut dense = vec![Ratio::ZERO; n];
            for (j, p) in row {
                dense[j] = p;
            }
            dense
        })
        .collect();
    ChainModel {
        rule,
        states,
        matrix,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CommClass {
    pub states: Vec<DieConfig>,
    #[serde(skip)]
    pub members: Vec<usize>,
    pub closed: bool,
    /// `recurrent` for closed classes, `transient` otherwise.
    pub kind: &'static str,
    pub absorbing: bool,
    /// gcd of cycle lengths; `None` for a transient class without cycles.
    pub period: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainClassification {
    pub classes: Vec<CommClass>,
    /// Class index of each state, indexed like `ChainModel::states`.
    pub class_of: Vec<usize>,
    pub absorbing_states: Vec<DieConfig>,
}

impl ChainClassification {
    pub fn closed_classes(&self) -> impl Iterator<Item = (usize, &CommClass)> {
        self.classes.iter().enumerate().filter(|(_, c)| c.closed)
    }

    pub fn is_transient(&self, state: usize) -> bool {
        !self.classes[self.class_of[state]].closed
    }
}

// Tarjan's algorithm. Components come out in reverse topological order;
// they are re-sorted by smallest member index afterwards.
struct Tarjan<'a> {
    chain: &'a ChainModel,
    index: Vec<Option<usize>>,
    low: Vec<usize>,
    on_stack: Vec<bool>,
    stack: Vec<usize>,
    counter: usize,
    components: Vec<Vec<usize>>,
}

impl Tarjan<'_> {
    fn visit(&mut self, v: usize) {
        self.index[v] = Some(self.counter);
        self.low[v] = self.counter;
        self.counter += 1;
        self.stack.push(v);
        self.on_stack[v] = true;
        let succ: Vec<usize> = self.chain.successors(v).collect();
        for w in succ {
            match self.index[w] {
                None => {
                    self.visit(w);
                    self.low[v] = self.low[v].min(self.low[w]);
                }
                Some(iw) if self.on_stack[w] => self.low[v] = self.low[v].min(iw),
                _ => {}
            }
        }
        if Some(self.low[v]) == self.index[v] {
            let mut comp = Vec::new();
            loop {
                let w = self.stack.pop().expect("tarjan stack");
                self.on_stack[w] = false;
                comp.push(w);
                if w == v {
                    break;
                }
            }
            comp.sort_unstable();
            self.components.push(comp);
        }
    }
}

fn strongly_connected(chain: &ChainModel) -> Vec<Vec<usize>> {
    let n = chain.len();
    let mut t = Tarjan {
        chain,
        index: vec![None; n],
        low: vec![0; n],
        on_stack: vec![false; n],
        stack: Vec::new(),
        counter: 0,
        components: Vec::new(),
    };
    for v in 0..n {
        if t.index[v].is_none() {
            t.visit(v);
        }
    }
    let mut comps = t.components;
    comps.sort_by_key(|c| c[0]);
    comps
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 { a } else { gcd(b, a % b) }
}

// Period via BFS levels inside the class: gcd over edges u->v of level(u)+1-level(v).
fn class_period(chain: &ChainModel, members: &[usize], class_of: &[usize], id: usize) -> Option<u64> {
    let mut level: HashMap<usize, u64> = HashMap::from([(members[0], 0)]);
    let mut queue = VecDeque::from([members[0]]);
    let mut g = 0u64;
    while let Some(u) = queue.pop_front() {
        for v in chain.successors(u).filter(|&v| class_of[v] == id) {
            match level.get(&v) {
                Some(&lv) => g = gcd(g, (level[&u] + 1).abs_diff(lv)),
                None => {
                    level.insert(v, level[&u] + 1);
                    queue.push_back(v);
                }
            }
        }
    }
    (g > 0).then_some(g)
}

pub fn classify(chain: &ChainModel) -> ChainClassification {
    let comps = strongly_connected(chain);
    let mut class_of = vec![0usize; chain.len()];
    for (id, comp) in comps.iter().enumerate() {
        for &v in comp {
            class_of[v] = id;
        }
    }
    let classes: Vec<CommClass> = comps
        .iter()
        .enumerate()
        .map(|(id, comp)| {
            let closed = comp
                .iter()
                .all(|&u| chain.successors(u).all(|v| class_of[v] == id));
            CommClass {
                states: comp.iter().map(|&i| chain.states[i]).collect(),
                members: comp.clone(),
                closed,
                kind: if closed { "recurrent" } else { "transient" },
                absorbing: closed && comp.len() == 1,
                period: class_period(chain, comp, &class_of, id),
            }
        })
        .collect();
    let absorbing_states = classes
        .iter()
        .filter(|c| c.absorbing)
        .map(|c| c.states[0])
        .collect();
    ChainClassification {
        classes,
        class_of,
        absorbing_states,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErgodicityVerdict {
    pub ergodic: bool,
    /// Period 1 across the whole chain; reported separately from the verdict.
    pub aperiodic: bool,
    /// `(from, to)` with `to` unreachable from `from`, when not ergodic.
    pub witness: Option<(DieConfig, DieConfig)>,
    pub explanation: String,
}

fn reachable_from(chain: &ChainModel, start: usize) -> Vec<bool> {
    let mut seen = vec![false; chain.len()];
    seen[start] = true;
    let mut queue = VecDeque::from([start]);
    while let Some(u) = queue.pop_front() {
        for v in chain.successors(u) {
            if !seen[v] {
                seen[v] = true;
                queue.push_back(v);
            }
        }
    }
    seen
}

/// Ergodic means the reachable chain is one closed communicating class.
pub fn is_ergodic(chain: &ChainModel, classes: &ChainClassification) -> ErgodicityVerdict {
    let aperiodic = classes.classes.iter().all(|c| c.period == Some(1));
    if classes.classes.len() == 1 {
        let n = chain.len();
        return ErgodicityVerdict {
            ergodic: true,
            aperiodic,
            witness: None,
            explanation: format!(
                "all {n} reachable state(s) form a single closed communicating class; every state reaches every other"
            ),
        };
    }
    // Prefer a recurrent state and its parity mirror as the witness.
    let mut witness = None;
    'outer: for (_, class) in classes.closed_classes().chain(classes.classes.iter().enumerate()) {
        let u = class.members[0];
        let seen = reachable_from(chain, u);
        let mirror = chain.index_of(flip_parities(chain.states[u]));
        let target = mirror
            .filter(|&m| !seen[m])
            .or_else(|| (0..chain.len()).find(|&v| !seen[v]));
        if let Some(v) = target {
            witness = Some((chain.states[u], chain.states[v]));
            break 'outer;
        }
    }
    let (from, to) = witness.expect("more than one class implies an unreachable pair");
    ErgodicityVerdict {
        ergodic: false,
        aperiodic,
        witness,
        explanation: format!(
            "{} communicating classes ({} closed); state {from} cannot reach state {to}",
            classes.classes.len(),
            classes.closed_classes().count()
        ),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassAbsorption {
    pub class_id: usize,
    pub states: Vec<DieConfig>,
    /// Probability of eventually entering this class from the initial die.
    pub probability: Ratio,
    /// Expected steps to enter the class, conditional on entering it.
    pub expected_steps: Option<Ratio>,
    /// Long-run share of Even tosses once inside the class.
    pub even_share: Ratio,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AbsorptionReport {
    pub rule: MutationRule,
    pub initial: DieConfig,
    /// Expected steps until the chain enters any closed class.
    pub expected_steps: Ratio,
    pub classes: Vec<ClassAbsorption>,
}

pub fn absorption(chain: &ChainModel, classes: &ChainClassification) -> Result<AbsorptionReport> {
    let closed: Vec<usize> = classes.closed_classes().map(|(id, _)| id).collect();
    if closed.is_empty() {
        return Err(Error::NoClosedClass);
    }
    let start = chain
        .index_of(initial_config())
        .ok_or(Error::InvalidParameter("initial state missing".into()))?;
    let transient: Vec<usize> = (0..chain.len()).filter(|&i| classes.is_transient(i)).collect();

    let mut report = AbsorptionReport {
        rule: chain.rule,
        initial: initial_config(),
        expected_steps: Ratio::ZERO,
        classes: Vec::with_capacity(closed.len()),
    };

    if !classes.is_transient(start) {
        for &id in &closed {
            let hit = classes.class_of[start] == id;
            report.classes.push(ClassAbsorption {
                class_id: id,
                states: classes.classes[id].states.clone(),
                probability: if hit { Ratio::ONE } else { Ratio::ZERO },
                expected_steps: hit.then_some(Ratio::ZERO),
                even_share: long_run_share(chain, classes, id)?,
            });
        }
        return Ok(report);
    }

    // (I - Q) x = b over transient states.
    let pos: HashMap<usize, usize> = transient.iter().enumerate().map(|(k, &i)| (i, k)).collect();
    let m = transient.len();
    let mut system = vec![vec![Ratio::ZERO; m]; m];
    for (r, &i) in transient.iter().enumerate() {
        for (c, &j) in transient.iter().enumerate() {
            let q = chain.matrix[i][j];
            system[r][c] = if r == c { Ratio::ONE.checked_sub(q)? } else { q.checked_neg()? };
        }
    }
    // right-hand sides: all-ones (times), then one column per closed class
    let mut rhs: Vec<Vec<Ratio>> = vec![vec![Ratio::ONE; m]];
    for &id in &closed {
        let col = transient
            .iter()
            .map(|&i| {
                Ratio::sum(
                    chain.matrix[i]
                        .iter()
                        .enumerate()
                        .filter(|(j, _)| classes.class_of[*j] == id)
                        .map(|(_, &p)| p),
                )
            })
            .collect::<Result<Vec<_>>>()?;
        rhs.push(col);
    }
    let sol = solve(&system, &rhs)?;
    let s = pos[&start];
    report.expected_steps = sol[0][s];

    // E[T; absorbed in k] solves the same system with h_k on the right.
    let weighted = solve(&system, &sol[1..])?;
    for (k, &id) in closed.iter().enumerate() {
        let probability = sol[k + 1][s];
        let expected_steps = if probability.is_zero() {
            None
        } else {
            Some(weighted[k][s].checked_div(probability)?)
        };
        report.classes.push(ClassAbsorption {
            class_id: id,
            states: classes.classes[id].states.clone(),
            probability,
            expected_steps,
            even_share: long_run_share(chain, classes, id)?,
        });
    }
    Ok(report)
}

/// Stationary Even share within a closed class.
pub fn long_run_share(chain: &ChainModel, classes: &ChainClassification, class_id: usize) -> Result<Ratio> {
    let class = classes.classes.get(class_id).ok_or(Error::NoSuchClass(class_id))?;
    if !class.closed {
        return Err(Error::ClassNotClosed(class_id));
    }
    let members = &class.members;
    let k = members.len();
    // pi (P_C - I) = 0 with the last balance equation replaced by sum(pi) = 1
    let mut system = vec![vec![Ratio::ZERO; k]; k];
    for (r, &j) in members.iter().enumerate().take(k - 1) {
        for (c, &i) in members.iter().enumerate() {
            let p = chain.matrix[i][j];
            system[r][c] = if i == j { p.checked_sub(Ratio::ONE)? } else { p };
        }
    }
    system[k - 1] = vec![Ratio::ONE; k];
    let mut rhs = vec![Ratio::ZERO; k];
    rhs[k - 1] = Ratio::ONE;
    let pi = &solve(&system, &[rhs])?[0];
    Ratio::sum(
        members
            .iter()
            .zip(pi)
            .map(|(&i, &w)| w.checked_mul(parity_probability(chain.states[i], Parity::Even)))
            .collect::<Result<Vec<_>>>()?,
    )
}

/// Everything the chain subcommand reports, in one serializable value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainReport {
    pub chain: ChainModel,
    pub classification: ChainClassification,
    pub verdict: ErgodicityVerdict,
    pub absorption: AbsorptionReport,
}

pub fn analyze(rule: MutationRule) -> Result<ChainReport> {
    let chain = build_chain(rule);
    let classification = classify(&chain);
    let verdict = is_ergodic(&chain, &classification);
    let absorption = absorption(&chain, &classification)?;
    Ok(ChainReport {
        chain,
        classification,
        verdict,
        absorption,
    })
}
