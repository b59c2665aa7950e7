//! Parameter updates, fitness, and the niche evolutionary algorithm.

use rand::Rng;

use crate::error::{Error, Result};
use crate::rulebase::{MatchSet, Rule, RuleInit, Rulebase};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LearningParams {
    /// Widrow-Hoff learning rate for both estimates.
    pub beta: f64,
    /// Fitness exponent.
    pub v: f64,
    /// EA fires when the niche's mean time since its last EA exceeds this.
    pub theta_ga: f64,
    /// Per-gene mutation probability.
    pub mu: f64,
    /// Upper bound on a mutation step.
    pub m0: f64,
}

impl Default for LearningParams {
    fn default() -> Self {
        Self {
            beta: 0.2,
            v: 50.0,
            theta_ga: 25.0,
            mu: 0.05,
            m0: 0.1,
        }
    }
}

impl LearningParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            return Err(Error::Config("beta must be in (0,1]".into()));
        }
        if !(self.v > 0.0 && self.v.is_finite()) {
            return Err(Error::Config("v must be positive".into()));
        }
        if !(self.theta_ga >= 0.0 && self.theta_ga.is_finite()) {
            return Err(Error::Config("theta-ga must be non-negative".into()));
        }
        if !(0.0..=1.0).contains(&self.mu) {
            return Err(Error::Config("mu must be in [0,1]".into()));
        }
        if !(self.m0 > 0.0 && self.m0.is_finite()) {
            return Err(Error::Config("m0 must be positive".into()));
        }
        Ok(())
    }
}

/// How offspring estimates are initialised.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OffspringInit {
    /// Copy ε and σ from the parent.
    #[default]
    Inherit,
    /// Start from the configured ε0 and σ0.
    Reset,
}

/// Root of the summed squared difference between input and reconstruction.
pub fn reconstruction_error(x: &[f64], reconstruction: &[f64]) -> Result<f64> {
    if x.len() != reconstruction.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            found: reconstruction.len(),
        });
    }
    Ok(x.iter()
        .zip(reconstruction)
        .map(|(i, o)| (i - o) * (i - o))
        .sum::<f64>()
        .sqrt())
}

#[inline]
pub fn update_error(error: f64, signal: f64, beta: f64) -> f64 {
    error + beta * (signal - error)
}

#[inline]
pub fn update_niche(niche_size: f64, match_set_size: usize, beta: f64) -> f64 {
    niche_size + beta * (match_set_size as f64 - niche_size)
}

/// `1 / (ε^v + 1)`, or 0 when `ε^v` overflows.
pub fn fitness(error: f64, v: f64) -> f64 {
    let p = error.powf(v);
    if p.is_finite() {
        1.0 / (p + 1.0)
    } else {
        0.0
    }
}

/// Draws an index with probability proportional to its weight. A zero total
/// falls back to a uniform draw.
pub fn roulette<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> Result<usize> {
    if weights.is_empty() {
        return Err(Error::InvalidInput("roulette over no weights".into()));
    }
    let mut total = 0.0;
    for (i, &w) in weights.iter().enumerate() {
        if !(w >= 0.0 && w.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "roulette weight {i} is {w}; weights must be finite and non-negative"
            )));
        }
        total += w;
    }
    if total <= 0.0 || !total.is_finite() {
        return Ok(rng.gen_range(0..weights.len()));
    }
    let mut target = rng.gen::<f64>() * total;
    let mut last_positive = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            if target < w {
                return Ok(i);
            }
            target -= w;
            last_positive = i;
        }
    }
    // Rounding can leave a sliver past the final bucket.
    Ok(last_positive)
}

/// Summary of one set of match-set updates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpdateStats {
    pub members: usize,
    /// Mean reconstruction-error signal across members.
    pub mean_signal: f64,
}

/// Applies the error and niche-size updates to every member of `ms`.
pub fn update_match_set(rb: &mut Rulebase, ms: &MatchSet, beta: f64) -> Result<UpdateStats> {
    let size = ms.len();
    let x = ms.input();
    let mut recon = Vec::with_capacity(x.len());
    let mut total = 0.0;
    for (slot, &idx) in ms.members().iter().enumerate() {
        let rule = &mut rb.rules_mut()[idx];
        rule.genome
            .reconstruction_from_hidden(ms.member_hidden(slot), &mut recon);
        let signal = reconstruction_error(x, &recon)?;
        rule.error = update_error(rule.error, signal, beta);
        rule.niche_size = update_niche(rule.niche_size, size, beta);
        total += signal;
    }
    Ok(UpdateStats {
        members: size,
        mean_signal: if size == 0 { 0.0 } else { total / size as f64 },
    })
}

/// True when the mean time since the members' last EA exceeds `theta_ga`.
pub fn ea_should_fire(rb: &Rulebase, ms: &MatchSet, t: u64, theta_ga: f64) -> bool {
    if ms.is_empty() {
        return false;
    }
    let mean_stamp = ms
        .members()
        .iter()
        .map(|&i| rb.rules()[i].ga_timestamp as f64)
        .sum::<f64>()
        / ms.len() as f64;
    t as f64 - mean_stamp > theta_ga
}

/// What one EA invocation did.
#[derive(Debug, Clone, PartialEq)]
pub struct EaOutcome {
    /// Rulebase indices of the two selected parents (at selection time).
    pub parents: [usize; 2],
    /// Ids of the inserted offspring.
    pub offspring: [crate::rulebase::RuleId; 2],
    /// Ids of the rules removed to make room.
    pub removed: [crate::rulebase::RuleId; 2],
}

/// Runs the niche EA on `ms`: stamps members with `t`, picks two parents by
/// fitness roulette, mutates clones of them and inserts both via niche-size
/// replacement.
pub fn run_ea<R: Rng + ?Sized>(
    rb: &mut Rulebase,
    ms: &MatchSet,
    t: u64,
    params: &LearningParams,
    offspring_init: OffspringInit,
    init: &RuleInit,
    rng: &mut R,
) -> Result<EaOutcome> {
    if ms.is_empty() {
        return Err(Error::InvalidInput("EA on an empty match set".into()));
    }
    for &i in ms.members() {
        rb.rules_mut()[i].ga_timestamp = t;
    }
    let weights: Vec<f64> = ms
        .members()
        .iter()
        .map(|&i| fitness(rb.rules()[i].error, params.v))
        .collect();
    let parents = [
        ms.members()[roulette(&weights, rng)?],
        ms.members()[roulette(&weights, rng)?],
    ];

    let mut children = Vec::with_capacity(2);
    for &p in &parents {
        let parent = &rb.rules()[p];
        let genome = parent.genome.mutate(params.mu, params.m0, rng)?;
        let (error, niche_size) = match offspring_init {
            OffspringInit::Inherit => (parent.error, parent.niche_size),
            OffspringInit::Reset => (init.error, init.niche_size),
        };
        children.push(Rule {
            id: rb.allocate_id(),
            genome,
            error,
            niche_size,
            ga_timestamp: t,
        });
    }

    let mut offspring = [crate::rulebase::RuleId(0); 2];
    let mut removed = [crate::rulebase::RuleId(0); 2];
    for (k, child) in children.into_iter().enumerate() {
        offspring[k] = child.id;
        removed[k] = rb.replace_by_niche(child, rng)?.id;
    }
    Ok(EaOutcome {
        parents,
        offspring,
        removed,
    })
}
