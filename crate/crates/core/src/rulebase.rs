//! The rule population, match sets, covering and niche-size replacement.

use std::fmt;

use rand::Rng;

use crate::error::{Error, Result};
use crate::learning::roulette;
use crate::neural_rule::NetworkGenome;

/// Draws made by [`Rulebase::cover`] before it falls back to a forced matcher.
pub const COVER_MAX_DRAWS: usize = 10_000;

/// Match activations strictly above this join the match set.
pub const MATCH_THRESHOLD: f64 = 0.5;

/// Stable rule identifier. Ids are never reused within a rulebase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RuleId(pub u64);

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub id: RuleId,
    pub genome: NetworkGenome,
    /// Matching-error estimate ε.
    pub error: f64,
    /// Niche-size estimate σ.
    pub niche_size: f64,
    /// Cycle of the last EA this rule took part in.
    pub ga_timestamp: u64,
}

/// Initial values for freshly created rules.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RuleInit {
    pub error: f64,
    pub niche_size: f64,
    /// Half-range of the uniform weight initialisation.
    pub w0: f64,
}

impl RuleInit {
    pub fn new(error: f64, niche_size: f64, w0: f64) -> Self {
        Self {
            error,
            niche_size,
            w0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rulebase {
    capacity: usize,
    input_width: usize,
    hidden_width: usize,
    rules: Vec<Rule>,
    next_id: u64,
}

/// The rules matching one input, with each member's hidden activations.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchSet {
    input: Vec<f64>,
    members: Vec<usize>,
    hidden_width: usize,
    hidden: Vec<f64>,
}

impl MatchSet {
    /// Rulebase indices of the members, ascending.
    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn input(&self) -> &[f64] {
        &self.input
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Hidden activations of the `slot`-th member.
    pub fn member_hidden(&self, slot: usize) -> &[f64] {
        let h = self.hidden_width;
        &self.hidden[slot * h..(slot + 1) * h]
    }
}

/// Result of a covering event.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CoverOutcome {
    pub id: RuleId,
    pub removed: RuleId,
    /// Random genomes drawn, including the successful one.
    pub draws: usize,
    /// Whether the forced-match fallback was used.
    pub fallback: bool,
}

impl Rulebase {
    /// `capacity` random rules, each starting from `init` with time-stamp 0.
    pub fn init<R: Rng + ?Sized>(
        capacity: usize,
        input_width: usize,
        hidden_width: usize,
        init: &RuleInit,
        rng: &mut R,
    ) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::Config("population size must be at least 1".into()));
        }
        let rules = (0..capacity as u64)
            .map(|id| {
                Ok(Rule {
                    id: RuleId(id),
                    genome: NetworkGenome::random(input_width, hidden_width, init.w0, rng)?,
                    error: init.error,
                    niche_size: init.niche_size,
                    ga_timestamp: 0,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            capacity,
            input_width,
            hidden_width,
            rules,
            next_id: capacity as u64,
        })
    }

    /// Assembles a full rulebase from existing rules.
    pub fn from_rules(
        capacity: usize,
        input_width: usize,
        hidden_width: usize,
        rules: Vec<Rule>,
    ) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::Config("population size must be at least 1".into()));
        }
        if rules.len() != capacity {
            return Err(Error::InvalidInput(format!(
                "rulebase holds {} rules but capacity is {capacity}",
                rules.len()
            )));
        }
        for r in &rules {
            if r.genome.input_width() != input_width || r.genome.hidden_width() != hidden_width {
                return Err(Error::InvalidInput(format!(
                    "rule {} has architecture {}x{}, expected {input_width}x{hidden_width}",
                    r.id,
                    r.genome.input_width(),
                    r.genome.hidden_width()
                )));
            }
            let fields_ok = r.error >= 0.0
                && r.error.is_finite()
                && r.niche_size >= 0.0
                && r.niche_size.is_finite();
            if !fields_ok {
                return Err(Error::InvalidInput(format!(
                    "rule {} has invalid estimates",
                    r.id
                )));
            }
        }
        let mut ids: Vec<u64> = rules.iter().map(|r| r.id.0).collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidInput("duplicate rule ids".into()));
        }
        let next_id = ids.last().map_or(0, |m| m + 1);
        Ok(Self {
            capacity,
            input_width,
            hidden_width,
            rules,
            next_id,
        })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn input_width(&self) -> usize {
        self.input_width
    }

    pub fn hidden_width(&self) -> usize {
        self.hidden_width
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub(crate) fn rules_mut(&mut self) -> &mut [Rule] {
        &mut self.rules
    }

    pub fn get(&self, id: RuleId) -> Option<&Rule> {
        self.rules.iter().find(|r| r.id == id)
    }

    pub(crate) fn allocate_id(&mut self) -> RuleId {
        let id = RuleId(self.next_id);
        self.next_id += 1;
        id
    }

    pub fn mean_error(&self) -> f64 {
        self.rules.iter().map(|r| r.error).sum::<f64>() / self.rules.len() as f64
    }

    /// All rules whose match activation on `x` exceeds one half.
    pub fn build_match_set(&self, x: &[f64]) -> Result<MatchSet> {
        if x.len() != self.input_width {
            return Err(Error::DimensionMismatch {
                expected: self.input_width,
                found: x.len(),
            });
        }
        let h = self.hidden_width;
        let mut scratch = vec![0.0; h];
        let mut members = Vec::new();
        let mut hidden = Vec::new();
        for (i, rule) in self.rules.iter().enumerate() {
            rule.genome.hidden_into(x, &mut scratch);
            if rule.genome.match_from_hidden(&scratch) > MATCH_THRESHOLD {
                members.push(i);
                hidden.extend_from_slice(&scratch);
            }
        }
        Ok(MatchSet {
            input: x.to_vec(),
            members,
            hidden_width: h,
            hidden,
        })
    }

    /// Removes one rule chosen by roulette over niche-size estimates and puts
    /// `newcomer` in its place. Returns the removed rule.
    pub fn replace_by_niche<R: Rng + ?Sized>(
        &mut self,
        newcomer: Rule,
        rng: &mut R,
    ) -> Result<Rule> {
        let weights: Vec<f64> = self.rules.iter().map(|r| r.niche_size).collect();
        let victim = roulette(&weights, rng)?;
        Ok(std::mem::replace(&mut self.rules[victim], newcomer))
    }

    /// Draws random networks until one matches `x` and inserts it by niche
    /// replacement. After [`COVER_MAX_DRAWS`] misses a fresh network is forced
    /// to match instead.
    pub fn cover<R: Rng + ?Sized>(
        &mut self,
        x: &[f64],
        t: u64,
        init: &RuleInit,
        rng: &mut R,
    ) -> Result<CoverOutcome> {
        self.cover_with_limit(x, t, init, COVER_MAX_DRAWS, rng)
    }

    pub(crate) fn cover_with_limit<R: Rng + ?Sized>(
        &mut self,
        x: &[f64],
        t: u64,
        init: &RuleInit,
        max_draws: usize,
        rng: &mut R,
    ) -> Result<CoverOutcome> {
        if x.len() != self.input_width {
            return Err(Error::DimensionMismatch {
                expected: self.input_width,
                found: x.len(),
            });
        }
        let mut draws = 0;
        let mut found = None;
        while draws < max_draws {
            let g = NetworkGenome::random(self.input_width, self.hidden_width, init.w0, rng)?;
            draws += 1;
            if g.match_activation(x)? > MATCH_THRESHOLD {
                found = Some(g);
                break;
            }
        }
        let fallback = found.is_none();
        let genome = match found {
            Some(g) => g,
            None => {
                let mut g =
                    NetworkGenome::random(self.input_width, self.hidden_width, init.w0, rng)?;
                g.force_match();
                g
            }
        };
        let id = self.allocate_id();
        let removed = self.replace_by_niche(
            Rule {
                id,
                genome,
                error: init.error,
                niche_size: init.niche_size,
                ga_timestamp: t,
            },
            rng,
        )?;
        Ok(CoverOutcome {
            id,
            removed: removed.id,
            draws,
            fallback,
        })
    }
}
