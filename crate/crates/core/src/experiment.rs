//! Training loop, metrics, multi-run averaging and model files.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::data::{sample_pattern, DatasetSpec, Pattern};
use crate::error::{Error, Result};
use crate::learning::{
    ea_should_fire, run_ea, update_match_set, EaOutcome, LearningParams, OffspringInit,
};
use crate::neural_rule::{param_count, NetworkGenome};
use crate::rulebase::{CoverOutcome, Rule, RuleId, RuleInit, Rulebase};

/// Full parameterisation of a training experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    /// Rulebase capacity N.
    pub pop_size: usize,
    /// Pattern length l.
    pub length: usize,
    /// Hidden nodes H.
    pub hidden: usize,
    pub w0: f64,
    pub eps0: f64,
    pub sigma0: f64,
    pub beta: f64,
    pub v: f64,
    pub theta_ga: f64,
    pub mu: f64,
    pub m0: f64,
    pub noise_rate: f64,
    pub cycles: u64,
    pub sample_interval: u64,
    pub runs: usize,
    pub master_seed: u64,
    pub offspring_init: OffspringInit,
}

impl TrainConfig {
    /// The published parameter set for patterns of length `length`, with
    /// ε0 = l/2 and σ0 = N/2.
    pub fn standard(length: usize) -> Self {
        let pop_size = 1000;
        let learning = LearningParams::default();
        Self {
            pop_size,
            length,
            hidden: 5,
            w0: 1.0,
            eps0: length as f64 / 2.0,
            sigma0: pop_size as f64 / 2.0,
            beta: learning.beta,
            v: learning.v,
            theta_ga: learning.theta_ga,
            mu: learning.mu,
            m0: learning.m0,
            noise_rate: 0.1,
            cycles: 50_000,
            sample_interval: 500,
            runs: 10,
            master_seed: 0,
            offspring_init: OffspringInit::Inherit,
        }
    }

    pub fn learning_params(&self) -> LearningParams {
        LearningParams {
            beta: self.beta,
            v: self.v,
            theta_ga: self.theta_ga,
            mu: self.mu,
            m0: self.m0,
        }
    }

    pub fn rule_init(&self) -> RuleInit {
        RuleInit::new(self.eps0, self.sigma0, self.w0)
    }

    pub fn dataset_spec(&self) -> DatasetSpec {
        DatasetSpec {
            length: self.length,
            noise_rate: self.noise_rate,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: &str| Err(Error::Config(msg.to_string()));
        if self.pop_size == 0 {
            return fail("pop-size must be at least 1");
        }
        if self.length == 0 {
            return fail("length must be at least 1");
        }
        if self.hidden == 0 {
            return fail("hidden must be at least 1");
        }
        if !(self.w0 > 0.0 && self.w0.is_finite()) {
            return fail("w0 must be positive");
        }
        if !(self.eps0 >= 0.0 && self.eps0.is_finite()) {
            return fail("eps0 must be non-negative");
        }
        if !(self.sigma0 >= 0.0 && self.sigma0.is_finite()) {
            return fail("sigma0 must be non-negative");
        }
        self.learning_params().validate()?;
        self.dataset_spec().validate()?;
        if self.sample_interval == 0 {
            return fail("sample-interval must be at least 1");
        }
        if self.runs == 0 {
            return fail("runs must be at least 1");
        }
        Ok(())
    }

    /// Seed of run `index` within an experiment.
    pub fn run_seed(&self, index: usize) -> u64 {
        self.master_seed.wrapping_add(index as u64)
    }
}

/// Where training inputs come from.
#[derive(Debug, Clone, PartialEq)]
pub enum InputSource {
    /// Fresh noisy pattern per cycle.
    Generated(DatasetSpec),
    /// Uniform draws, with replacement, from a fixed set.
    Patterns(Vec<Pattern>),
}

impl InputSource {
    pub fn generated(cfg: &TrainConfig) -> Self {
        InputSource::Generated(cfg.dataset_spec())
    }

    fn check(&self, length: usize) -> Result<()> {
        match self {
            InputSource::Generated(spec) => {
                spec.validate()?;
                if spec.length != length {
                    return Err(Error::DimensionMismatch {
                        expected: length,
                        found: spec.length,
                    });
                }
            }
            InputSource::Patterns(ps) => {
                if ps.is_empty() {
                    return Err(Error::Config("dataset is empty".into()));
                }
                if let Some(p) = ps.iter().find(|p| p.len() != length) {
                    return Err(Error::DimensionMismatch {
                        expected: length,
                        found: p.len(),
                    });
                }
            }
        }
        Ok(())
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Pattern {
        match self {
            InputSource::Generated(spec) => sample_pattern(spec, rng),
            InputSource::Patterns(ps) => ps[rng.gen_range(0..ps.len())].clone(),
        }
    }
}

/// One sampled point of a training curve. Counters are cumulative; they are
/// fractional only in averaged timelines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsRow {
    pub cycle: u64,
    /// Mean ε over the whole rulebase.
    pub mean_rule_error: f64,
    /// Mean per-cycle reconstruction-error signal over the last window.
    pub window_match_error: f64,
    /// `window_match_error / √l`.
    pub window_match_error_per_bit: f64,
    /// Mean match-set size over the last window.
    pub mean_match_size: f64,
    pub covers_cum: f64,
    pub ea_events_cum: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsTimeline {
    pub config: TrainConfig,
    pub rows: Vec<MetricsRow>,
}

/// What happened during one system cycle.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleReport {
    pub cycle: u64,
    pub input: Pattern,
    pub cover: Option<CoverOutcome>,
    /// Match-set size after any covering.
    pub match_set_size: usize,
    /// Mean reconstruction-error signal of the match set.
    pub mean_signal: f64,
    pub ea: Option<EaOutcome>,
}

/// Step-wise driver for one training run.
pub struct Trainer<'a> {
    cfg: &'a TrainConfig,
    source: &'a InputSource,
    learning: LearningParams,
    init: RuleInit,
    rulebase: Rulebase,
    rng: ChaCha8Rng,
    cycle: u64,
    covers: u64,
    ea_events: u64,
    window_signal: f64,
    window_size: f64,
    window_len: u64,
}

impl<'a> Trainer<'a> {
    pub fn new(cfg: &'a TrainConfig, source: &'a InputSource, seed: u64) -> Result<Self> {
        cfg.validate()?;
        source.check(cfg.length)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let init = cfg.rule_init();
        let rulebase = Rulebase::init(cfg.pop_size, cfg.length, cfg.hidden, &init, &mut rng)?;
        Ok(Self {
            cfg,
            source,
            learning: cfg.learning_params(),
            init,
            rulebase,
            rng,
            cycle: 0,
            covers: 0,
            ea_events: 0,
            window_signal: 0.0,
            window_size: 0.0,
            window_len: 0,
        })
    }

    pub fn rulebase(&self) -> &Rulebase {
        &self.rulebase
    }

    pub fn into_rulebase(self) -> Rulebase {
        self.rulebase
    }

    pub fn cycle(&self) -> u64 {
        self.cycle
    }

    /// Runs one cycle: draw, match, cover if needed, update, maybe EA.
    pub fn step(&mut self) -> Result<CycleReport> {
        self.cycle += 1;
        let t = self.cycle;
        let x = self.source.draw(&mut self.rng);

        let mut ms = self.rulebase.build_match_set(&x)?;
        let mut cover = None;
        if ms.is_empty() {
            cover = Some(self.rulebase.cover(&x, t, &self.init, &mut self.rng)?);
            self.covers += 1;
            ms = self.rulebase.build_match_set(&x)?;
        }

        let stats = update_match_set(&mut self.rulebase, &ms, self.learning.beta)?;

        let mut ea = None;
        if ea_should_fire(&self.rulebase, &ms, t, self.learning.theta_ga) {
            ea = Some(run_ea(
                &mut self.rulebase,
                &ms,
                t,
                &self.learning,
                self.cfg.offspring_init,
                &self.init,
                &mut self.rng,
            )?);
            self.ea_events += 1;
        }

        self.window_signal += stats.mean_signal;
        self.window_size += stats.members as f64;
        self.window_len += 1;

        Ok(CycleReport {
            cycle: t,
            input: x,
            cover,
            match_set_size: stats.members,
            mean_signal: stats.mean_signal,
            ea,
        })
    }

    /// Snapshot of the current state; resets the moving window. Before any
    /// cycle has run the window reports the initial error estimate.
    pub fn snapshot(&mut self) -> MetricsRow {
        let mean_rule_error = self.rulebase.mean_error();
        let (window_match_error, mean_match_size) = if self.window_len == 0 {
            (mean_rule_error, 0.0)
        } else {
            let n = self.window_len as f64;
            (self.window_signal / n, self.window_size / n)
        };
        self.window_signal = 0.0;
        self.window_size = 0.0;
        self.window_len = 0;
        MetricsRow {
            cycle: self.cycle,
            mean_rule_error,
            window_match_error,
            window_match_error_per_bit: window_match_error / (self.cfg.length as f64).sqrt(),
            mean_match_size,
            covers_cum: self.covers as f64,
            ea_events_cum: self.ea_events as f64,
        }
    }
}

/// One run on freshly generated noisy patterns.
pub fn train(cfg: &TrainConfig, run_seed: u64) -> Result<(MetricsTimeline, Rulebase)> {
    train_with_source(cfg, &InputSource::generated(cfg), run_seed)
}

pub fn train_with_source(
    cfg: &TrainConfig,
    source: &InputSource,
    run_seed: u64,
) -> Result<(MetricsTimeline, Rulebase)> {
    let mut trainer = Trainer::new(cfg, source, run_seed)?;
    let mut rows = vec![trainer.snapshot()];
    for _ in 0..cfg.cycles {
        trainer.step()?;
        if trainer.cycle() % cfg.sample_interval == 0 {
            rows.push(trainer.snapshot());
        }
    }
    let timeline = MetricsTimeline {
        config: cfg.clone(),
        rows,
    };
    Ok((timeline, trainer.into_rulebase()))
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub seed: u64,
    pub timeline: MetricsTimeline,
    pub rulebase: Rulebase,
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub averaged: MetricsTimeline,
    pub runs: Vec<RunOutput>,
}

/// `cfg.runs` independent runs, in parallel, plus their element-wise mean.
pub fn run_experiment(cfg: &TrainConfig, source: &InputSource) -> Result<ExperimentResult> {
    cfg.validate()?;
    let seeds: Vec<u64> = (0..cfg.runs).map(|i| cfg.run_seed(i)).collect();
    run_with_seeds(cfg, source, &seeds)
}

/// Runs one training per seed and averages them.
pub fn run_with_seeds(
    cfg: &TrainConfig,
    source: &InputSource,
    seeds: &[u64],
) -> Result<ExperimentResult> {
    let runs = seeds
        .par_iter()
        .map(|&seed| {
            train_with_source(cfg, source, seed).map(|(timeline, rulebase)| RunOutput {
                seed,
                timeline,
                rulebase,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let timelines: Vec<&MetricsTimeline> = runs.iter().map(|r| &r.timeline).collect();
    let averaged = average_timelines(&timelines)?;
    Ok(ExperimentResult { averaged, runs })
}

/// Element-wise mean of timelines sampled at the same cycles.
pub fn average_timelines(timelines: &[&MetricsTimeline]) -> Result<MetricsTimeline> {
    let first = timelines
        .first()
        .ok_or_else(|| Error::InvalidInput("no timelines to average".into()))?;
    let len = first.rows.len();
    if timelines.iter().any(|t| t.rows.len() != len) {
        return Err(Error::InvalidInput("timelines differ in length".into()));
    }
    let n = timelines.len() as f64;
    let rows = (0..len)
        .map(|i| {
            let cycle = first.rows[i].cycle;
            let mean = |f: fn(&MetricsRow) -> f64| {
                timelines.iter().map(|t| f(&t.rows[i])).sum::<f64>() / n
            };
            if timelines.iter().any(|t| t.rows[i].cycle != cycle) {
                return Err(Error::InvalidInput(format!(
                    "timelines are not aligned at row {i}"
                )));
            }
            Ok(MetricsRow {
                cycle,
                mean_rule_error: mean(|r| r.mean_rule_error),
                window_match_error: mean(|r| r.window_match_error),
                window_match_error_per_bit: mean(|r| r.window_match_error_per_bit),
                mean_match_size: mean(|r| r.mean_match_size),
                covers_cum: mean(|r| r.covers_cum),
                ea_events_cum: mean(|r| r.ea_events_cum),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MetricsTimeline {
        config: first.config.clone(),
        rows,
    })
}

pub const METRICS_HEADER: &str = "run,cycle,mean_rule_error,window_match_error,window_match_error_per_bit,mean_match_size,covers_cum,ea_events_cum";

/// Writes the header and one line per row, tagging each with `run`
/// (a run index, or `avg`).
pub fn write_metrics_csv<W: Write>(
    mut w: W,
    run: &str,
    timeline: &MetricsTimeline,
) -> io::Result<()> {
    writeln!(w, "{METRICS_HEADER}")?;
    for r in &timeline.rows {
        writeln!(
            w,
            "{run},{},{},{},{},{},{},{}",
            r.cycle,
            r.mean_rule_error,
            r.window_match_error,
            r.window_match_error_per_bit,
            r.mean_match_size,
            r.covers_cum,
            r.ea_events_cum
        )?;
    }
    Ok(())
}

pub fn save_metrics_csv(
    path: impl AsRef<Path>,
    run: &str,
    timeline: &MetricsTimeline,
) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    write_metrics_csv(&mut w, run, timeline)?;
    w.flush()?;
    Ok(())
}

pub const MODEL_MAGIC: &str = "ycsae";
pub const MODEL_VERSION: u32 = 1;

/// Shape recorded in a model file header.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelHeader {
    pub input_width: usize,
    pub hidden_width: usize,
    pub capacity: usize,
}

fn fmt_real(x: f64) -> String {
    // 17 significant digits round-trip every f64.
    format!("{x:.16e}")
}

/// Model text: a header `ycsae 1 <l> <H> <N>`, then one line per rule with
/// id, ε, σ, time-stamp and every genome parameter, space-separated.
pub fn write_model<W: Write>(mut w: W, rb: &Rulebase) -> io::Result<()> {
    writeln!(
        w,
        "{MODEL_MAGIC} {MODEL_VERSION} {} {} {}",
        rb.input_width(),
        rb.hidden_width(),
        rb.capacity()
    )?;
    for r in rb.rules() {
        write!(
            w,
            "{} {} {} {}",
            r.id,
            fmt_real(r.error),
            fmt_real(r.niche_size),
            r.ga_timestamp
        )?;
        for p in r.genome.params() {
            write!(w, " {}", fmt_real(*p))?;
        }
        writeln!(w)?;
    }
    Ok(())
}

pub fn save_model(rb: &Rulebase, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    write_model(&mut w, rb)?;
    w.flush()?;
    Ok(())
}

fn parse_field<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T> {
    let tok = tok.ok_or_else(|| Error::format(line, format!("missing {what}")))?;
    tok.parse()
        .map_err(|_| Error::format(line, format!("invalid {what} {tok:?}")))
}

pub fn parse_model(text: &str) -> Result<(Rulebase, ModelHeader)> {
    let mut lines = text.lines();
    let head = lines
        .next()
        .ok_or_else(|| Error::format(1, "missing header"))?;
    let mut tok = head.split_whitespace();
    if tok.next() != Some(MODEL_MAGIC) {
        return Err(Error::format(1, "not a ycsae model file"));
    }
    let version = tok
        .next()
        .ok_or_else(|| Error::format(1, "missing version"))?;
    if version != MODEL_VERSION.to_string() {
        return Err(Error::UnsupportedVersion {
            found: version.to_string(),
            expected: MODEL_VERSION,
        });
    }
    let header = ModelHeader {
        input_width: parse_field(tok.next(), 1, "input width")?,
        hidden_width: parse_field(tok.next(), 1, "hidden width")?,
        capacity: parse_field(tok.next(), 1, "rule count")?,
    };
    if tok.next().is_some() {
        return Err(Error::format(1, "trailing fields in header"));
    }
    if header.input_width == 0 || header.hidden_width == 0 || header.capacity == 0 {
        return Err(Error::format(1, "header dimensions must be at least 1"));
    }
    let n_params = param_count(header.input_width, header.hidden_width);

    let mut rules = Vec::with_capacity(header.capacity);
    for (i, text) in lines.enumerate() {
        let line = i + 2;
        if rules.len() == header.capacity {
            if text.trim().is_empty() {
                continue;
            }
            return Err(Error::format(line, "more rules than the header declares"));
        }
        let mut tok = text.split_whitespace();
        let id = RuleId(parse_field(tok.next(), line, "rule id")?);
        let error: f64 = parse_field(tok.next(), line, "error")?;
        let niche_size: f64 = parse_field(tok.next(), line, "niche size")?;
        let ga_timestamp: u64 = parse_field(tok.next(), line, "time-stamp")?;
        let params = tok
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|_| Error::format(line, format!("invalid parameter {t:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        if params.len() != n_params {
            return Err(Error::format(
                line,
                format!("expected {n_params} parameters, found {}", params.len()),
            ));
        }
        let genome = NetworkGenome::from_params(header.input_width, header.hidden_width, params)
            .map_err(|e| Error::format(line, e.to_string()))?;
        if !(error >= 0.0 && error.is_finite() && niche_size >= 0.0 && niche_size.is_finite()) {
            return Err(Error::format(
                line,
                "estimates must be finite and non-negative",
            ));
        }
        rules.push(Rule {
            id,
            genome,
            error,
            niche_size,
            ga_timestamp,
        });
    }
    if rules.len() < header.capacity {
        return Err(Error::format(
            rules.len() + 2,
            format!(
                "truncated: header declares {} rules, found {}",
                header.capacity,
                rules.len()
            ),
        ));
    }
    let rb = Rulebase::from_rules(
        header.capacity,
        header.input_width,
        header.hidden_width,
        rules,
    )
    .map_err(|e| Error::format(1, e.to_string()))?;
    Ok((rb, header))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<(Rulebase, ModelHeader)> {
    parse_model(&fs::read_to_string(path)?)
}

/// The lowest-error matching rule's hidden code for one input.
#[derive(Debug, Clone, PartialEq)]
pub struct Encoding {
    pub rule: RuleId,
    pub hidden: Vec<f64>,
}

/// Among rules matching `x`, the one with minimal ε (ties to the lowest id)
/// and its encoding. `None` when nothing matches.
pub fn best_encode(rb: &Rulebase, x: &[f64]) -> Result<Option<Encoding>> {
    let ms = rb.build_match_set(x)?;
    let best = ms.members().iter().enumerate().min_by(|(_, &a), (_, &b)| {
        let (ra, rb_) = (&rb.rules()[a], &rb.rules()[b]);
        ra.error.total_cmp(&rb_.error).then(ra.id.cmp(&rb_.id))
    });
    Ok(best.map(|(slot, &idx)| Encoding {
        rule: rb.rules()[idx].id,
        hidden: ms.member_hidden(slot).to_vec(),
    }))
}
