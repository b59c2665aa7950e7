use std::fmt;
use std::fs;
use std::io::{self, BufWriter, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use ycsae::data::{parse_pattern, sample_pattern, write_dataset, DatasetSpec};
use ycsae::experiment::save_metrics_csv;
use ycsae::{
    best_encode, load_dataset, load_model, run_experiment, save_model, InputSource, OffspringInit,
    TrainConfig,
};

use crate::{EncodeArgs, GenDataArgs, InspectArgs, OffspringInitArg, TrainArgs};

pub const EXIT_USAGE: u8 = 1;
pub const EXIT_IO: u8 = 2;

#[derive(Debug)]
pub enum CliError {
    /// Invalid flags or values.
    Usage(String),
    /// Unreadable/unwritable files or malformed file contents.
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Io(m) => f.write_str(m),
        }
    }
}

impl From<ycsae::Error> for CliError {
    fn from(e: ycsae::Error) -> Self {
        use ycsae::Error::*;
        match e {
            Io(_) | Format { .. } | UnsupportedVersion { .. } => CliError::Io(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn with_path<T>(path: &std::path::Path, r: ycsae::Result<T>) -> Result<T> {
    r.map_err(|e| match CliError::from(e) {
        CliError::Io(m) => CliError::Io(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn train(args: TrainArgs) -> Result<()> {
    let dataset = match &args.dataset {
        Some(path) => Some(with_path(path, load_dataset(path))?),
        None => None,
    };
    let length = match (&dataset, args.length) {
        (Some(d), Some(l)) if d[0].len() != l => {
            return Err(CliError::Usage(format!(
                "--length {l} does not match the dataset pattern length {}",
                d[0].len()
            )))
        }
        (Some(d), _) => d[0].len(),
        (None, l) => l.unwrap_or(11),
    };

    let cfg = TrainConfig {
        pop_size: args.pop_size,
        length,
        hidden: args.hidden,
        w0: args.w0,
        eps0: args.eps0.unwrap_or(length as f64 / 2.0),
        sigma0: args.sigma0.unwrap_or(args.pop_size as f64 / 2.0),
        beta: args.beta,
        v: args.v,
        theta_ga: args.theta_ga,
        mu: args.mu,
        m0: args.m0,
        noise_rate: args.noise.unwrap_or(0.1),
        cycles: args.cycles,
        sample_interval: args.sample_interval,
        runs: args.runs,
        master_seed: args.seed,
        offspring_init: match args.offspring_init {
            OffspringInitArg::Inherit => OffspringInit::Inherit,
            OffspringInitArg::Reset => OffspringInit::Reset,
        },
    };
    cfg.validate()?;

    let source = match dataset {
        Some(d) => InputSource::Patterns(d),
        None => InputSource::generated(&cfg),
    };
    fs::create_dir_all(&args.out_dir)
        .map_err(|e| CliError::Io(format!("{}: {e}", args.out_dir.display())))?;

    let result = run_experiment(&cfg, &source)?;
    for (i, run) in result.runs.iter().enumerate() {
        let csv = args.out_dir.join(format!("run_{i}.csv"));
        with_path(&csv, save_metrics_csv(&csv, &i.to_string(), &run.timeline))?;
        let model = args.out_dir.join(format!("model_{i}.txt"));
        with_path(&model, save_model(&run.rulebase, &model))?;
        let last = run
            .timeline
            .rows
            .last()
            .expect("timeline has an initial row");
        println!(
            "run {i} (seed {}): cycle {} window_match_error_per_bit {:.6}",
            run.seed, last.cycle, last.window_match_error_per_bit
        );
    }
    let avg = args.out_dir.join("avg.csv");
    with_path(&avg, save_metrics_csv(&avg, "avg", &result.averaged))?;
    Ok(())
}

pub fn gen_data(args: GenDataArgs) -> Result<()> {
    let spec = DatasetSpec::new(args.length, args.noise)?;
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let patterns: Vec<_> = (0..args.count)
        .map(|_| sample_pattern(&spec, &mut rng))
        .collect();
    with_path(&args.out, write_dataset(&args.out, &patterns))
}

pub fn encode(args: EncodeArgs) -> Result<()> {
    let (rb, header) = with_path(&args.model, load_model(&args.model))?;
    let inputs = match (&args.input, &args.dataset) {
        (Some(text), _) => vec![parse_pattern(text, 1).map_err(|_| {
            CliError::Usage(format!(
                "--input must be a string of 0s and 1s, got {text:?}"
            ))
        })?],
        (None, Some(path)) => with_path(path, load_dataset(path))?,
        (None, None) => {
            return Err(CliError::Usage(
                "one of --input or --dataset is required".into(),
            ))
        }
    };
    if let Some(bad) = inputs.iter().find(|x| x.len() != header.input_width) {
        return Err(CliError::Usage(format!(
            "input length {} does not match the model's expected length {}",
            bad.len(),
            header.input_width
        )));
    }

    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    let hidden_cols: Vec<String> = (1..=header.hidden_width).map(|j| format!("h{j}")).collect();
    writeln!(out, "input,rule_id,{}", hidden_cols.join(","))?;
    for x in &inputs {
        let bits = ycsae::data::format_pattern(x);
        match best_encode(&rb, x)? {
            Some(enc) => {
                let values: Vec<String> = enc.hidden.iter().map(f64::to_string).collect();
                writeln!(out, "{bits},{},{}", enc.rule, values.join(","))?;
            }
            None => {
                writeln!(out, "{bits},none,{}", ",".repeat(header.hidden_width - 1))?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

pub fn inspect(args: InspectArgs) -> Result<()> {
    let (rb, header) = with_path(&args.model, load_model(&args.model))?;
    let rules = rb.rules();
    let n = rules.len() as f64;
    let min_error = rules.iter().map(|r| r.error).fold(f64::INFINITY, f64::min);
    let mean_niche = rules.iter().map(|r| r.niche_size).sum::<f64>() / n;
    let last_ea = rules.iter().map(|r| r.ga_timestamp).max().unwrap_or(0);
    println!("input_width {}", header.input_width);
    println!("hidden_width {}", header.hidden_width);
    println!("rules {}", header.capacity);
    println!("mean_error {}", rb.mean_error());
    println!("min_error {min_error}");
    println!("mean_niche_size {mean_niche}");
    println!("latest_ga_timestamp {last_ea}");
    Ok(())
}
