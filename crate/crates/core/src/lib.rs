//! An autoencoding learning classifier system.
//!
//! Each rule is a small sigmoid MLP that reconstructs its input through a
//! narrow hidden layer and carries an extra "match" output. Rules whose match
//! node fires on an input form that input's niche; niche members update their
//! error and niche-size estimates by Widrow-Hoff averaging, and a niche
//! evolutionary algorithm breeds low-error members by weight mutation,
//! replacing rules from crowded niches. Covering guarantees every input is
//! matched by at least one rule.
//!
//! ```
//! use ycsae::{train, TrainConfig};
//!
//! let cfg = TrainConfig { pop_size: 50, cycles: 200, sample_interval: 100, ..TrainConfig::standard(8) };
//! let (timeline, rulebase) = train(&cfg, 7).unwrap();
//! assert_eq!(timeline.rows.len(), 3);
//! assert_eq!(rulebase.len(), 50);
//! ```

pub mod data;
pub mod error;
pub mod experiment;
pub mod learning;
pub mod neural_rule;
pub mod rulebase;

pub use data::{load_dataset, sample_pattern, DatasetSpec, Pattern};
pub use error::{Error, Result};
pub use experiment::{
    best_encode, load_model, run_experiment, save_model, train, train_with_source, Encoding,
    ExperimentResult, InputSource, MetricsRow, MetricsTimeline, ModelHeader, TrainConfig, Trainer,
};
pub use learning::{fitness, roulette, LearningParams, OffspringInit};
pub use neural_rule::{ForwardResult, NetworkGenome};
pub use rulebase::{MatchSet, Rule, RuleId, RuleInit, Rulebase};
