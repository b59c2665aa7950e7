//! Noisy binary patterns and the plain-text dataset format.
//!
//! Dataset files hold one pattern per line as a string of `0`/`1` characters,
//! every line newline-terminated, no header.

use std::fs;
use std::path::Path;

use rand::Rng;

use crate::error::{Error, Result};

/// A binary pattern, one `0.0`/`1.0` value per bit.
pub type Pattern = Vec<f64>;

/// Generator for "all zeros or all ones, with independent bit flips" data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DatasetSpec {
    pub length: usize,
    pub noise_rate: f64,
}

impl DatasetSpec {
    pub fn new(length: usize, noise_rate: f64) -> Result<Self> {
        let spec = Self { length, noise_rate };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.length == 0 {
            return Err(Error::Config("length must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.noise_rate) {
            return Err(Error::Config("noise must be in [0,1]".into()));
        }
        Ok(())
    }
}

/// Picks all-zeros or all-ones with equal probability, then flips each bit
/// with probability `noise_rate`.
pub fn sample_pattern<R: Rng + ?Sized>(spec: &DatasetSpec, rng: &mut R) -> Pattern {
    sample_with_base(spec, rng).1
}

/// As [`sample_pattern`], also returning the base bit.
pub(crate) fn sample_with_base<R: Rng + ?Sized>(
    spec: &DatasetSpec,
    rng: &mut R,
) -> (bool, Pattern) {
    let base = rng.gen::<bool>();
    let bits = (0..spec.length)
        .map(|_| {
            let flip = rng.gen::<f64>() < spec.noise_rate;
            if base != flip {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    (base, bits)
}

pub fn format_pattern(bits: &[f64]) -> String {
    bits.iter()
        .map(|&b| if b > 0.5 { '1' } else { '0' })
        .collect()
}

/// Parses one line of `0`/`1` characters. `line` is 1-based, for errors.
pub fn parse_pattern(text: &str, line: usize) -> Result<Pattern> {
    text.chars()
        .map(|c| match c {
            '0' => Ok(0.0),
            '1' => Ok(1.0),
            other => Err(Error::format(
                line,
                format!("unexpected character {other:?}; patterns use only '0' and '1'"),
            )),
        })
        .collect()
}

pub fn parse_dataset(text: &str) -> Result<Vec<Pattern>> {
    let mut patterns: Vec<Pattern> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let raw = raw.strip_suffix('\r').unwrap_or(raw);
        if raw.is_empty() {
            return Err(Error::format(line, "empty line"));
        }
        let bits = parse_pattern(raw, line)?;
        if let Some(first) = patterns.first() {
            if bits.len() != first.len() {
                return Err(Error::format(
                    line,
                    format!(
                        "pattern has length {}, expected {}",
                        bits.len(),
                        first.len()
                    ),
                ));
            }
        }
        patterns.push(bits);
    }
    if patterns.is_empty() {
        return Err(Error::format(1, "dataset is empty"));
    }
    Ok(patterns)
}

pub fn load_dataset(path: impl AsRef<Path>) -> Result<Vec<Pattern>> {
    parse_dataset(&fs::read_to_string(path)?)
}

pub fn format_dataset(patterns: &[Pattern]) -> String {
    let mut out = String::with_capacity(patterns.iter().map(|p| p.len() + 1).sum());
    for p in patterns {
        out.push_str(&format_pattern(p));
        out.push('\n');
    }
    out
}

pub fn write_dataset(path: impl AsRef<Path>, patterns: &[Pattern]) -> Result<()> {
    fs::write(path, format_dataset(patterns))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn noiseless_samples_are_constant() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let spec = DatasetSpec::new(11, 0.0).unwrap();
        for _ in 0..1000 {
            let p = sample_pattern(&spec, &mut rng);
            assert_eq!(p.len(), 11);
            assert!(p.iter().all(|&b| b == p[0]));
        }
    }

    #[test]
    fn flip_count_and_base_frequency() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let spec = DatasetSpec::new(11, 0.1).unwrap();
        let n = 100_000;
        let (mut flips, mut ones_base, mut majority_agrees) = (0usize, 0usize, 0usize);
        for _ in 0..n {
            let (base, p) = sample_with_base(&spec, &mut rng);
            let base_bit = if base { 1.0 } else { 0.0 };
            let flipped = p.iter().filter(|&&b| b != base_bit).count();
            flips += flipped;
            ones_base += base as usize;
            majority_agrees += (flipped * 2 < p.len()) as usize;
        }
        let mean = flips as f64 / n as f64;
        let sd_mean = (11.0 * 0.1 * 0.9 / n as f64).sqrt();
        assert!((mean - 1.1).abs() < 3.0 * sd_mean, "mean flips {mean}");
        let sd = (n as f64 * 0.25).sqrt();
        assert!((ones_base as f64 - n as f64 / 2.0).abs() < 3.0 * sd);
        assert!(majority_agrees as f64 / n as f64 > 0.5);
    }

    #[test]
    fn parse_examples() {
        let d = parse_dataset("000\n111\n").unwrap();
        assert_eq!(d, vec![vec![0.0; 3], vec![1.0; 3]]);
        assert!(matches!(
            parse_dataset("01\n011\n"),
            Err(Error::Format { line: 2, .. })
        ));
        assert!(matches!(
            parse_dataset("012\n"),
            Err(Error::Format { line: 1, .. })
        ));
        assert!(matches!(parse_dataset(""), Err(Error::Format { .. })));
    }

    proptest! {
        #[test]
        fn dataset_text_round_trips(rows in prop::collection::vec("[01]{5}", 1..20)) {
            let text: String = rows.iter().map(|r| format!("{r}\n")).collect();
            let parsed = parse_dataset(&text).unwrap();
            prop_assert_eq!(format_dataset(&parsed), text);
        }

        #[test]
        fn samples_have_spec_length(len in 1usize..64, noise in 0.0f64..=1.0, seed: u64) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let spec = DatasetSpec::new(len, noise).unwrap();
            prop_assert_eq!(sample_pattern(&spec, &mut rng).len(), len);
        }
    }
}
