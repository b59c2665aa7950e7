//! Multi-layer perceptron rules.
//!
//! A rule's network has `l` inputs, `H` sigmoid hidden nodes and `l + 1`
//! sigmoid outputs: the first `l` outputs reconstruct the input and the last
//! one is the match node.
//!
//! # Parameter layout
//!
//! All parameters live in one flat vector. Each node stores its incoming
//! weights followed by its bias:
//!
//! ```text
//! [ hidden 0: w_0 .. w_{l-1}, b ] ... [ hidden H-1: ... ]           (l+1)·H
//! [ output 0: v_0 .. v_{H-1}, b ] ... [ output l (match): ... ]     (H+1)·(l+1)
//! ```
//!
//! Output nodes `0..l` are the reconstruction, output node `l` is the match
//! node.

use rand::Rng;

use crate::error::{Error, Result};

/// Logistic transfer function.
#[inline]
pub fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Number of parameters of a network with `input_width` inputs and
/// `hidden_width` hidden nodes.
pub fn param_count(input_width: usize, hidden_width: usize) -> usize {
    (input_width + 1) * hidden_width + (hidden_width + 1) * (input_width + 1)
}

fn check_architecture(input_width: usize, hidden_width: usize) -> Result<()> {
    if input_width == 0 || hidden_width == 0 {
        return Err(Error::InvalidArchitecture {
            input_width,
            hidden_width,
        });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkGenome {
    input_width: usize,
    hidden_width: usize,
    params: Vec<f64>,
}

/// Full output of one forward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardResult {
    pub reconstruction: Vec<f64>,
    pub match_activation: f64,
    pub hidden: Vec<f64>,
}

impl NetworkGenome {
    /// A network whose every weight and bias is zero.
    pub fn zeros(input_width: usize, hidden_width: usize) -> Result<Self> {
        check_architecture(input_width, hidden_width)?;
        Ok(Self {
            input_width,
            hidden_width,
            params: vec![0.0; param_count(input_width, hidden_width)],
        })
    }

    /// Builds a genome from a flat parameter vector in the documented layout.
    pub fn from_params(input_width: usize, hidden_width: usize, params: Vec<f64>) -> Result<Self> {
        check_architecture(input_width, hidden_width)?;
        let expected = param_count(input_width, hidden_width);
        if params.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: params.len(),
            });
        }
        if let Some(i) = params.iter().position(|p| !p.is_finite()) {
            return Err(Error::InvalidInput(format!("parameter {i} is not finite")));
        }
        Ok(Self {
            input_width,
            hidden_width,
            params,
        })
    }

    /// Every parameter drawn uniformly from `[-w0, w0]`.
    pub fn random<R: Rng + ?Sized>(
        input_width: usize,
        hidden_width: usize,
        w0: f64,
        rng: &mut R,
    ) -> Result<Self> {
        check_architecture(input_width, hidden_width)?;
        if !(w0 > 0.0 && w0.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "initial weight range must be positive, got {w0}"
            )));
        }
        let params = (0..param_count(input_width, hidden_width))
            .map(|_| rng.gen_range(-w0..=w0))
            .collect();
        Ok(Self {
            input_width,
            hidden_width,
            params,
        })
    }

    pub fn input_width(&self) -> usize {
        self.input_width
    }

    pub fn hidden_width(&self) -> usize {
        self.hidden_width
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    fn output_offset(&self) -> usize {
        (self.input_width + 1) * self.hidden_width
    }

    fn output_node(&self, k: usize) -> &[f64] {
        let stride = self.hidden_width + 1;
        let start = self.output_offset() + k * stride;
        &self.params[start..start + stride]
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_width {
            return Err(Error::DimensionMismatch {
                expected: self.input_width,
                found: x.len(),
            });
        }
        Ok(())
    }

    /// Writes the hidden activations for `x` into `hidden`. Both lengths must
    /// already be checked by the caller.
    pub(crate) fn hidden_into(&self, x: &[f64], hidden: &mut [f64]) {
        let stride = self.input_width + 1;
        for (h, node) in hidden.iter_mut().zip(self.params.chunks_exact(stride)) {
            let (weights, bias) = node.split_at(self.input_width);
            let z = bias[0] + weights.iter().zip(x).map(|(w, xi)| w * xi).sum::<f64>();
            *h = sigmoid(z);
        }
    }

    #[inline]
    fn node_output(node: &[f64], hidden: &[f64]) -> f64 {
        let (weights, bias) = node.split_at(hidden.len());
        sigmoid(bias[0] + weights.iter().zip(hidden).map(|(v, h)| v * h).sum::<f64>())
    }

    pub(crate) fn match_from_hidden(&self, hidden: &[f64]) -> f64 {
        Self::node_output(self.output_node(self.input_width), hidden)
    }

    pub(crate) fn reconstruction_from_hidden(&self, hidden: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.extend((0..self.input_width).map(|k| Self::node_output(self.output_node(k), hidden)));
    }

    pub fn forward(&self, x: &[f64]) -> Result<ForwardResult> {
        self.check_input(x)?;
        let mut hidden = vec![0.0; self.hidden_width];
        self.hidden_into(x, &mut hidden);
        let mut reconstruction = Vec::with_capacity(self.input_width);
        self.reconstruction_from_hidden(&hidden, &mut reconstruction);
        let match_activation = self.match_from_hidden(&hidden);
        Ok(ForwardResult {
            reconstruction,
            match_activation,
            hidden,
        })
    }

    /// The hidden-layer code for `x`.
    pub fn encode(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        let mut hidden = vec![0.0; self.hidden_width];
        self.hidden_into(x, &mut hidden);
        Ok(hidden)
    }

    /// Match-node activation only; skips the reconstruction outputs.
    pub fn match_activation(&self, x: &[f64]) -> Result<f64> {
        let hidden = self.encode(x)?;
        Ok(self.match_from_hidden(&hidden))
    }

    /// Returns a copy in which each gene, with probability `mu`, is shifted by
    /// `±u` with `u` uniform on `(0, m0]` and the sign a fair coin.
    pub fn mutate<R: Rng + ?Sized>(&self, mu: f64, m0: f64, rng: &mut R) -> Result<Self> {
        let mut child = self.clone();
        child.mutate_in_place(mu, m0, rng)?;
        Ok(child)
    }

    /// In-place variant of [`mutate`](Self::mutate). Returns the number of
    /// genes changed.
    pub fn mutate_in_place<R: Rng + ?Sized>(
        &mut self,
        mu: f64,
        m0: f64,
        rng: &mut R,
    ) -> Result<usize> {
        if !(0.0..=1.0).contains(&mu) {
            return Err(Error::InvalidInput(format!(
                "mutation probability must be in [0,1], got {mu}"
            )));
        }
        if !(m0 > 0.0 && m0.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "mutation range must be positive, got {m0}"
            )));
        }
        let mut changed = 0;
        for p in &mut self.params {
            if rng.gen::<f64>() < mu {
                // gen() is in [0,1), so the step lies in (0, m0].
                let step = m0 * (1.0 - rng.gen::<f64>());
                if rng.gen::<bool>() {
                    *p += step;
                } else {
                    *p -= step;
                }
                changed += 1;
            }
        }
        Ok(changed)
    }

    /// Zeroes the match node's incoming weights and sets its bias to +1, so
    /// the match activation is `sigmoid(1)` for every input.
    pub fn force_match(&mut self) {
        let stride = self.hidden_width + 1;
        let start = self.output_offset() + self.input_width * stride;
        let node = &mut self.params[start..start + stride];
        let (weights, bias) = node.split_at_mut(self.hidden_width);
        weights.fill(0.0);
        bias[0] = 1.0;
    }
}
