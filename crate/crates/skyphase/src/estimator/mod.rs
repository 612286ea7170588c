//! Phase estimators for the reference-pulse stream: a from-scratch LSTM
//! regressor plus the expectation (window-mean) and identity baselines,
//! with the architecture-scale metric and estimation-error variance used
//! to compare them.

mod train;

pub use train::{loss_and_gradients, train, Optimizer, TrainConfig, TrainSample};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phasesim::wrap_phase;

/// LSTM cell weights plus the scalar read-out head.
///
/// Input is a scalar per step, so the input weights are vectors; the
/// recurrent matrices are row-major `z_dim × z_dim` with layout
/// `w[out * z_dim + in]`. The head maps the final hidden state to a
/// scalar phase estimate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LstmParams {
    pub z_dim: usize,
    pub w_xf: Vec<f64>,
    pub w_xi: Vec<f64>,
    pub w_xc: Vec<f64>,
    pub w_xo: Vec<f64>,
    pub w_hf: Vec<f64>,
    pub w_hi: Vec<f64>,
    pub w_hc: Vec<f64>,
    pub w_ho: Vec<f64>,
    pub b_f: Vec<f64>,
    pub b_i: Vec<f64>,
    pub b_c: Vec<f64>,
    pub b_o: Vec<f64>,
    pub w_y: Vec<f64>,
    pub b_y: f64,
}

impl LstmParams {
    /// All-zero parameters (a dead network that always outputs `b_y`).
    pub fn zeros(z_dim: usize) -> Self {
        LstmParams {
            z_dim,
            w_xf: vec![0.0; z_dim],
            w_xi: vec![0.0; z_dim],
            w_xc: vec![0.0; z_dim],
            w_xo: vec![0.0; z_dim],
            w_hf: vec![0.0; z_dim * z_dim],
            w_hi: vec![0.0; z_dim * z_dim],
            w_hc: vec![0.0; z_dim * z_dim],
            w_ho: vec![0.0; z_dim * z_dim],
            b_f: vec![0.0; z_dim],
            b_i: vec![0.0; z_dim],
            b_c: vec![0.0; z_dim],
            b_o: vec![0.0; z_dim],
            w_y: vec![0.0; z_dim],
            b_y: 0.0,
        }
    }

    /// Standard initialization: every weight uniform in ±1/√z_dim, then
    /// the forget-gate bias shifted by +1 so early training does not
    /// flush the cell state.
    pub fn init<R: Rng + ?Sized>(z_dim: usize, rng: &mut R) -> Result<Self> {
        if z_dim == 0 {
            return Err(Error::config("z_dim must be at least 1"));
        }
        let s = 1.0 / (z_dim as f64).sqrt();
        let mut p = Self::zeros(z_dim);
        for slot in p.fields_mut() {
            for w in slot.iter_mut() {
                *w = rng.gen_range(-s..s);
            }
        }
        for b in &mut p.b_f {
            *b += 1.0;
        }
        Ok(p)
    }

    /// The thirteen weight arrays plus the head bias as mutable slices,
    /// in a fixed order shared by the optimizer, the gradient clip, and
    /// external consumers that walk every parameter (e.g. finite-difference
    /// gradient checks).
    pub fn fields_mut(&mut self) -> [&mut [f64]; 14] {
        [
            &mut self.w_xf,
            &mut self.w_xi,
            &mut self.w_xc,
            &mut self.w_xo,
            &mut self.w_hf,
            &mut self.w_hi,
            &mut self.w_hc,
            &mut self.w_ho,
            &mut self.b_f,
            &mut self.b_i,
            &mut self.b_c,
            &mut self.b_o,
            &mut self.w_y,
            std::slice::from_mut(&mut self.b_y),
        ]
    }

    /// Shared-reference view of [`Self::fields_mut`], same order.
    pub fn fields(&self) -> [&[f64]; 14] {
        [
            &self.w_xf,
            &self.w_xi,
            &self.w_xc,
            &self.w_xo,
            &self.w_hf,
            &self.w_hi,
            &self.w_hc,
            &self.w_ho,
            &self.b_f,
            &self.b_i,
            &self.b_c,
            &self.b_o,
            &self.w_y,
            std::slice::from_ref(&self.b_y),
        ]
    }

    pub fn validate(&self) -> Result<()> {
        let z = self.z_dim;
        if z == 0 {
            return Err(Error::shape("z_dim must be at least 1"));
        }
        let lens = [
            self.w_xf.len(),
            self.w_xi.len(),
            self.w_xc.len(),
            self.w_xo.len(),
            self.b_f.len(),
            self.b_i.len(),
            self.b_c.len(),
            self.b_o.len(),
            self.w_y.len(),
        ];
        if lens.iter().any(|&l| l != z) {
            return Err(Error::shape("vector parameter length does not match z_dim"));
        }
        let mats = [self.w_hf.len(), self.w_hi.len(), self.w_hc.len(), self.w_ho.len()];
        if mats.iter().any(|&l| l != z * z) {
            return Err(Error::shape("recurrent matrix size does not match z_dim²"));
        }
        if self.fields().iter().any(|f| f.iter().any(|v| !v.is_finite())) {
            return Err(Error::numerical("non-finite parameter value"));
        }
        Ok(())
    }
}

/// Cell and hidden state of the LSTM (long- and short-term memory).
#[derive(Clone, Debug, PartialEq)]
pub struct LstmState {
    pub c: Vec<f64>,
    pub h: Vec<f64>,
}

impl LstmState {
    pub fn zeros(z_dim: usize) -> Self {
        LstmState { c: vec![0.0; z_dim], h: vec![0.0; z_dim] }
    }
}

fn sigmoid(v: f64) -> f64 {
    1.0 / (1.0 + (-v).exp())
}

/// Shared cell recurrence, writing the updated state into `next`.
fn step_into(params: &LstmParams, state: &LstmState, x: f64, next: &mut LstmState) {
    let z = params.z_dim;
    for j in 0..z {
        let mut pre_f = params.w_xf[j] * x + params.b_f[j];
        let mut pre_i = params.w_xi[j] * x + params.b_i[j];
        let mut pre_g = params.w_xc[j] * x + params.b_c[j];
        let mut pre_o = params.w_xo[j] * x + params.b_o[j];
        let row = j * z;
        for (k, &h) in state.h.iter().enumerate() {
            pre_f += params.w_hf[row + k] * h;
            pre_i += params.w_hi[row + k] * h;
            pre_g += params.w_hc[row + k] * h;
            pre_o += params.w_ho[row + k] * h;
        }
        let c_new = sigmoid(pre_f) * state.c[j] + sigmoid(pre_i) * pre_g.tanh();
        next.c[j] = c_new;
        next.h[j] = sigmoid(pre_o) * c_new.tanh();
    }
}

/// One LSTM cell update:
///
/// f = σ(w_xf·x + w_hf·h + b_f)      (forget gate)
/// i = σ(w_xi·x + w_hi·h + b_i)      (input gate)
/// g = tanh(w_xc·x + w_hc·h + b_c)   (candidate)
/// c′ = f⊙c + i⊙g
/// o = σ(w_xo·x + w_ho·h + b_o)      (output gate)
/// h′ = o⊙tanh(c′)
pub fn lstm_step(params: &LstmParams, state: &LstmState, x: f64) -> LstmState {
    let mut next = LstmState::zeros(params.z_dim);
    step_into(params, state, x, &mut next);
    next
}

/// Runs the cell over a measurement window from zero initial state and
/// reads out w_y·h_N + b_y.
pub fn predict(params: &LstmParams, window: &[f64]) -> Result<f64> {
    if window.is_empty() {
        return Err(Error::shape("prediction window is empty"));
    }
    let mut state = LstmState::zeros(params.z_dim);
    let mut next = LstmState::zeros(params.z_dim);
    for &x in window {
        step_into(params, &state, x, &mut next);
        std::mem::swap(&mut state, &mut next);
    }
    Ok(params.w_y.iter().zip(&state.h).map(|(w, h)| w * h).sum::<f64>() + params.b_y)
}

/// Window mean ⟨Δφ_R⟩_N.
pub fn expectation_estimator(window: &[f64]) -> Result<f64> {
    if window.is_empty() {
        return Err(Error::shape("expectation window is empty"));
    }
    Ok(window.iter().sum::<f64>() / window.len() as f64)
}

/// The trivial estimator Δφ̃_S = Δφ_R.
pub fn identity_estimator(x: f64) -> f64 {
    x
}

/// Architecture scale: total trainable parameters unrolled over the
/// window,
///
/// S = N·(4·[(z+1)·z + z] + (z+1))
///
/// i.e. per step four gates of z input weights, z² recurrent weights and
/// z biases, plus the (z+1)-parameter read-out head.
pub fn scale(window_len: usize, z_dim: usize) -> u64 {
    let n = window_len as u64;
    let z = z_dim as u64;
    n * (4 * ((z + 1) * z + z) + (z + 1))
}

/// Population variance of the wrapped difference series
/// Var(Δφ̃_S − Δφ_S), in squared radians (shot-noise units).
///
/// A constant estimator bias is invisible here by construction; callers
/// that care report the mean separately.
pub fn estimation_error_variance(estimates: &[f64], truths: &[f64]) -> Result<f64> {
    if estimates.len() != truths.len() {
        return Err(Error::shape(format!(
            "estimate/truth length mismatch: {} vs {}",
            estimates.len(),
            truths.len()
        )));
    }
    if estimates.len() < 2 {
        return Err(Error::shape("need at least 2 samples for a variance"));
    }
    let n = estimates.len() as f64;
    let diffs: Vec<f64> =
        estimates.iter().zip(truths).map(|(e, t)| wrap_phase(e - t)).collect();
    let mean = diffs.iter().sum::<f64>() / n;
    Ok(diffs.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / n)
}

/// A ready-to-evaluate estimator with its window geometry.
#[derive(Clone, Debug)]
pub enum EstimatorKind {
    Lstm { params: LstmParams, window_len: usize },
    Expectation { window_len: usize },
    Identity,
}

impl EstimatorKind {
    /// Measurements consumed per estimate.
    pub fn window_len(&self) -> usize {
        match self {
            EstimatorKind::Lstm { window_len, .. } => *window_len,
            EstimatorKind::Expectation { window_len } => *window_len,
            EstimatorKind::Identity => 1,
        }
    }

    /// Estimate from exactly one window of measurements.
    pub fn estimate(&self, window: &[f64]) -> Result<f64> {
        if window.len() != self.window_len() {
            return Err(Error::shape(format!(
                "window length {} does not match the estimator's {}",
                window.len(),
                self.window_len()
            )));
        }
        match self {
            EstimatorKind::Lstm { params, .. } => predict(params, window),
            EstimatorKind::Expectation { .. } => expectation_estimator(window),
            EstimatorKind::Identity => Ok(identity_estimator(window[0])),
        }
    }

    /// Slides over a reference-error series, producing one estimate per
    /// pulse from index `window_len − 1` on. Windows are independent
    /// (stateless predict), so the work parallelizes freely.
    pub fn estimate_series(&self, refs: &[f64]) -> Result<Vec<f64>> {
        let n = self.window_len();
        if refs.len() < n {
            return Err(Error::shape(format!(
                "series of {} pulses is shorter than one window of {n}",
                refs.len()
            )));
        }
        match self {
            EstimatorKind::Identity => Ok(refs.to_vec()),
            EstimatorKind::Expectation { .. } => {
                // Running sum instead of per-window mean: one pass.
                let mut out = Vec::with_capacity(refs.len() - n + 1);
                let mut acc: f64 = refs[..n].iter().sum();
                out.push(acc / n as f64);
                for i in n..refs.len() {
                    acc += refs[i] - refs[i - n];
                    out.push(acc / n as f64);
                }
                Ok(out)
            }
            EstimatorKind::Lstm { params, .. } => {
                use rayon::prelude::*;
                params.validate()?;
                (0..refs.len() - n + 1)
                    .into_par_iter()
                    .map(|i| predict(params, &refs[i..i + n]))
                    .collect()
            }
        }
    }
}
