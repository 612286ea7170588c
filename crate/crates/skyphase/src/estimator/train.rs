//! Backpropagation-through-time training of the LSTM estimator on
//! sliding windows of reference phase errors.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phasesim::PhaseSequence;
use crate::rng::substream;

use super::LstmParams;

const BETA_1: f64 = 0.9;
const BETA_2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

/// Parameter-update rule.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Optimizer {
    /// Plain stochastic gradient descent.
    PlainSgd,
    /// Adaptive-moment estimation with decay rates 0.9/0.999 and
    /// ε = 10⁻⁸; the bias-corrected step size is
    /// lr·√(1 − β₂ᵗ)/(1 − β₁ᵗ).
    AdaptiveMoment,
}

/// Training hyper-parameters. Everything influencing the run is here, so
/// a (dataset, config) pair reproduces the trained model bit for bit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    /// Measurements per window, N.
    pub window_len: usize,
    /// Hidden/cell dimension z.
    pub z_dim: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    /// Seed for initialization and per-epoch shuffling.
    pub seed: u64,
    /// Global gradient-norm ceiling.
    pub gradient_clip: f64,
    pub optimizer: Optimizer,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            window_len: 40,
            z_dim: 4,
            learning_rate: 1e-3,
            batch_size: 64,
            epochs: 2,
            seed: 0,
            gradient_clip: 5.0,
            optimizer: Optimizer::AdaptiveMoment,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window_len < 1 {
            return Err(Error::config("window_len must be at least 1"));
        }
        if self.z_dim < 1 {
            return Err(Error::config("z_dim must be at least 1"));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::config("learning_rate must be positive"));
        }
        if self.batch_size < 1 {
            return Err(Error::config("batch_size must be at least 1"));
        }
        if self.epochs < 1 {
            return Err(Error::config("epochs must be at least 1"));
        }
        if !(self.gradient_clip > 0.0) {
            return Err(Error::config("gradient_clip must be positive"));
        }
        Ok(())
    }
}

/// One supervised example: a window of Δφ_R and the window-end Δφ_S.
#[derive(Clone, Copy, Debug)]
pub struct TrainSample<'a> {
    pub window: &'a [f64],
    pub target: f64,
}

/// Per-step forward quantities kept for the backward pass.
struct ForwardTape {
    /// h[t] for t = 0..=n (h[0] = 0), flattened n+1 × z.
    h: Vec<f64>,
    /// c[t] for t = 0..=n (c[0] = 0), flattened n+1 × z.
    c: Vec<f64>,
    /// Gate activations per step, flattened n × z each.
    f: Vec<f64>,
    i: Vec<f64>,
    g: Vec<f64>,
    o: Vec<f64>,
    /// tanh(c[t+1]) per step, flattened n × z.
    tc: Vec<f64>,
}

impl ForwardTape {
    fn new() -> Self {
        ForwardTape {
            h: Vec::new(),
            c: Vec::new(),
            f: Vec::new(),
            i: Vec::new(),
            g: Vec::new(),
            o: Vec::new(),
            tc: Vec::new(),
        }
    }

    fn reset(&mut self, n: usize, z: usize) {
        self.h.clear();
        self.h.resize((n + 1) * z, 0.0);
        self.c.clear();
        self.c.resize((n + 1) * z, 0.0);
        for buf in [&mut self.f, &mut self.i, &mut self.g, &mut self.o, &mut self.tc] {
            buf.clear();
            buf.resize(n * z, 0.0);
        }
    }
}

fn sigmoid(v: f64) -> f64 {
    1.0 / (1.0 + (-v).exp())
}

/// Mean squared error over the batch and its gradient with respect to
/// every parameter, by backpropagation through time over all window
/// steps. The gradient comes back in an [`LstmParams`]-shaped container.
///
/// Duplicating the batch leaves both outputs unchanged (everything is a
/// batch mean).
pub fn loss_and_gradients(params: &LstmParams, batch: &[TrainSample]) -> Result<(f64, LstmParams)> {
    if batch.is_empty() {
        return Err(Error::shape("training batch is empty"));
    }
    params.validate()?;
    let z = params.z_dim;
    let inv_b = 1.0 / batch.len() as f64;

    let mut grads = LstmParams::zeros(z);
    let mut loss = 0.0;
    let mut tape = ForwardTape::new();
    let mut dh = vec![0.0; z];
    let mut dh_next = vec![0.0; z];
    let mut dc = vec![0.0; z];
    let mut dpre = vec![0.0; 4 * z];

    for sample in batch {
        let n = sample.window.len();
        if n == 0 {
            return Err(Error::shape("training window is empty"));
        }
        tape.reset(n, z);

        // Forward, recording gates and states.
        for (t, &x) in sample.window.iter().enumerate() {
            let (prev, cur) = (t * z, (t + 1) * z);
            for j in 0..z {
                let row = j * z;
                let mut pre_f = params.w_xf[j] * x + params.b_f[j];
                let mut pre_i = params.w_xi[j] * x + params.b_i[j];
                let mut pre_g = params.w_xc[j] * x + params.b_c[j];
                let mut pre_o = params.w_xo[j] * x + params.b_o[j];
                for k in 0..z {
                    let h = tape.h[prev + k];
                    pre_f += params.w_hf[row + k] * h;
                    pre_i += params.w_hi[row + k] * h;
                    pre_g += params.w_hc[row + k] * h;
                    pre_o += params.w_ho[row + k] * h;
                }
                let (f, i, g, o) =
                    (sigmoid(pre_f), sigmoid(pre_i), pre_g.tanh(), sigmoid(pre_o));
                let c_new = f * tape.c[prev + j] + i * g;
                let tc = c_new.tanh();
                tape.f[t * z + j] = f;
                tape.i[t * z + j] = i;
                tape.g[t * z + j] = g;
                tape.o[t * z + j] = o;
                tape.tc[t * z + j] = tc;
                tape.c[cur + j] = c_new;
                tape.h[cur + j] = o * tc;
            }
        }
        let h_final = &tape.h[n * z..];
        let y = params.w_y.iter().zip(h_final).map(|(w, h)| w * h).sum::<f64>() + params.b_y;
        if !y.is_finite() {
            return Err(Error::numerical("non-finite forward value: training diverged"));
        }

        let err = y - sample.target;
        loss += err * err * inv_b;
        let dy = 2.0 * err * inv_b;

        for j in 0..z {
            grads.w_y[j] += dy * h_final[j];
            dh[j] = dy * params.w_y[j];
            dc[j] = 0.0;
        }
        grads.b_y += dy;

        // Backward through time.
        for t in (0..n).rev() {
            let x = sample.window[t];
            let prev = t * z;
            for j in 0..z {
                let idx = t * z + j;
                let (f, i, g, o, tc) =
                    (tape.f[idx], tape.i[idx], tape.g[idx], tape.o[idx], tape.tc[idx]);
                let d_o = dh[j] * tc;
                dc[j] += dh[j] * o * (1.0 - tc * tc);
                let d_f = dc[j] * tape.c[prev + j];
                let d_i = dc[j] * g;
                let d_g = dc[j] * i;
                dpre[j] = d_f * f * (1.0 - f);
                dpre[z + j] = d_i * i * (1.0 - i);
                dpre[2 * z + j] = d_g * (1.0 - g * g);
                dpre[3 * z + j] = d_o * o * (1.0 - o);
                dc[j] *= f;
            }
            for j in 0..z {
                let row = j * z;
                let (pf, pi, pg, po) = (dpre[j], dpre[z + j], dpre[2 * z + j], dpre[3 * z + j]);
                grads.w_xf[j] += pf * x;
                grads.w_xi[j] += pi * x;
                grads.w_xc[j] += pg * x;
                grads.w_xo[j] += po * x;
                grads.b_f[j] += pf;
                grads.b_i[j] += pi;
                grads.b_c[j] += pg;
                grads.b_o[j] += po;
                for k in 0..z {
                    let h = tape.h[prev + k];
                    grads.w_hf[row + k] += pf * h;
                    grads.w_hi[row + k] += pi * h;
                    grads.w_hc[row + k] += pg * h;
                    grads.w_ho[row + k] += po * h;
                }
            }
            for k in 0..z {
                let mut acc = 0.0;
                for j in 0..z {
                    let row = j * z;
                    acc += dpre[j] * params.w_hf[row + k]
                        + dpre[z + j] * params.w_hi[row + k]
                        + dpre[2 * z + j] * params.w_hc[row + k]
                        + dpre[3 * z + j] * params.w_ho[row + k];
                }
                dh_next[k] = acc;
            }
            std::mem::swap(&mut dh, &mut dh_next);
        }
    }
    Ok((loss, grads))
}

struct OptimizerState {
    m: LstmParams,
    v: LstmParams,
    step: u64,
}

impl OptimizerState {
    fn new(z_dim: usize) -> Self {
        OptimizerState { m: LstmParams::zeros(z_dim), v: LstmParams::zeros(z_dim), step: 0 }
    }

    fn apply(&mut self, params: &mut LstmParams, grads: &mut LstmParams, cfg: &TrainConfig) {
        // Global-norm clip across every parameter, head bias included.
        let norm = grads
            .fields()
            .iter()
            .flat_map(|f| f.iter())
            .map(|g| g * g)
            .sum::<f64>()
            .sqrt();
        if norm > cfg.gradient_clip {
            let s = cfg.gradient_clip / norm;
            for f in grads.fields_mut() {
                for g in f.iter_mut() {
                    *g *= s;
                }
            }
        }

        match cfg.optimizer {
            Optimizer::PlainSgd => {
                for (p, g) in params.fields_mut().into_iter().zip(grads.fields()) {
                    for (pv, gv) in p.iter_mut().zip(g.iter()) {
                        *pv -= cfg.learning_rate * gv;
                    }
                }
            }
            Optimizer::AdaptiveMoment => {
                self.step += 1;
                let t = self.step as i32;
                let lr_t = cfg.learning_rate * (1.0 - BETA_2.powi(t)).sqrt()
                    / (1.0 - BETA_1.powi(t));
                let fields = params.fields_mut().into_iter().zip(grads.fields());
                for ((p, g), (m, v)) in
                    fields.zip(self.m.fields_mut().into_iter().zip(self.v.fields_mut()))
                {
                    for k in 0..p.len() {
                        m[k] = BETA_1 * m[k] + (1.0 - BETA_1) * g[k];
                        v[k] = BETA_2 * v[k] + (1.0 - BETA_2) * g[k] * g[k];
                        p[k] -= lr_t * m[k] / (v[k].sqrt() + ADAM_EPS);
                    }
                }
            }
        }
    }
}

/// Trains an LSTM on sliding windows of the sequence's reference errors,
/// with the window-end signal phase as target. Returns the final
/// parameters and the mean training loss per epoch.
///
/// Windows are reshuffled every epoch; a trailing partial batch is
/// dropped. The run is a pure function of (`dataset`, `cfg`): the seed
/// drives initialization and shuffling through independent derived
/// streams.
pub fn train(dataset: &PhaseSequence, cfg: &TrainConfig) -> Result<(LstmParams, Vec<f64>)> {
    cfg.validate()?;
    dataset.validate()?;
    let n = cfg.window_len;
    let refs = &dataset.ref_errors;
    if refs.len() <= n {
        return Err(Error::config(format!(
            "dataset of {} pulses cannot fill windows of {n}",
            refs.len()
        )));
    }
    let n_windows = refs.len() - n + 1;
    if n_windows < cfg.batch_size {
        return Err(Error::config(format!(
            "batch_size {} exceeds the {n_windows} available windows",
            cfg.batch_size
        )));
    }

    let mut params = LstmParams::init(cfg.z_dim, &mut substream(cfg.seed, "lstm-init", 0))?;
    let mut shuffle_rng = substream(cfg.seed, "lstm-shuffle", 0);
    let mut opt = OptimizerState::new(cfg.z_dim);
    let mut order: Vec<usize> = (0..n_windows).collect();
    let usable = n_windows - n_windows % cfg.batch_size;
    let mut history: Vec<f64> = Vec::with_capacity(cfg.epochs);
    let mut batch: Vec<TrainSample> = Vec::with_capacity(cfg.batch_size);

    for epoch in 0..cfg.epochs {
        order.shuffle(&mut shuffle_rng);
        let mut epoch_loss = 0.0;
        let mut n_batches = 0u64;
        for chunk in order[..usable].chunks(cfg.batch_size) {
            batch.clear();
            batch.extend(chunk.iter().map(|&start| TrainSample {
                window: &refs[start..start + n],
                target: dataset.sig_errors[start + n - 1],
            }));
            let step = loss_and_gradients(&params, &batch).and_then(|(loss, grads)| {
                if loss.is_finite() {
                    Ok((loss, grads))
                } else {
                    Err(Error::numerical("non-finite loss"))
                }
            });
            let (loss, mut grads) = match step {
                Ok(v) => v,
                Err(_) => {
                    return Err(Error::TrainingDiverged { epoch, history });
                }
            };
            opt.apply(&mut params, &mut grads, cfg);
            epoch_loss += loss;
            n_batches += 1;
        }
        history.push(epoch_loss / n_batches as f64);
    }
    if params.validate().is_err() {
        let epoch = cfg.epochs - 1;
        return Err(Error::TrainingDiverged { epoch, history });
    }
    Ok((params, history))
}
