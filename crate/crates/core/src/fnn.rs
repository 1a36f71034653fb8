//! A 4-10-10-2 feed-forward classifier trained with Levenberg-Marquardt,
//! and the half-image train/predict protocol that extracts the watermark.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::embedder::cd_block_features;
use crate::error::{Error, Result};
use crate::imaging::{BitMatrix, Plane};

pub const LAYERS: [usize; 4] = [4, 10, 10, 2];
const IN: usize = LAYERS[0];
const H1: usize = LAYERS[1];
const H2: usize = LAYERS[2];
const OUT: usize = LAYERS[3];

// Offsets into the flat parameter vector: W1 b1 W2 b2 W3 b3, weights row-major
// (row = receiving neuron).
const W1: usize = 0;
const B1: usize = W1 + H1 * IN;
const W2: usize = B1 + H1;
const B2: usize = W2 + H2 * H1;
const W3: usize = B2 + H2;
const B3: usize = W3 + OUT * H2;
pub const PARAM_COUNT: usize = B3 + OUT;

/// Logistic activation with gain `g`.
pub fn sigmoid(x: f64, g: f64) -> f64 {
    1.0 / (1.0 + (-g * x).exp())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Network {
    params: Vec<f64>,
    gain: f64,
}

struct Trace {
    h1: [f64; H1],
    h2: [f64; H2],
    out: [f64; OUT],
}

impl Network {
    pub fn zeros() -> Self {
        Self {
            params: vec![0.0; PARAM_COUNT],
            gain: 1.0,
        }
    }

    /// Weights and biases uniform in `[-0.5, 0.5]`.
    pub fn random(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self {
            params: (0..PARAM_COUNT).map(|_| rng.random_range(-0.5..=0.5)).collect(),
            gain: 1.0,
        }
    }

    pub fn from_params(params: Vec<f64>, gain: f64) -> Result<Self> {
        if params.len() != PARAM_COUNT {
            return Err(Error::InvalidParameter(format!(
                "expected {PARAM_COUNT} parameters, got {}",
                params.len()
            )));
        }
        if params.iter().any(|p| !p.is_finite()) || !gain.is_finite() {
            return Err(Error::InvalidParameter("network parameters must be finite".into()));
        }
        Ok(Self { params, gain })
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn gain(&self) -> f64 {
        self.gain
    }

    fn trace(&self, x: &[f64; IN]) -> Trace {
        let p = &self.params;
        let g = self.gain;
        let mut h1 = [0.0; H1];
        for (i, h) in h1.iter_mut().enumerate() {
            let mut a = p[B1 + i];
            for (m, xm) in x.iter().enumerate() {
                a += p[W1 + i * IN + m] * xm;
            }
            *h = sigmoid(a, g);
        }
        let mut h2 = [0.0; H2];
        for (j, h) in h2.iter_mut().enumerate() {
            let mut a = p[B2 + j];
            for (i, hi) in h1.iter().enumerate() {
                a += p[W2 + j * H1 + i] * hi;
            }
            *h = sigmoid(a, g);
        }
        let mut out = [0.0; OUT];
        for (k, o) in out.iter_mut().enumerate() {
            let mut a = p[B3 + k];
            for (j, hj) in h2.iter().enumerate() {
                a += p[W3 + k * H2 + j] * hj;
            }
            *o = a;
        }
        Trace { h1, h2, out }
    }

    pub fn forward(&self, x: &[f64; IN]) -> [f64; OUT] {
        self.trace(x).out
    }

    /// Forward pass plus `d out_k / d params` for both outputs.
    pub fn jacobian(&self, x: &[f64; IN]) -> ([f64; OUT], [[f64; PARAM_COUNT]; OUT]) {
        let p = &self.params;
        let g = self.gain;
        let t = self.trace(x);
        let mut jac = [[0.0; PARAM_COUNT]; OUT];
        for (k, row) in jac.iter_mut().enumerate() {
            row[B3 + k] = 1.0;
            let mut d2 = [0.0; H2];
            for j in 0..H2 {
                row[W3 + k * H2 + j] = t.h2[j];
                d2[j] = p[W3 + k * H2 + j] * g * t.h2[j] * (1.0 - t.h2[j]);
                row[B2 + j] = d2[j];
                for i in 0..H1 {
                    row[W2 + j * H1 + i] = d2[j] * t.h1[i];
                }
            }
            for i in 0..H1 {
                let mut back = 0.0;
                for (j, dj) in d2.iter().enumerate() {
                    back += dj * p[W2 + j * H1 + i];
                }
                let d1 = back * g * t.h1[i] * (1.0 - t.h1[i]);
                row[B1 + i] = d1;
                for m in 0..IN {
                    row[W1 + i * IN + m] = d1 * x[m];
                }
            }
        }
        (t.out, jac)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub max_epochs: usize,
    pub goal_mse: f64,
    pub lambda_init: f64,
    pub lambda_decrease: f64,
    pub lambda_increase: f64,
    pub lambda_max: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            max_epochs: 100,
            goal_mse: 1e-3,
            lambda_init: 1e-3,
            lambda_decrease: 0.1,
            lambda_increase: 10.0,
            lambda_max: 1e10,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum StopReason {
    MaxEpochs,
    Goal,
    LambdaLimit,
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub net: Network,
    pub epochs: usize,
    /// MSE before training followed by the MSE after each accepted step.
    pub history: Vec<f64>,
    pub stop: StopReason,
}

fn mse_of(net: &Network, inputs: &[[f64; IN]], targets: &[[f64; OUT]]) -> f64 {
    let mut s = 0.0;
    for (x, t) in inputs.iter().zip(targets) {
        let y = net.forward(x);
        for k in 0..OUT {
            s += (y[k] - t[k]).powi(2);
        }
    }
    s / (OUT * inputs.len()) as f64
}

/// Levenberg-Marquardt minimization of the output MSE.
pub fn train_lm(
    net: &Network,
    inputs: &[[f64; IN]],
    targets: &[[f64; OUT]],
    cfg: &TrainConfig,
) -> Result<TrainOutcome> {
    if inputs.is_empty() || inputs.len() != targets.len() {
        return Err(Error::InvalidParameter(format!(
            "training set needs matching non-empty inputs and targets ({} vs {})",
            inputs.len(),
            targets.len()
        )));
    }
    let n_res = OUT * inputs.len();
    let mut net = net.clone();
    let mut loss = mse_of(&net, inputs, targets);
    if !loss.is_finite() {
        return Err(Error::TrainingDiverged { epochs: 0 });
    }
    let mut history = vec![loss];
    let mut lambda = cfg.lambda_init;
    let mut jac = DMatrix::<f64>::zeros(n_res, PARAM_COUNT);
    let mut res = DVector::<f64>::zeros(n_res);
    let mut epochs = 0;
    let stop = loop {
        if loss <= cfg.goal_mse {
            break StopReason::Goal;
        }
        if epochs >= cfg.max_epochs {
            break StopReason::MaxEpochs;
        }
        for (s, (x, t)) in inputs.iter().zip(targets).enumerate() {
            let (y, rows) = net.jacobian(x);
            for k in 0..OUT {
                let r = OUT * s + k;
                res[r] = y[k] - t[k];
                for (q, v) in rows[k].iter().enumerate() {
                    jac[(r, q)] = *v;
                }
            }
        }
        // Explicit transpose so the product goes through the blocked gemm kernel.
        let jt = jac.transpose();
        let jtj = &jt * &jac;
        let grad = &jt * &res;
        let mut accepted = false;
        while lambda <= cfg.lambda_max {
            let mut damped = jtj.clone();
            for d in 0..PARAM_COUNT {
                damped[(d, d)] += lambda;
            }
            let step = match damped.cholesky() {
                Some(ch) => ch.solve(&grad),
                None => {
                    lambda *= cfg.lambda_increase;
                    continue;
                }
            };
            let candidate = Network {
                params: net.params.iter().zip(step.iter()).map(|(p, s)| p - s).collect(),
                gain: net.gain,
            };
            let new_loss = mse_of(&candidate, inputs, targets);
            if new_loss.is_finite() && new_loss < loss {
                net = candidate;
                loss = new_loss;
                lambda *= cfg.lambda_decrease;
                accepted = true;
                break;
            }
            lambda *= cfg.lambda_increase;
        }
        if !accepted {
            break StopReason::LambdaLimit;
        }
        epochs += 1;
        history.push(loss);
    };
    Ok(TrainOutcome {
        net,
        epochs,
        history,
        stop,
    })
}

/// Per-channel z-score parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Standardizer {
    mean: [f64; IN],
    std: [f64; IN],
}

impl Standardizer {
    pub fn fit(xs: &[[f64; IN]]) -> Self {
        let n = xs.len().max(1) as f64;
        let mut mean = [0.0; IN];
        let mut std = [0.0; IN];
        for x in xs {
            for m in 0..IN {
                mean[m] += x[m] / n;
            }
        }
        for x in xs {
            for m in 0..IN {
                std[m] += (x[m] - mean[m]).powi(2) / n;
            }
        }
        for s in std.iter_mut() {
            *s = if *s > 0.0 { s.sqrt() } else { 1.0 };
        }
        Self { mean, std }
    }

    pub fn apply(&self, x: &[f64; IN]) -> [f64; IN] {
        let mut out = [0.0; IN];
        for m in 0..IN {
            out[m] = (x[m] - self.mean[m]) / self.std[m];
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtractConfig {
    pub train: TrainConfig,
    pub seed: u64,
}

impl Default for ExtractConfig {
    fn default() -> Self {
        Self {
            train: TrainConfig::default(),
            seed: 0x5eed,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Half {
    Top,
    Bottom,
    Left,
    Right,
}

impl Half {
    fn contains(self, i: usize, j: usize, rows: usize, cols: usize) -> bool {
        match self {
            Half::Top => i < rows / 2,
            Half::Bottom => i >= rows / 2,
            Half::Left => j < cols / 2,
            Half::Right => j >= cols / 2,
        }
    }

    fn opposite(self) -> Half {
        match self {
            Half::Top => Half::Bottom,
            Half::Bottom => Half::Top,
            Half::Left => Half::Right,
            Half::Right => Half::Left,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunSummary {
    pub train_on: Half,
    pub epochs: usize,
    pub final_mse: f64,
    pub stop: Option<StopReason>,
    pub fallback: bool,
}

#[derive(Clone, Debug)]
pub struct Extraction {
    pub bits: BitMatrix,
    pub runs: Vec<RunSummary>,
}

fn one_hot(bit: bool) -> [f64; OUT] {
    if bit {
        [0.0, 1.0]
    } else {
        [1.0, 0.0]
    }
}

fn run_half(
    feats: &[[f64; IN]],
    w: &BitMatrix,
    rows: usize,
    cols: usize,
    half: Half,
    seed: u64,
    train: &TrainConfig,
) -> (Vec<usize>, Vec<[f64; OUT]>, RunSummary) {
    let mut train_idx = Vec::new();
    let mut test_idx = Vec::new();
    for i in 0..rows {
        for j in 0..cols {
            if half.contains(i, j, rows, cols) {
                train_idx.push(i * cols + j);
            } else if half.opposite().contains(i, j, rows, cols) {
                test_idx.push(i * cols + j);
            }
        }
    }
    let raw: Vec<[f64; IN]> = train_idx.iter().map(|&b| feats[b]).collect();
    let z = Standardizer::fit(&raw);
    let inputs: Vec<[f64; IN]> = raw.iter().map(|x| z.apply(x)).collect();
    let targets: Vec<[f64; OUT]> = train_idx.iter().map(|&b| one_hot(w.as_slice()[b] == 1)).collect();
    match train_lm(&Network::random(seed), &inputs, &targets, train) {
        Ok(outcome) => {
            let outputs = test_idx.iter().map(|&b| outcome.net.forward(&z.apply(&feats[b]))).collect();
            let summary = RunSummary {
                train_on: half,
                epochs: outcome.epochs,
                final_mse: *outcome.history.last().unwrap_or(&f64::NAN),
                stop: Some(outcome.stop),
                fallback: false,
            };
            (test_idx, outputs, summary)
        }
        Err(e) => {
            log::warn!("training on {half:?} half failed ({e}); thresholding DC instead");
            let mu = raw.iter().map(|x| x[0]).sum::<f64>() / raw.len() as f64;
            let outputs = test_idx.iter().map(|&b| one_hot(feats[b][0] > mu)).collect();
            let summary = RunSummary {
                train_on: half,
                epochs: 0,
                final_mse: f64::NAN,
                stop: None,
                fallback: true,
            };
            (test_idx, outputs, summary)
        }
    }
}

/// Recover the watermark from the detail band of a (registered) luminance.
///
/// Four networks are trained on the top, bottom, left and right halves using
/// the receiver-regenerated watermark as labels; each predicts the opposite
/// half. Every block therefore gets two predictions, which are averaged.
pub fn extract_watermark(cd: &Plane, w: &BitMatrix, cfg: &ExtractConfig) -> Result<Extraction> {
    let (rows, cols) = (cd.height() / 2, cd.width() / 2);
    if w.dims() != (rows, cols) || rows < 2 || cols < 2 {
        return Err(Error::DimensionMismatch {
            left: w.dims(),
            right: (rows, cols),
        });
    }
    let feats = cd_block_features(cd)?;
    let halves = [Half::Top, Half::Bottom, Half::Left, Half::Right];
    // the four runs are independent; each gets its own seed and thread
    let results: Vec<(Vec<usize>, Vec<[f64; OUT]>, RunSummary)> = std::thread::scope(|scope| {
        let handles: Vec<_> = halves
            .into_iter()
            .enumerate()
            .map(|(run, half)| {
                let feats = &feats;
                scope.spawn(move || run_half(feats, w, rows, cols, half, cfg.seed.wrapping_add(run as u64), &cfg.train))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("training thread panicked")).collect()
    });
    let mut votes = vec![[0.0; OUT]; rows * cols];
    let mut runs = Vec::with_capacity(4);
    for (test_idx, outputs, summary) in results {
        for (&b, y) in test_idx.iter().zip(&outputs) {
            votes[b][0] += y[0];
            votes[b][1] += y[1];
        }
        runs.push(summary);
    }
    let bits = BitMatrix::from_fn(rows, cols, |i, j| {
        let v = votes[i * cols + j];
        v[1] > v[0]
    });
    Ok(Extraction { bits, runs })
}
