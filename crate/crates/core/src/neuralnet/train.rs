//! Adam training loop with the halving learning-rate schedule, early
//! stopping with best-weight restore, and hyperparameter grid search.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{make_windows, Segment, TimeSeriesSet, WindowSpec};
use crate::error::{Error, Result};
use crate::neuralnet::{NetworkKind, NetworkModel};

/// Training protocol parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainConfig {
    /// Initial learning rate; epoch e uses lr0 * 0.5^(e-1).
    pub lr0: f64,
    pub max_epochs: usize,
    /// Early-stopping patience in epochs without validation improvement.
    pub patience: usize,
    pub batch_size: usize,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            lr0: 0.002,
            max_epochs: 100,
            patience: 10,
            batch_size: 32,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn learning_rate(&self, epoch: usize) -> f64 {
        self.lr0 * 0.5_f64.powi(epoch as i32 - 1)
    }
}

/// Per-epoch loss trace and the epoch whose weights were kept.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct TrainHistory {
    pub train_loss: Vec<f64>,
    pub val_loss: Vec<f64>,
    pub best_epoch: usize,
}

struct Adam {
    m: Vec<Vec<Vec<f64>>>,
    v: Vec<Vec<Vec<f64>>>,
    t: f64,
}

impl Adam {
    fn new(model: &NetworkModel) -> Self {
        Adam {
            m: model.grad_buffer(),
            v: model.grad_buffer(),
            t: 0.0,
        }
    }

    fn step(&mut self, model: &mut NetworkModel, grads: &[Vec<Vec<f64>>], cfg: &TrainConfig, lr: f64) {
        self.t += 1.0;
        let bc1 = 1.0 - cfg.beta1.powf(self.t);
        let bc2 = 1.0 - cfg.beta2.powf(self.t);
        for (layer_idx, frozen) in model.frozen.clone().into_iter().enumerate() {
            if frozen {
                continue;
            }
            for (chunk_idx, chunk) in model.layers[layer_idx]
                .param_chunks_mut()
                .into_iter()
                .enumerate()
            {
                let g = &grads[layer_idx][chunk_idx];
                let m = &mut self.m[layer_idx][chunk_idx];
                let v = &mut self.v[layer_idx][chunk_idx];
                for k in 0..chunk.len() {
                    m[k] = cfg.beta1 * m[k] + (1.0 - cfg.beta1) * g[k];
                    v[k] = cfg.beta2 * v[k] + (1.0 - cfg.beta2) * g[k] * g[k];
                    let m_hat = m[k] / bc1;
                    let v_hat = v[k] / bc2;
                    chunk[k] -= lr * m_hat / (v_hat.sqrt() + cfg.eps);
                }
            }
        }
    }
}

/// Train in place with Adam and the halving schedule; keeps the parameters
/// from the best validation epoch (best training epoch when no validation
/// data is given). Deterministic for a fixed seed.
pub fn train(
    model: &mut NetworkModel,
    train_inputs: &[Vec<f64>],
    train_targets: &[f64],
    val_inputs: &[Vec<f64>],
    val_targets: &[f64],
    cfg: &TrainConfig,
) -> Result<TrainHistory> {
    if train_inputs.is_empty() {
        return Err(Error::Precondition("empty training batch".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut adam = Adam::new(model);
    let mut history = TrainHistory::default();
    let mut best_loss = f64::INFINITY;
    let mut best_params = model.snapshot();
    let mut stall = 0usize;
    let mut indices: Vec<usize> = (0..train_inputs.len()).collect();
    let batch_size = cfg.batch_size.max(1);

    for epoch in 1..=cfg.max_epochs {
        let lr = cfg.learning_rate(epoch);
        indices.shuffle(&mut rng);
        let mut grads = model.grad_buffer();
        for chunk in indices.chunks(batch_size) {
            let inputs: Vec<Vec<f64>> = chunk.iter().map(|&i| train_inputs[i].clone()).collect();
            let targets: Vec<f64> = chunk.iter().map(|&i| train_targets[i]).collect();
            for layer in grads.iter_mut() {
                for c in layer.iter_mut() {
                    c.iter_mut().for_each(|g| *g = 0.0);
                }
            }
            let loss = model.loss_and_grads(&inputs, &targets, &mut grads, Some(&mut rng));
            if !loss.is_finite() {
                return Err(Error::Divergence(format!(
                    "NaN loss at epoch {epoch} (lr {lr:.2e})"
                )));
            }
            adam.step(model, &grads, cfg, lr);
        }

        let train_loss = model.mse(train_inputs, train_targets)?;
        if !train_loss.is_finite() {
            return Err(Error::Divergence(format!("NaN training loss at epoch {epoch}")));
        }
        let monitored = if val_inputs.is_empty() {
            history.train_loss.push(train_loss);
            history.val_loss.push(f64::NAN);
            train_loss
        } else {
            let val_loss = model.mse(val_inputs, val_targets)?;
            history.train_loss.push(train_loss);
            history.val_loss.push(val_loss);
            val_loss
        };

        if monitored < best_loss {
            best_loss = monitored;
            best_params = model.snapshot();
            history.best_epoch = epoch;
            stall = 0;
        } else {
            stall += 1;
            if stall >= cfg.patience {
                break;
            }
        }
    }
    model.restore(&best_params);
    Ok(history)
}

/// One hyperparameter grid cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub input_len: usize,
    pub layers: usize,
    pub nodes: usize,
    pub dropout: f64,
    pub batch_size: usize,
}

/// Search space for stage-one architectures.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HyperGrid {
    pub input_len: Vec<usize>,
    pub layers: Vec<usize>,
    pub nodes: Vec<usize>,
    pub dropout: Vec<f64>,
    pub batch_size: Vec<usize>,
}

impl HyperGrid {
    /// The full stage-one search space.
    pub fn standard(kind: NetworkKind) -> HyperGrid {
        HyperGrid {
            input_len: vec![12, 24],
            layers: vec![1, 2],
            nodes: vec![4, 8, 16],
            // Dropout applies to the recurrent architecture only.
            dropout: match kind {
                NetworkKind::Mlp => vec![0.0],
                NetworkKind::Lstm => vec![0.2, 0.5],
            },
            batch_size: vec![32, 64],
        }
    }

    /// A single-cell grid, useful for fixed-architecture runs.
    pub fn singleton(cell: GridCell) -> HyperGrid {
        HyperGrid {
            input_len: vec![cell.input_len],
            layers: vec![cell.layers],
            nodes: vec![cell.nodes],
            dropout: vec![cell.dropout],
            batch_size: vec![cell.batch_size],
        }
    }

    pub fn cells(&self) -> Vec<GridCell> {
        let mut out = Vec::new();
        for &input_len in &self.input_len {
            for &layers in &self.layers {
                for &nodes in &self.nodes {
                    for &dropout in &self.dropout {
                        for &batch_size in &self.batch_size {
                            out.push(GridCell {
                                input_len,
                                layers,
                                nodes,
                                dropout,
                                batch_size,
                            });
                        }
                    }
                }
            }
        }
        out
    }
}

/// Grid-search outcome: the winning model plus the full evaluation table.
#[derive(Debug)]
pub struct GridResult {
    pub best_cell: GridCell,
    pub best_model: NetworkModel,
    pub best_val_loss: f64,
    /// Every evaluated (cell, validation loss).
    pub table: Vec<(GridCell, f64)>,
}

/// Build a network for one grid cell.
pub fn build_cell(kind: NetworkKind, cell: &GridCell, seed: u64) -> Result<NetworkModel> {
    match kind {
        NetworkKind::Mlp => NetworkModel::mlp(cell.input_len, cell.layers, cell.nodes, seed),
        NetworkKind::Lstm => {
            NetworkModel::lstm(cell.input_len, cell.layers, cell.nodes, cell.dropout, seed)
        }
    }
}

/// Train every grid cell on the set's training windows and keep the cell
/// with the lowest validation loss.
pub fn grid_search(
    kind: NetworkKind,
    grid: &HyperGrid,
    set: &TimeSeriesSet,
    cfg: &TrainConfig,
) -> Result<GridResult> {
    let cells = grid.cells();
    if cells.is_empty() {
        return Err(Error::Config("empty hyperparameter grid".into()));
    }
    let mut table = Vec::with_capacity(cells.len());
    let mut best: Option<(f64, GridCell, NetworkModel)> = None;
    for cell in cells {
        let spec = WindowSpec::new(cell.input_len)?;
        let train_batch = make_windows(set, spec, Segment::Train)?;
        let val_batch = make_windows(set, spec, Segment::Validation)?;
        if train_batch.is_empty() || val_batch.is_empty() {
            return Err(Error::Precondition(format!(
                "no training or validation windows for input length {}",
                cell.input_len
            )));
        }
        let mut model = build_cell(kind, &cell, cfg.seed)?;
        let cell_cfg = TrainConfig {
            batch_size: cell.batch_size,
            ..cfg.clone()
        };
        train(
            &mut model,
            &train_batch.inputs,
            &train_batch.targets,
            &val_batch.inputs,
            &val_batch.targets,
            &cell_cfg,
        )?;
        let val_loss = model.mse(&val_batch.inputs, &val_batch.targets)?;
        table.push((cell, val_loss));
        if best.as_ref().map_or(true, |(b, _, _)| val_loss < *b) {
            best = Some((val_loss, cell, model));
        }
    }
    let (best_val_loss, best_cell, best_model) = best.unwrap();
    Ok(GridResult {
        best_cell,
        best_model,
        best_val_loss,
        table,
    })
}
