//! Layer implementations with explicit forward caches and backward passes.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Dense layer, optionally with tanh activation. Weights are row-major
/// `out_dim x in_dim`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DenseLayer {
    pub w: Vec<f64>,
    pub b: Vec<f64>,
    pub in_dim: usize,
    pub out_dim: usize,
    pub tanh: bool,
}

/// LSTM layer over a sequence of `seq_len` steps of `in_dim` features.
/// Gate weights are stacked [i, f, g, o], each block `hidden` rows.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LstmLayer {
    pub wx: Vec<f64>, // 4H x in_dim
    pub wh: Vec<f64>, // 4H x H
    pub b: Vec<f64>,  // 4H
    pub in_dim: usize,
    pub hidden: usize,
    pub return_sequence: bool,
}

/// Concrete layers of a network.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum Layer {
    Dense(DenseLayer),
    Lstm(LstmLayer),
    Dropout { rate: f64 },
    /// Adds the network's raw input window to the current activation
    /// (widths must match).
    AddInput,
}

/// Per-layer forward cache consumed by the backward pass.
pub enum LayerCache {
    Dense {
        input: Vec<f64>,
        output: Vec<f64>,
    },
    Lstm {
        input: Vec<f64>,
        steps: Vec<LstmStep>,
    },
    Dropout {
        mask: Option<Vec<f64>>,
    },
    AddInput,
}

/// Saved LSTM gate activations for one timestep.
pub struct LstmStep {
    pub h_prev: Vec<f64>,
    pub c_prev: Vec<f64>,
    pub i: Vec<f64>,
    pub f: Vec<f64>,
    pub g: Vec<f64>,
    pub o: Vec<f64>,
    pub c: Vec<f64>,
    pub tanh_c: Vec<f64>,
}

/// Gradients for one layer, chunked in the same order as
/// [`Layer::param_chunks`].
pub type LayerGrads = Vec<Vec<f64>>;

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn glorot(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Vec<f64> {
    let bound = (6.0 / (rows + cols) as f64).sqrt();
    (0..rows * cols)
        .map(|_| rng.gen::<f64>() * 2.0 * bound - bound)
        .collect()
}

impl DenseLayer {
    pub fn new(in_dim: usize, out_dim: usize, tanh: bool, rng: &mut ChaCha8Rng) -> Self {
        DenseLayer {
            w: glorot(rng, out_dim, in_dim),
            b: vec![0.0; out_dim],
            in_dim,
            out_dim,
            tanh,
        }
    }

    /// Dense layer initialized to the zero map, so it contributes nothing
    /// until trained.
    pub fn zeroed(in_dim: usize, out_dim: usize) -> Self {
        DenseLayer {
            w: vec![0.0; out_dim * in_dim],
            b: vec![0.0; out_dim],
            in_dim,
            out_dim,
            tanh: false,
        }
    }

    fn forward(&self, input: &[f64]) -> (Vec<f64>, LayerCache) {
        debug_assert_eq!(input.len(), self.in_dim);
        let mut out = Vec::with_capacity(self.out_dim);
        for r in 0..self.out_dim {
            let mut v = self.b[r];
            let row = &self.w[r * self.in_dim..(r + 1) * self.in_dim];
            for (wi, xi) in row.iter().zip(input.iter()) {
                v += wi * xi;
            }
            out.push(if self.tanh { v.tanh() } else { v });
        }
        let cache = LayerCache::Dense {
            input: input.to_vec(),
            output: out.clone(),
        };
        (out, cache)
    }

    fn backward(&self, cache: &LayerCache, d_out: &[f64]) -> (LayerGrads, Vec<f64>) {
        let (input, output) = match cache {
            LayerCache::Dense { input, output } => (input, output),
            _ => unreachable!("dense backward with wrong cache"),
        };
        let mut dw = vec![0.0; self.w.len()];
        let mut db = vec![0.0; self.b.len()];
        let mut d_in = vec![0.0; self.in_dim];
        for r in 0..self.out_dim {
            let dpre = if self.tanh {
                d_out[r] * (1.0 - output[r] * output[r])
            } else {
                d_out[r]
            };
            db[r] = dpre;
            let row = r * self.in_dim;
            for c in 0..self.in_dim {
                dw[row + c] = dpre * input[c];
                d_in[c] += self.w[row + c] * dpre;
            }
        }
        (vec![dw, db], d_in)
    }
}

impl LstmLayer {
    pub fn new(in_dim: usize, hidden: usize, return_sequence: bool, rng: &mut ChaCha8Rng) -> Self {
        let mut b = vec![0.0; 4 * hidden];
        // Forget-gate bias starts at 1 so early training does not erase state.
        for v in b[hidden..2 * hidden].iter_mut() {
            *v = 1.0;
        }
        LstmLayer {
            wx: glorot(rng, 4 * hidden, in_dim),
            wh: glorot(rng, 4 * hidden, hidden),
            b,
            in_dim,
            hidden,
            return_sequence,
        }
    }

    fn forward(&self, input: &[f64]) -> (Vec<f64>, LayerCache) {
        let h = self.hidden;
        debug_assert_eq!(input.len() % self.in_dim, 0);
        let seq_len = input.len() / self.in_dim;
        let mut h_t = vec![0.0; h];
        let mut c_t = vec![0.0; h];
        let mut steps = Vec::with_capacity(seq_len);
        let mut seq_out = if self.return_sequence {
            Vec::with_capacity(seq_len * h)
        } else {
            Vec::new()
        };
        for t in 0..seq_len {
            let x_t = &input[t * self.in_dim..(t + 1) * self.in_dim];
            let mut gates = self.b.clone();
            for r in 0..4 * h {
                let mut v = 0.0;
                let wx_row = &self.wx[r * self.in_dim..(r + 1) * self.in_dim];
                for (wi, xi) in wx_row.iter().zip(x_t.iter()) {
                    v += wi * xi;
                }
                let wh_row = &self.wh[r * h..(r + 1) * h];
                for (wi, hi) in wh_row.iter().zip(h_t.iter()) {
                    v += wi * hi;
                }
                gates[r] += v;
            }
            let mut step = LstmStep {
                h_prev: h_t.clone(),
                c_prev: c_t.clone(),
                i: vec![0.0; h],
                f: vec![0.0; h],
                g: vec![0.0; h],
                o: vec![0.0; h],
                c: vec![0.0; h],
                tanh_c: vec![0.0; h],
            };
            for j in 0..h {
                step.i[j] = sigmoid(gates[j]);
                step.f[j] = sigmoid(gates[h + j]);
                step.g[j] = gates[2 * h + j].tanh();
                step.o[j] = sigmoid(gates[3 * h + j]);
                step.c[j] = step.f[j] * c_t[j] + step.i[j] * step.g[j];
                step.tanh_c[j] = step.c[j].tanh();
                h_t[j] = step.o[j] * step.tanh_c[j];
            }
            c_t.copy_from_slice(&step.c);
            if self.return_sequence {
                seq_out.extend_from_slice(&h_t);
            }
            steps.push(step);
        }
        let out = if self.return_sequence { seq_out } else { h_t };
        let cache = LayerCache::Lstm {
            input: input.to_vec(),
            steps,
        };
        (out, cache)
    }

    fn backward(&self, cache: &LayerCache, d_out: &[f64]) -> (LayerGrads, Vec<f64>) {
        let (input, steps) = match cache {
            LayerCache::Lstm { input, steps } => (input, steps),
            _ => unreachable!("lstm backward with wrong cache"),
        };
        let h = self.hidden;
        let seq_len = steps.len();
        let mut dwx = vec![0.0; self.wx.len()];
        let mut dwh = vec![0.0; self.wh.len()];
        let mut db = vec![0.0; self.b.len()];
        let mut d_input = vec![0.0; input.len()];
        let mut dh_next = vec![0.0; h];
        let mut dc_next = vec![0.0; h];
        let mut dgates = vec![0.0; 4 * h];
        for t in (0..seq_len).rev() {
            let step = &steps[t];
            let x_t = &input[t * self.in_dim..(t + 1) * self.in_dim];
            for j in 0..h {
                let mut dh = dh_next[j];
                if self.return_sequence {
                    dh += d_out[t * h + j];
                } else if t == seq_len - 1 {
                    dh += d_out[j];
                }
                let d_o = dh * step.tanh_c[j];
                let dc = dh * step.o[j] * (1.0 - step.tanh_c[j] * step.tanh_c[j]) + dc_next[j];
                let d_i = dc * step.g[j];
                let d_f = dc * step.c_prev[j];
                let d_g = dc * step.i[j];
                dgates[j] = d_i * step.i[j] * (1.0 - step.i[j]);
                dgates[h + j] = d_f * step.f[j] * (1.0 - step.f[j]);
                dgates[2 * h + j] = d_g * (1.0 - step.g[j] * step.g[j]);
                dgates[3 * h + j] = d_o * step.o[j] * (1.0 - step.o[j]);
                dc_next[j] = dc * step.f[j];
            }
            for j in 0..h {
                dh_next[j] = 0.0;
            }
            for r in 0..4 * h {
                let dg = dgates[r];
                if dg == 0.0 {
                    continue;
                }
                let wx_row = r * self.in_dim;
                for cidx in 0..self.in_dim {
                    dwx[wx_row + cidx] += dg * x_t[cidx];
                    d_input[t * self.in_dim + cidx] += self.wx[wx_row + cidx] * dg;
                }
                let wh_row = r * h;
                for cidx in 0..h {
                    dwh[wh_row + cidx] += dg * step.h_prev[cidx];
                    dh_next[cidx] += self.wh[wh_row + cidx] * dg;
                }
                db[r] += dg;
            }
        }
        (vec![dwx, dwh, db], d_input)
    }
}

impl Layer {
    /// Output width given an input of `in_width` (sequence layers flatten
    /// their hidden sequence).
    pub fn out_width(&self, in_width: usize) -> usize {
        match self {
            Layer::Dense(d) => d.out_dim,
            Layer::Lstm(l) => {
                if l.return_sequence {
                    (in_width / l.in_dim) * l.hidden
                } else {
                    l.hidden
                }
            }
            Layer::Dropout { .. } | Layer::AddInput => in_width,
        }
    }

    pub fn is_parameterized(&self) -> bool {
        matches!(self, Layer::Dense(_) | Layer::Lstm(_))
    }

    pub fn param_chunks(&self) -> Vec<&[f64]> {
        match self {
            Layer::Dense(d) => vec![&d.w, &d.b],
            Layer::Lstm(l) => vec![&l.wx, &l.wh, &l.b],
            _ => Vec::new(),
        }
    }

    pub fn param_chunks_mut(&mut self) -> Vec<&mut Vec<f64>> {
        match self {
            Layer::Dense(d) => vec![&mut d.w, &mut d.b],
            Layer::Lstm(l) => vec![&mut l.wx, &mut l.wh, &mut l.b],
            _ => Vec::new(),
        }
    }

    /// Forward one sample. `x_input` is the network's raw input (used by
    /// [`Layer::AddInput`]); `rng` drives dropout and is `None` at inference.
    pub fn forward(
        &self,
        input: &[f64],
        x_input: &[f64],
        rng: Option<&mut ChaCha8Rng>,
    ) -> (Vec<f64>, LayerCache) {
        match self {
            Layer::Dense(d) => d.forward(input),
            Layer::Lstm(l) => l.forward(input),
            Layer::Dropout { rate } => match rng {
                Some(rng) if *rate > 0.0 => {
                    let keep = 1.0 - rate;
                    let mask: Vec<f64> = input
                        .iter()
                        .map(|_| if rng.gen::<f64>() < keep { 1.0 / keep } else { 0.0 })
                        .collect();
                    let out = input.iter().zip(mask.iter()).map(|(x, m)| x * m).collect();
                    (out, LayerCache::Dropout { mask: Some(mask) })
                }
                _ => (input.to_vec(), LayerCache::Dropout { mask: None }),
            },
            Layer::AddInput => {
                debug_assert_eq!(input.len(), x_input.len());
                let out = input
                    .iter()
                    .zip(x_input.iter())
                    .map(|(a, b)| a + b)
                    .collect();
                (out, LayerCache::AddInput)
            }
        }
    }

    /// Backward one sample; returns parameter gradients and the gradient
    /// w.r.t. the layer input.
    pub fn backward(&self, cache: &LayerCache, d_out: &[f64]) -> (LayerGrads, Vec<f64>) {
        match self {
            Layer::Dense(d) => d.backward(cache, d_out),
            Layer::Lstm(l) => l.backward(cache, d_out),
            Layer::Dropout { .. } => {
                let d_in = match cache {
                    LayerCache::Dropout { mask: Some(mask) } => {
                        d_out.iter().zip(mask.iter()).map(|(d, m)| d * m).collect()
                    }
                    _ => d_out.to_vec(),
                };
                (Vec::new(), d_in)
            }
            Layer::AddInput => (Vec::new(), d_out.to_vec()),
        }
    }
}
