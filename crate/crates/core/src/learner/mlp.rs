//! Fully connected Q-network: rectified hidden layers, linear output with one
//! Q-value per action.

use rand::Rng;

use super::LearnerError;
use crate::engine::Action;

/// All parameters live in one flat vector. Layer `l` stores its weight matrix
/// (`dims[l+1]` rows by `dims[l]` columns, row-major) followed by its bias.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    dims: Vec<usize>,
    params: Vec<f64>,
}

/// One regression example for the TD loss: only output `action` is fitted.
#[derive(Debug, Clone, Copy)]
pub struct Sample<'a> {
    pub input: &'a [f64],
    pub action: Action,
    pub target: f64,
}

pub const N_ACTIONS: usize = 2;

impl Mlp {
    pub fn zeros(dims: &[usize]) -> Result<Mlp, LearnerError> {
        if dims.len() < 2 || dims.iter().any(|&d| d == 0) {
            return Err(LearnerError::BadDims(dims.to_vec()));
        }
        if *dims.last().unwrap() != N_ACTIONS {
            return Err(LearnerError::BadDims(dims.to_vec()));
        }
        let n = dims.windows(2).map(|w| w[1] * w[0] + w[1]).sum();
        Ok(Mlp { dims: dims.to_vec(), params: vec![0.0; n] })
    }

    /// He-uniform weights, zero biases.
    pub fn random<R: Rng + ?Sized>(dims: &[usize], rng: &mut R) -> Result<Mlp, LearnerError> {
        let mut mlp = Mlp::zeros(dims)?;
        for l in 0..mlp.n_layers() {
            let fan_in = mlp.dims[l];
            let bound = (6.0 / fan_in as f64).sqrt();
            let (w, _) = mlp.layer_mut(l);
            for x in w.iter_mut() {
                *x = rng.random_range(-bound..bound);
            }
        }
        Ok(mlp)
    }

    pub fn from_parts(dims: Vec<usize>, params: Vec<f64>) -> Result<Mlp, LearnerError> {
        let shape = Mlp::zeros(&dims)?;
        if shape.params.len() != params.len() {
            return Err(LearnerError::ShapeMismatch { expected: shape.params.len(), got: params.len() });
        }
        Ok(Mlp { dims, params })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn input_dim(&self) -> usize {
        self.dims[0]
    }

    pub fn n_layers(&self) -> usize {
        self.dims.len() - 1
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    fn offset(&self, layer: usize) -> usize {
        self.dims[..=layer].windows(2).map(|w| w[1] * w[0] + w[1]).sum()
    }

    /// (weights, bias) of layer `l`.
    pub fn layer(&self, l: usize) -> (&[f64], &[f64]) {
        let start = self.offset(l);
        let (n_in, n_out) = (self.dims[l], self.dims[l + 1]);
        let (w, rest) = self.params[start..].split_at(n_in * n_out);
        (w, &rest[..n_out])
    }

    pub fn layer_mut(&mut self, l: usize) -> (&mut [f64], &mut [f64]) {
        let start = self.offset(l);
        let (n_in, n_out) = (self.dims[l], self.dims[l + 1]);
        let (w, rest) = self.params[start..].split_at_mut(n_in * n_out);
        (w, &mut rest[..n_out])
    }

    fn check_input(&self, x: &[f64]) -> Result<(), LearnerError> {
        if x.len() != self.dims[0] {
            return Err(LearnerError::ShapeMismatch { expected: self.dims[0], got: x.len() });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(LearnerError::NonFinite("network input"));
        }
        Ok(())
    }

    pub fn forward(&self, x: &[f64]) -> Result<[f64; N_ACTIONS], LearnerError> {
        self.check_input(x)?;
        let mut acts = Vec::with_capacity(self.n_layers() + 1);
        self.forward_into(x, &mut acts);
        let out = acts.last().unwrap();
        Ok([out[0], out[1]])
    }

    /// Fills `acts` with the input followed by each layer's post-activation output.
    fn forward_into(&self, x: &[f64], acts: &mut Vec<Vec<f64>>) {
        acts.clear();
        acts.push(x.to_vec());
        let last = self.n_layers() - 1;
        for l in 0..self.n_layers() {
            let (w, b) = self.layer(l);
            let input = &acts[l];
            let n_in = self.dims[l];
            let mut out: Vec<f64> = b.to_vec();
            for (o, row) in out.iter_mut().zip(w.chunks_exact(n_in)) {
                *o += dot(row, input);
                if l != last && *o < 0.0 {
                    *o = 0.0;
                }
            }
            acts.push(out);
        }
    }

    /// Gradient of `(1/B) * sum (Q(s, a) - target)^2` with respect to every
    /// parameter, plus the loss itself.
    pub fn gradient(&self, batch: &[Sample<'_>]) -> Result<(Vec<f64>, f64), LearnerError> {
        if batch.is_empty() {
            return Err(LearnerError::EmptyBatch);
        }
        let mut grad = vec![0.0; self.params.len()];
        let mut loss = 0.0;
        let scale = 1.0 / batch.len() as f64;
        let mut acts = Vec::with_capacity(self.n_layers() + 1);
        let offsets: Vec<usize> = (0..self.n_layers()).map(|l| self.offset(l)).collect();
        for sample in batch {
            self.check_input(sample.input)?;
            if !sample.target.is_finite() {
                return Err(LearnerError::NonFinite("TD target"));
            }
            self.forward_into(sample.input, &mut acts);
            let a = sample.action.index();
            let err = acts.last().unwrap()[a] - sample.target;
            loss += scale * err * err;

            let mut delta = vec![0.0; N_ACTIONS];
            delta[a] = 2.0 * scale * err;
            for l in (0..self.n_layers()).rev() {
                let (n_in, n_out) = (self.dims[l], self.dims[l + 1]);
                let input = &acts[l];
                let (w, _) = self.layer(l);
                let off = offsets[l];
                let (gw, gb) = grad[off..off + n_in * n_out + n_out].split_at_mut(n_in * n_out);
                for j in 0..n_out {
                    let d = delta[j];
                    if d == 0.0 {
                        continue;
                    }
                    gb[j] += d;
                    for (g, x) in gw[j * n_in..(j + 1) * n_in].iter_mut().zip(input) {
                        *g += d * x;
                    }
                }
                if l > 0 {
                    let mut prev = vec![0.0; n_in];
                    for j in 0..n_out {
                        let d = delta[j];
                        if d == 0.0 {
                            continue;
                        }
                        for (p, wji) in prev.iter_mut().zip(&w[j * n_in..(j + 1) * n_in]) {
                            *p += wji * d;
                        }
                    }
                    // rectifier derivative; acts[l] holds the rectified output of layer l-1
                    for (p, h) in prev.iter_mut().zip(input) {
                        if *h <= 0.0 {
                            *p = 0.0;
                        }
                    }
                    delta = prev;
                }
            }
        }
        Ok((grad, loss))
    }
}

/// Dot product with four independent accumulators so the loop vectorizes.
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0; 4];
    let (ca, cb) = (a.chunks_exact(4), b.chunks_exact(4));
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    for (x, y) in ca.zip(cb) {
        for k in 0..4 {
            acc[k] += x[k] * y[k];
        }
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}
