use std::path::Path;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::NnError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Tanh,
    Linear,
}

impl Activation {
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Tanh => z.tanh(),
            Activation::Linear => z,
        }
    }

    /// Derivative expressed through the activation's output.
    fn derivative_from_output(self, y: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - y * y,
            Activation::Linear => 1.0,
        }
    }
}

/// Fully connected network with flat parameter storage.
///
/// Layer `l` maps `sizes[l]` inputs to `sizes[l + 1]` outputs; its weights are stored
/// row-major (one row per output unit) followed by its biases. Hidden layers use
/// `hidden`, the last layer uses `output`.
#[derive(Clone, Debug, PartialEq)]
pub struct Mlp {
    sizes: Vec<usize>,
    hidden: Activation,
    output: Activation,
    params: Vec<f64>,
    version: u64,
}

/// Intermediates of one forward pass, consumed by [`Mlp::backward`].
#[derive(Clone, Debug)]
pub struct Cache {
    version: u64,
    /// Input of every layer followed by the network output.
    values: Vec<Vec<f64>>,
}

impl Cache {
    pub fn output(&self) -> &[f64] {
        self.values.last().map(Vec::as_slice).unwrap_or(&[])
    }
}

impl Mlp {
    /// All-zero network.
    pub fn zeros(sizes: &[usize], hidden: Activation, output: Activation) -> Result<Self, NnError> {
        if sizes.len() < 2 || sizes.contains(&0) {
            return Err(NnError::InvalidArchitecture(format!(
                "layer sizes {sizes:?} need at least two positive widths"
            )));
        }
        let count = sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum();
        Ok(Self {
            sizes: sizes.to_vec(),
            hidden,
            output,
            params: vec![0.0; count],
            version: 0,
        })
    }

    /// Orthogonal weights scaled by `hidden_gain` (hidden layers) and `output_gain`
    /// (last layer); zero biases.
    pub fn orthogonal<R: Rng + ?Sized>(
        sizes: &[usize],
        hidden: Activation,
        output: Activation,
        hidden_gain: f64,
        output_gain: f64,
        rng: &mut R,
    ) -> Result<Self, NnError> {
        let mut net = Self::zeros(sizes, hidden, output)?;
        let layers = net.layer_count();
        for l in 0..layers {
            let (rows, cols) = (sizes[l + 1], sizes[l]);
            let gain = if l + 1 == layers { output_gain } else { hidden_gain };
            let w = orthogonal_matrix(rows, cols, rng);
            let offset = net.layer_offset(l);
            for (dst, src) in net.params[offset..offset + rows * cols].iter_mut().zip(w) {
                *dst = gain * src;
            }
        }
        Ok(net)
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn input_len(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_len(&self) -> usize {
        *self.sizes.last().expect("at least two layers")
    }

    pub fn layer_count(&self) -> usize {
        self.sizes.len() - 1
    }

    pub fn activations(&self) -> (Activation, Activation) {
        (self.hidden, self.output)
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    /// Mutable parameters. Caches from earlier forward passes become stale.
    pub fn params_mut(&mut self) -> &mut [f64] {
        self.version += 1;
        &mut self.params
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    fn layer_offset(&self, layer: usize) -> usize {
        self.sizes[..layer + 1]
            .windows(2)
            .map(|w| w[0] * w[1] + w[1])
            .sum()
    }

    fn activation_of(&self, layer: usize) -> Activation {
        if layer + 1 == self.layer_count() {
            self.output
        } else {
            self.hidden
        }
    }

    fn check_input(&self, input: &[f64]) -> Result<(), NnError> {
        if input.len() != self.input_len() {
            return Err(NnError::ShapeError {
                expected: self.input_len(),
                found: input.len(),
            });
        }
        Ok(())
    }

    fn layer(&self, layer: usize, x: &[f64]) -> Vec<f64> {
        let (cols, rows) = (self.sizes[layer], self.sizes[layer + 1]);
        let offset = self.layer_offset(layer);
        let w = &self.params[offset..offset + rows * cols];
        let b = &self.params[offset + rows * cols..offset + rows * cols + rows];
        let act = self.activation_of(layer);
        w.chunks_exact(cols)
            .zip(b)
            .map(|(row, &bias)| {
                let z = row.iter().zip(x).map(|(wi, xi)| wi * xi).sum::<f64>() + bias;
                act.apply(z)
            })
            .collect()
    }

    pub fn predict(&self, input: &[f64]) -> Result<Vec<f64>, NnError> {
        self.check_input(input)?;
        let mut x = input.to_vec();
        for l in 0..self.layer_count() {
            x = self.layer(l, &x);
        }
        Ok(x)
    }

    pub fn forward(&self, input: &[f64]) -> Result<(Vec<f64>, Cache), NnError> {
        self.check_input(input)?;
        let mut values = Vec::with_capacity(self.sizes.len());
        values.push(input.to_vec());
        for l in 0..self.layer_count() {
            let next = self.layer(l, values.last().expect("non-empty"));
            values.push(next);
        }
        let out = values.last().expect("non-empty").clone();
        Ok((
            out,
            Cache {
                version: self.version,
                values,
            },
        ))
    }

    /// Gradients of `upstream · output` with respect to every parameter.
    pub fn backward(&self, cache: &Cache, upstream: &[f64]) -> Result<Vec<f64>, NnError> {
        let mut grads = vec![0.0; self.params.len()];
        self.backward_into(cache, upstream, &mut grads)?;
        Ok(grads)
    }

    /// Like [`Mlp::backward`] but adds into `grads`.
    pub fn backward_into(
        &self,
        cache: &Cache,
        upstream: &[f64],
        grads: &mut [f64],
    ) -> Result<(), NnError> {
        if cache.version != self.version || cache.values.len() != self.sizes.len() {
            return Err(NnError::CacheMismatch);
        }
        if upstream.len() != self.output_len() {
            return Err(NnError::ShapeError {
                expected: self.output_len(),
                found: upstream.len(),
            });
        }
        if grads.len() != self.params.len() {
            return Err(NnError::ShapeError {
                expected: self.params.len(),
                found: grads.len(),
            });
        }
        let mut delta: Vec<f64> = upstream.to_vec();
        for l in (0..self.layer_count()).rev() {
            let (cols, rows) = (self.sizes[l], self.sizes[l + 1]);
            let act = self.activation_of(l);
            let y = &cache.values[l + 1];
            for (d, &yi) in delta.iter_mut().zip(y) {
                *d *= act.derivative_from_output(yi);
            }
            let x = &cache.values[l];
            let offset = self.layer_offset(l);
            let (gw, rest) = grads[offset..].split_at_mut(rows * cols);
            for (r, &d) in delta.iter().enumerate() {
                if d != 0.0 {
                    for (g, &xi) in gw[r * cols..(r + 1) * cols].iter_mut().zip(x) {
                        *g += d * xi;
                    }
                }
                rest[r] += d;
            }
            if l > 0 {
                let w = &self.params[offset..offset + rows * cols];
                let mut below = vec![0.0; cols];
                for (r, &d) in delta.iter().enumerate() {
                    if d != 0.0 {
                        for (b, &wi) in below.iter_mut().zip(&w[r * cols..(r + 1) * cols]) {
                            *b += d * wi;
                        }
                    }
                }
                delta = below;
            }
        }
        Ok(())
    }

    /// FNV-1a over the parameter bit patterns, for cheap change audits.
    pub fn fingerprint(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for p in &self.params {
            for byte in p.to_bits().to_le_bytes() {
                h ^= u64::from(byte);
                h = h.wrapping_mul(0x0000_0100_0000_01b3);
            }
        }
        h
    }

    pub fn to_checkpoint(&self) -> Checkpoint {
        Checkpoint {
            format: CHECKPOINT_FORMAT.to_string(),
            version: CHECKPOINT_VERSION,
            layer_sizes: self.sizes.clone(),
            hidden: self.hidden,
            output: self.output,
            params: self.params.clone(),
        }
    }

    pub fn from_checkpoint(c: Checkpoint) -> Result<Self, NnError> {
        if c.format != CHECKPOINT_FORMAT || c.version != CHECKPOINT_VERSION {
            return Err(NnError::Checkpoint(format!(
                "unsupported checkpoint {} v{}",
                c.format, c.version
            )));
        }
        let mut net = Self::zeros(&c.layer_sizes, c.hidden, c.output)?;
        if c.params.len() != net.params.len() {
            return Err(NnError::Checkpoint(format!(
                "expected {} parameters, found {}",
                net.params.len(),
                c.params.len()
            )));
        }
        if c.params.iter().any(|p| !p.is_finite()) {
            return Err(NnError::Checkpoint("non-finite parameter".into()));
        }
        net.params = c.params;
        Ok(net)
    }

    pub fn save(&self, path: &Path) -> Result<(), NnError> {
        let text = serde_json::to_string(&self.to_checkpoint())
            .map_err(|e| NnError::Checkpoint(e.to_string()))?;
        std::fs::write(path, text).map_err(|e| NnError::Checkpoint(format!("{}: {e}", path.display())))
    }

    pub fn load(path: &Path) -> Result<Self, NnError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| NnError::Checkpoint(format!("{}: {e}", path.display())))?;
        let c: Checkpoint =
            serde_json::from_str(&text).map_err(|e| NnError::Checkpoint(e.to_string()))?;
        Self::from_checkpoint(c)
    }
}

pub const CHECKPOINT_FORMAT: &str = "odec-mlp";
pub const CHECKPOINT_VERSION: u32 = 1;

/// Text checkpoint: layer-size header plus the flat parameter vector.
/// Floats are written in shortest round-trip form, so save/load is bit-exact.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub version: u32,
    pub layer_sizes: Vec<usize>,
    pub hidden: Activation,
    pub output: Activation,
    pub params: Vec<f64>,
}

/// `rows x cols` matrix (row-major) with orthonormal rows or columns, whichever is fewer.
fn orthogonal_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Vec<f64> {
    let (n, k) = (rows.max(cols), rows.min(cols));
    // k orthonormal vectors of length n via Gram-Schmidt on Gaussian draws.
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(k);
    while basis.len() < k {
        let mut v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        for _ in 0..2 {
            for b in &basis {
                let dot: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
                for (x, y) in v.iter_mut().zip(b) {
                    *x -= dot * y;
                }
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-8 {
            v.iter_mut().for_each(|x| *x /= norm);
            basis.push(v);
        }
    }
    let mut out = vec![0.0; rows * cols];
    for r in 0..rows {
        for c in 0..cols {
            out[r * cols + c] = if rows >= cols { basis[c][r] } else { basis[r][c] };
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn orthogonal_rows_or_columns() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for (rows, cols) in [(4, 7), (7, 4), (5, 5)] {
            let w = orthogonal_matrix(rows, cols, &mut rng);
            let dot = |a: &dyn Fn(usize) -> f64, b: &dyn Fn(usize) -> f64, n: usize| {
                (0..n).map(|i| a(i) * b(i)).sum::<f64>()
            };
            if rows <= cols {
                for i in 0..rows {
                    for j in 0..rows {
                        let d = dot(&|c| w[i * cols + c], &|c| w[j * cols + c], cols);
                        assert!((d - if i == j { 1.0 } else { 0.0 }).abs() < 1e-12);
                    }
                }
            } else {
                for i in 0..cols {
                    for j in 0..cols {
                        let d = dot(&|r| w[r * cols + i], &|r| w[r * cols + j], rows);
                        assert!((d - if i == j { 1.0 } else { 0.0 }).abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn stale_cache_is_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut net = Mlp::orthogonal(&[3, 4, 2], Activation::Tanh, Activation::Linear, 1.0, 1.0, &mut rng).unwrap();
        let (_, cache) = net.forward(&[0.1, 0.2, 0.3]).unwrap();
        net.params_mut()[0] += 1.0;
        assert_eq!(net.backward(&cache, &[1.0, 0.0]), Err(NnError::CacheMismatch));
    }
}
