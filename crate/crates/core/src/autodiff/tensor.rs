use serde::{Deserialize, Serialize};

use super::AdError;

/// Dense row-major tensor of `f64`.
///
/// Every tensor is viewed as a matrix for the purpose of the op set: a rank-1
/// shape `[n]` behaves as a single row `[1, n]`, and a scalar is `[1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl Tensor {
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Result<Self, AdError> {
        if shape.is_empty() || shape.len() > 2 || shape.iter().any(|&d| d == 0) {
            return Err(AdError::InvalidShape { shape, len: data.len() });
        }
        if shape.iter().product::<usize>() != data.len() {
            return Err(AdError::InvalidShape { shape, len: data.len() });
        }
        Ok(Self { shape, data })
    }

    pub fn scalar(value: f64) -> Self {
        Self { shape: vec![1], data: vec![value] }
    }

    pub fn zeros(shape: &[usize]) -> Self {
        let n = shape.iter().product();
        Self { shape: shape.to_vec(), data: vec![0.0; n] }
    }

    pub fn full(shape: &[usize], value: f64) -> Self {
        let n = shape.iter().product();
        Self { shape: shape.to_vec(), data: vec![value; n] }
    }

    /// A `[rows, cols]` matrix. Panics if `data.len() != rows * cols` or a
    /// dimension is zero; use [`Tensor::new`] for fallible construction.
    pub fn matrix(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        Self::new(vec![rows, cols], data).expect("matrix dimensions must match data")
    }

    /// A single row `[1, n]`.
    pub fn row(data: Vec<f64>) -> Self {
        let n = data.len();
        Self::matrix(1, n, data)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, AdError> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(AdError::InvalidShape { shape: vec![rows.len(), cols], len: r.len() });
            }
            data.extend_from_slice(r);
        }
        Self::new(vec![rows.len(), cols], data)
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn numel(&self) -> usize {
        self.data.len()
    }

    pub fn rows(&self) -> usize {
        if self.shape.len() == 2 {
            self.shape[0]
        } else {
            1
        }
    }

    pub fn cols(&self) -> usize {
        *self.shape.last().expect("shape is never empty")
    }

    pub fn row_slice(&self, r: usize) -> &[f64] {
        let c = self.cols();
        &self.data[r * c..(r + 1) * c]
    }

    /// The single value of a one-element tensor.
    pub fn item(&self) -> Option<f64> {
        (self.data.len() == 1).then(|| self.data[0])
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { shape: self.shape.clone(), data: self.data.iter().map(|&v| f(v)).collect() }
    }

    /// First `n` rows of a matrix.
    pub fn head_rows(&self, n: usize) -> Self {
        let c = self.cols();
        Self::matrix(n, c, self.data[..n * c].to_vec())
    }

    pub(crate) fn add_assign(&mut self, other: &Tensor) {
        debug_assert_eq!(self.data.len(), other.data.len());
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }
}

/// How the right operand of an elementwise op is laid over the left one.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Broadcast {
    Same,
    /// Right operand is a single value.
    RightScalar,
    LeftScalar,
    /// Right operand is one row repeated over the rows of the left one.
    RightRow,
    LeftRow,
}

pub(crate) fn broadcast(op: &'static str, a: &Tensor, b: &Tensor) -> Result<Broadcast, AdError> {
    if a.shape == b.shape {
        return Ok(Broadcast::Same);
    }
    if a.numel() == b.numel() && a.rows() == b.rows() && a.cols() == b.cols() {
        return Ok(Broadcast::Same);
    }
    if b.numel() == 1 {
        return Ok(Broadcast::RightScalar);
    }
    if a.numel() == 1 {
        return Ok(Broadcast::LeftScalar);
    }
    if b.rows() == 1 && b.cols() == a.cols() {
        return Ok(Broadcast::RightRow);
    }
    if a.rows() == 1 && a.cols() == b.cols() {
        return Ok(Broadcast::LeftRow);
    }
    Err(AdError::ShapeMismatch { op, left: a.shape.clone(), right: b.shape.clone() })
}

pub(crate) fn zip_broadcast(
    a: &Tensor,
    b: &Tensor,
    mode: Broadcast,
    f: impl Fn(f64, f64) -> f64,
) -> Tensor {
    match mode {
        Broadcast::Same => Tensor {
            shape: a.shape.clone(),
            data: a.data.iter().zip(&b.data).map(|(&x, &y)| f(x, y)).collect(),
        },
        Broadcast::RightScalar => {
            let y = b.data[0];
            a.map(|x| f(x, y))
        }
        Broadcast::LeftScalar => {
            let x = a.data[0];
            b.map(|y| f(x, y))
        }
        Broadcast::RightRow => {
            let c = a.cols();
            let data = a.data.iter().enumerate().map(|(i, &x)| f(x, b.data[i % c])).collect();
            Tensor { shape: a.shape.clone(), data }
        }
        Broadcast::LeftRow => {
            let c = b.cols();
            let data = b.data.iter().enumerate().map(|(i, &y)| f(a.data[i % c], y)).collect();
            Tensor { shape: b.shape.clone(), data }
        }
    }
}

/// Reduce a gradient shaped like the broadcast output back to `target`'s shape.
pub(crate) fn reduce_to(grad: Tensor, target: &Tensor) -> Tensor {
    if grad.numel() == target.numel() {
        return Tensor { shape: target.shape.clone(), data: grad.data };
    }
    if target.numel() == 1 {
        return Tensor { shape: target.shape.clone(), data: vec![grad.data.iter().sum()] };
    }
    let c = target.cols();
    let mut out = vec![0.0; c];
    for (i, g) in grad.data.iter().enumerate() {
        out[i % c] += g;
    }
    Tensor { shape: target.shape.clone(), data: out }
}

pub(crate) fn matmul(a: &Tensor, b: &Tensor) -> Result<Tensor, AdError> {
    let (m, k) = (a.rows(), a.cols());
    let (k2, n) = (b.rows(), b.cols());
    if k != k2 {
        return Err(AdError::ShapeMismatch { op: "matmul", left: a.shape.clone(), right: b.shape.clone() });
    }
    let mut out = vec![0.0; m * n];
    for i in 0..m {
        let arow = &a.data[i * k..(i + 1) * k];
        let orow = &mut out[i * n..(i + 1) * n];
        for (p, &av) in arow.iter().enumerate() {
            if av == 0.0 {
                continue;
            }
            let brow = &b.data[p * n..(p + 1) * n];
            for (o, &bv) in orow.iter_mut().zip(brow) {
                *o += av * bv;
            }
        }
    }
    Ok(Tensor::matrix(m, n, out))
}

/// `g · bᵀ` for `g: [m, n]`, `b: [k, n]`.
pub(crate) fn matmul_nt(g: &Tensor, b: &Tensor) -> Tensor {
    let (m, n) = (g.rows(), g.cols());
    let k = b.rows();
    let mut out = vec![0.0; m * k];
    for i in 0..m {
        let grow = &g.data[i * n..(i + 1) * n];
        for p in 0..k {
            let brow = &b.data[p * n..(p + 1) * n];
            out[i * k + p] = grow.iter().zip(brow).map(|(x, y)| x * y).sum();
        }
    }
    Tensor::matrix(m, k, out)
}

/// `aᵀ · g` for `a: [m, k]`, `g: [m, n]`.
pub(crate) fn matmul_tn(a: &Tensor, g: &Tensor) -> Tensor {
    let (m, k) = (a.rows(), a.cols());
    let n = g.cols();
    let mut out = vec![0.0; k * n];
    for i in 0..m {
        let arow = &a.data[i * k..(i + 1) * k];
        let grow = &g.data[i * n..(i + 1) * n];
        for (p, &av) in arow.iter().enumerate() {
            if av == 0.0 {
                continue;
            }
            let orow = &mut out[p * n..(p + 1) * n];
            for (o, &gv) in orow.iter_mut().zip(grow) {
                *o += av * gv;
            }
        }
    }
    Tensor::matrix(k, n, out)
}
