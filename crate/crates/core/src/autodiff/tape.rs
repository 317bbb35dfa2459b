use rand::Rng;
use rand_distr::StandardNormal;

use super::tensor::{broadcast, matmul, matmul_nt, matmul_tn, reduce_to, zip_broadcast, Broadcast};
use super::{AdError, Tensor};

/// Handle to a value recorded on a [`Tape`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Clone, Debug)]
enum Op {
    Leaf,
    MatMul(usize, usize),
    Add(usize, usize),
    Sub(usize, usize),
    Mul(usize, usize, Broadcast),
    Scale(usize, f64),
    AddScalar(usize),
    Tanh(usize),
    Sigmoid(usize),
    Square(usize),
    Exp(usize),
    Log(usize),
    Sqrt(usize),
    Sum(usize),
    Mean(usize),
    ConcatCols(usize, usize),
    /// `mu + sigma * noise` with the standard-normal draw kept for backward.
    Reparam { mu: usize, sigma: usize, noise: Tensor },
    /// Inverted dropout; `mask` already carries the `1 / (1 - p)` scale.
    Dropout { input: usize, mask: Tensor },
}

#[derive(Clone, Debug)]
struct Node {
    op: Op,
    value: Tensor,
}

/// Append-only record of a forward computation.
///
/// Parents always precede children, so the reverse pass walks node indices in
/// strictly decreasing order.
#[derive(Clone, Debug, Default)]
pub struct Tape {
    nodes: Vec<Node>,
}

/// Gradients of a scalar root with respect to every node on the tape.
#[derive(Clone, Debug)]
pub struct Gradients {
    grads: Vec<Option<Tensor>>,
}

impl Gradients {
    pub fn get(&self, v: Var) -> Option<&Tensor> {
        self.grads.get(v.0).and_then(Option::as_ref)
    }

    /// Gradient for `v`, zero-filled when the root does not depend on it.
    pub fn wrt(&self, tape: &Tape, v: Var) -> Tensor {
        self.get(v).cloned().unwrap_or_else(|| Tensor::zeros(tape.value(v).shape()))
    }
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn clear(&mut self) {
        self.nodes.clear();
    }

    pub fn value(&self, v: Var) -> &Tensor {
        &self.nodes[v.0].value
    }

    fn push(&mut self, op: Op, value: Tensor) -> Var {
        self.nodes.push(Node { op, value });
        Var(self.nodes.len() - 1)
    }

    /// Record an input (parameter or constant).
    pub fn leaf(&mut self, value: Tensor) -> Var {
        self.push(Op::Leaf, value)
    }

    /// Copy of `v` that gradients do not flow through.
    pub fn detach(&mut self, v: Var) -> Var {
        let value = self.value(v).clone();
        self.leaf(value)
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var, AdError> {
        let value = matmul(self.value(a), self.value(b))?;
        Ok(self.push(Op::MatMul(a.0, b.0), value))
    }

    fn binary(
        &mut self,
        name: &'static str,
        a: Var,
        b: Var,
        f: impl Fn(f64, f64) -> f64,
        op: impl Fn(usize, usize, Broadcast) -> Op,
    ) -> Result<Var, AdError> {
        let (x, y) = (self.value(a), self.value(b));
        let mode = broadcast(name, x, y)?;
        let value = zip_broadcast(x, y, mode, f);
        Ok(self.push(op(a.0, b.0, mode), value))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var, AdError> {
        self.binary("add", a, b, |x, y| x + y, |a, b, _| Op::Add(a, b))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var, AdError> {
        self.binary("sub", a, b, |x, y| x - y, |a, b, _| Op::Sub(a, b))
    }

    /// Elementwise product.
    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var, AdError> {
        self.binary("mul", a, b, |x, y| x * y, Op::Mul)
    }

    pub fn scale(&mut self, a: Var, c: f64) -> Var {
        let value = self.value(a).map(|x| c * x);
        self.push(Op::Scale(a.0, c), value)
    }

    pub fn add_scalar(&mut self, a: Var, c: f64) -> Var {
        let value = self.value(a).map(|x| x + c);
        self.push(Op::AddScalar(a.0), value)
    }

    pub fn tanh(&mut self, a: Var) -> Var {
        let value = self.value(a).map(f64::tanh);
        self.push(Op::Tanh(a.0), value)
    }

    pub fn sigmoid(&mut self, a: Var) -> Var {
        let value = self.value(a).map(sigmoid);
        self.push(Op::Sigmoid(a.0), value)
    }

    pub fn square(&mut self, a: Var) -> Var {
        let value = self.value(a).map(|x| x * x);
        self.push(Op::Square(a.0), value)
    }

    pub fn exp(&mut self, a: Var) -> Var {
        let value = self.value(a).map(f64::exp);
        self.push(Op::Exp(a.0), value)
    }

    pub fn log(&mut self, a: Var) -> Var {
        let value = self.value(a).map(f64::ln);
        self.push(Op::Log(a.0), value)
    }

    pub fn sqrt(&mut self, a: Var) -> Var {
        let value = self.value(a).map(f64::sqrt);
        self.push(Op::Sqrt(a.0), value)
    }

    pub fn sum(&mut self, a: Var) -> Var {
        let value = Tensor::scalar(self.value(a).data().iter().sum());
        self.push(Op::Sum(a.0), value)
    }

    pub fn mean(&mut self, a: Var) -> Var {
        let x = self.value(a);
        let value = Tensor::scalar(x.data().iter().sum::<f64>() / x.numel() as f64);
        self.push(Op::Mean(a.0), value)
    }

    /// `[a | b]` for matrices with equal row counts.
    pub fn concat_cols(&mut self, a: Var, b: Var) -> Result<Var, AdError> {
        let (x, y) = (self.value(a), self.value(b));
        if x.rows() != y.rows() {
            return Err(AdError::ShapeMismatch {
                op: "concat_cols",
                left: x.shape().to_vec(),
                right: y.shape().to_vec(),
            });
        }
        let (r, ca, cb) = (x.rows(), x.cols(), y.cols());
        let mut data = Vec::with_capacity(r * (ca + cb));
        for i in 0..r {
            data.extend_from_slice(x.row_slice(i));
            data.extend_from_slice(y.row_slice(i));
        }
        let value = Tensor::matrix(r, ca + cb, data);
        Ok(self.push(Op::ConcatCols(a.0, b.0), value))
    }

    /// Sample `mu + sigma * xi`, `xi ~ N(0, I)`, differentiable in both inputs.
    pub fn gaussian_sample<R: Rng + ?Sized>(
        &mut self,
        mu: Var,
        sigma: Var,
        rng: &mut R,
    ) -> Result<Var, AdError> {
        let (m, s) = (self.value(mu), self.value(sigma));
        if m.shape() != s.shape() {
            return Err(AdError::ShapeMismatch {
                op: "gaussian_sample",
                left: m.shape().to_vec(),
                right: s.shape().to_vec(),
            });
        }
        let noise = Tensor::new(
            m.shape().to_vec(),
            (0..m.numel()).map(|_| rng.sample::<f64, _>(StandardNormal)).collect(),
        )?;
        let value = Tensor::new(
            m.shape().to_vec(),
            m.data().iter().zip(s.data()).zip(noise.data()).map(|((a, b), z)| a + b * z).collect(),
        )?;
        Ok(self.push(Op::Reparam { mu: mu.0, sigma: sigma.0, noise }, value))
    }

    /// Inverted dropout with drop probability `p`. `p == 0` records a pass-through.
    pub fn dropout<R: Rng + ?Sized>(&mut self, a: Var, p: f64, rng: &mut R) -> Var {
        let x = self.value(a);
        let keep = 1.0 - p;
        let mask_data = (0..x.numel())
            .map(|_| if p > 0.0 && rng.gen::<f64>() < p { 0.0 } else { 1.0 / keep })
            .collect();
        let mask = Tensor::new(x.shape().to_vec(), mask_data).expect("mask shares the input shape");
        let value = Tensor::new(
            x.shape().to_vec(),
            x.data().iter().zip(mask.data()).map(|(v, m)| v * m).collect(),
        )
        .expect("mask shares the input shape");
        self.push(Op::Dropout { input: a.0, mask }, value)
    }

    /// Reverse pass from a scalar `root`.
    pub fn backward(&self, root: Var) -> Result<Gradients, AdError> {
        let rv = self.value(root);
        if rv.numel() != 1 {
            return Err(AdError::NonScalarRoot { shape: rv.shape().to_vec() });
        }
        let mut grads: Vec<Option<Tensor>> = vec![None; root.0 + 1];
        grads[root.0] = Some(Tensor::full(rv.shape(), 1.0));

        fn accumulate(grads: &mut [Option<Tensor>], idx: usize, g: Tensor) {
            match &mut grads[idx] {
                Some(existing) => existing.add_assign(&g),
                slot @ None => *slot = Some(g),
            }
        }

        for i in (0..=root.0).rev() {
            let g = match &grads[i] {
                Some(g) => g.clone(),
                None => continue,
            };
            let node = &self.nodes[i];
            let out = &node.value;
            match &node.op {
                Op::Leaf => {}
                Op::MatMul(a, b) => {
                    let (av, bv) = (&self.nodes[*a].value, &self.nodes[*b].value);
                    let ga = matmul_nt(&g, bv);
                    let gb = matmul_tn(av, &g);
                    accumulate(&mut grads, *a, reshape_like(ga, av));
                    accumulate(&mut grads, *b, reshape_like(gb, bv));
                }
                Op::Add(a, b) => {
                    let (av, bv) = (&self.nodes[*a].value, &self.nodes[*b].value);
                    accumulate(&mut grads, *a, reduce_to(g.clone(), av));
                    accumulate(&mut grads, *b, reduce_to(g, bv));
                }
                Op::Sub(a, b) => {
                    let (av, bv) = (&self.nodes[*a].value, &self.nodes[*b].value);
                    accumulate(&mut grads, *a, reduce_to(g.clone(), av));
                    accumulate(&mut grads, *b, reduce_to(g.map(|x| -x), bv));
                }
                Op::Mul(a, b, mode) => {
                    let (av, bv) = (&self.nodes[*a].value, &self.nodes[*b].value);
                    let ga = zip_broadcast_grad(&g, bv, *mode, true);
                    let gb = zip_broadcast_grad(&g, av, *mode, false);
                    accumulate(&mut grads, *a, reduce_to(ga, av));
                    accumulate(&mut grads, *b, reduce_to(gb, bv));
                }
                Op::Scale(a, c) => accumulate(&mut grads, *a, g.map(|x| c * x)),
                Op::AddScalar(a) => accumulate(&mut grads, *a, g),
                Op::Tanh(a) => accumulate(&mut grads, *a, elementwise(&g, out, |g, y| g * (1.0 - y * y))),
                Op::Sigmoid(a) => accumulate(&mut grads, *a, elementwise(&g, out, |g, y| g * y * (1.0 - y))),
                Op::Square(a) => {
                    let x = &self.nodes[*a].value;
                    accumulate(&mut grads, *a, elementwise(&g, x, |g, x| 2.0 * g * x));
                }
                Op::Exp(a) => accumulate(&mut grads, *a, elementwise(&g, out, |g, y| g * y)),
                Op::Log(a) => {
                    let x = &self.nodes[*a].value;
                    accumulate(&mut grads, *a, elementwise(&g, x, |g, x| g / x));
                }
                Op::Sqrt(a) => accumulate(&mut grads, *a, elementwise(&g, out, |g, y| 0.5 * g / y)),
                Op::Sum(a) => {
                    let x = &self.nodes[*a].value;
                    accumulate(&mut grads, *a, Tensor::full(x.shape(), g.data()[0]));
                }
                Op::Mean(a) => {
                    let x = &self.nodes[*a].value;
                    let v = g.data()[0] / x.numel() as f64;
                    accumulate(&mut grads, *a, Tensor::full(x.shape(), v));
                }
                Op::ConcatCols(a, b) => {
                    let (av, bv) = (&self.nodes[*a].value, &self.nodes[*b].value);
                    let (r, ca, cb) = (av.rows(), av.cols(), bv.cols());
                    let mut ga = Vec::with_capacity(r * ca);
                    let mut gb = Vec::with_capacity(r * cb);
                    for row in 0..r {
                        let gr = g.row_slice(row);
                        ga.extend_from_slice(&gr[..ca]);
                        gb.extend_from_slice(&gr[ca..]);
                    }
                    accumulate(&mut grads, *a, reshape_like(Tensor::matrix(r, ca, ga), av));
                    accumulate(&mut grads, *b, reshape_like(Tensor::matrix(r, cb, gb), bv));
                }
                Op::Reparam { mu, sigma, noise } => {
                    let gs = elementwise(&g, noise, |g, z| g * z);
                    accumulate(&mut grads, *mu, g);
                    accumulate(&mut grads, *sigma, gs);
                }
                Op::Dropout { input, mask } => {
                    accumulate(&mut grads, *input, elementwise(&g, mask, |g, m| g * m));
                }
            }
        }
        Ok(Gradients { grads })
    }
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn elementwise(g: &Tensor, other: &Tensor, f: impl Fn(f64, f64) -> f64) -> Tensor {
    Tensor::new(
        g.shape().to_vec(),
        g.data().iter().zip(other.data()).map(|(&a, &b)| f(a, b)).collect(),
    )
    .expect("gradient shares its node's shape")
}

fn reshape_like(t: Tensor, like: &Tensor) -> Tensor {
    Tensor::new(like.shape().to_vec(), t.into_data()).expect("same element count")
}

/// Upstream gradient times the other operand, laid out in the output's shape.
fn zip_broadcast_grad(g: &Tensor, other: &Tensor, mode: Broadcast, other_is_right: bool) -> Tensor {
    let c = g.cols();
    let pick = |i: usize| -> f64 {
        let scalar = matches!(
            (mode, other_is_right),
            (Broadcast::RightScalar, true) | (Broadcast::LeftScalar, false)
        );
        let row = matches!((mode, other_is_right), (Broadcast::RightRow, true) | (Broadcast::LeftRow, false));
        if scalar {
            other.data()[0]
        } else if row {
            other.data()[i % c]
        } else {
            other.data()[i]
        }
    };
    let data = g.data().iter().enumerate().map(|(i, &gv)| gv * pick(i)).collect();
    Tensor::new(g.shape().to_vec(), data).expect("gradient shares output shape")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn sigmoid_at_zero_is_half() {
        let mut t = Tape::new();
        let x = t.leaf(Tensor::scalar(0.0));
        let y = t.sigmoid(x);
        assert_eq!(t.value(y).item(), Some(0.5));
        let g = t.backward(y).unwrap();
        assert!((g.wrt(&t, x).data()[0] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn quadratic_sum_gradient() {
        let mut t = Tape::new();
        let theta = t.leaf(Tensor::row(vec![1.0, 2.0]));
        let sq = t.mul(theta, theta).unwrap();
        let s = t.sum(sq);
        let g = t.backward(s).unwrap();
        assert_eq!(g.wrt(&t, theta).data(), &[2.0, 4.0]);
    }

    #[test]
    fn non_scalar_root_is_rejected() {
        let mut t = Tape::new();
        let x = t.leaf(Tensor::row(vec![1.0, 2.0]));
        let y = t.tanh(x);
        assert!(matches!(t.backward(y), Err(AdError::NonScalarRoot { .. })));
    }

    #[test]
    fn shape_mismatch_names_both_shapes() {
        let mut t = Tape::new();
        let a = t.leaf(Tensor::matrix(2, 3, vec![0.0; 6]));
        let b = t.leaf(Tensor::matrix(2, 3, vec![0.0; 6]));
        let err = t.matmul(a, b).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("[2, 3]"), "{msg}");
        let c = t.leaf(Tensor::matrix(3, 2, vec![0.0; 6]));
        assert!(t.add(a, c).is_err());
    }

    #[test]
    fn dropout_zero_rate_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut t = Tape::new();
        let x = t.leaf(Tensor::row(vec![1.0, -2.0, 3.0]));
        let y = t.dropout(x, 0.0, &mut rng);
        assert_eq!(t.value(y), t.value(x));
    }

    #[test]
    fn detached_branch_carries_no_gradient() {
        let mut t = Tape::new();
        let x = t.leaf(Tensor::scalar(3.0));
        let d = t.detach(x);
        let y = t.mul(x, d).unwrap();
        let g = t.backward(y).unwrap();
        assert_eq!(g.wrt(&t, x).data(), &[3.0]);
    }
}
