#![allow(dead_code)]

use msdyn::autodiff::{Tape, Tensor, Var};
use msdyn::model::DynamicsModel;
use msdyn::multistep::{multistep_loss, nll_multistep_loss, Sampling, SegmentBatch, WeightProfile};
use msdyn::rng::SimRng;
use rand::{Rng, SeedableRng};

pub const FD_STEP: f64 = 1e-5;

/// Scalar function of several tensors, built on a fresh tape.
pub type Graph<'a> = dyn Fn(&mut Tape, &[Var]) -> Var + 'a;

pub fn eval(f: &Graph, inputs: &[Tensor]) -> f64 {
    let mut tape = Tape::new();
    let vars: Vec<Var> = inputs.iter().map(|t| tape.leaf(t.clone())).collect();
    let out = f(&mut tape, &vars);
    tape.value(out).data()[0]
}

pub fn reverse(f: &Graph, inputs: &[Tensor]) -> Vec<Tensor> {
    let mut tape = Tape::new();
    let vars: Vec<Var> = inputs.iter().map(|t| tape.leaf(t.clone())).collect();
    let out = f(&mut tape, &vars);
    let g = tape.backward(out).unwrap();
    vars.iter().map(|&v| g.wrt(&tape, v)).collect()
}

/// Central finite differences of `f` for every input entry.
pub fn central_fd(f: &Graph, inputs: &[Tensor]) -> Vec<Tensor> {
    inputs
        .iter()
        .enumerate()
        .map(|(k, t)| {
            let mut g = t.clone();
            for i in 0..t.numel() {
                let mut plus = inputs.to_vec();
                plus[k].data_mut()[i] += FD_STEP;
                let mut minus = inputs.to_vec();
                minus[k].data_mut()[i] -= FD_STEP;
                g.data_mut()[i] = (eval(f, &plus) - eval(f, &minus)) / (2.0 * FD_STEP);
            }
            g
        })
        .collect()
}

/// `‖g − fd‖ / max(‖fd‖, 1e-8)` over all inputs stacked.
pub fn relative_error(g: &[Tensor], fd: &[Tensor]) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for (a, b) in g.iter().zip(fd) {
        for (x, y) in a.data().iter().zip(b.data()) {
            num += (x - y) * (x - y);
            den += y * y;
        }
    }
    num.sqrt() / den.sqrt().max(1e-8)
}

pub fn gradcheck(f: &Graph, inputs: &[Tensor]) -> f64 {
    relative_error(&reverse(f, inputs), &central_fd(f, inputs))
}

pub fn random_matrix(rng: &mut impl Rng, r: usize, c: usize, lo: f64, hi: f64) -> Tensor {
    Tensor::matrix(r, c, (0..r * c).map(|_| rng.gen_range(lo..hi)).collect())
}

/// `sum(w ⊙ x)` with fixed weights, so every output entry gets its own
/// cotangent.
pub fn project(tape: &mut Tape, x: Var, seed: u64) -> Var {
    let v = tape.value(x).clone();
    let mut rng = SimRng::seed_from_u64(seed);
    let w = Tensor::new(v.shape().to_vec(), (0..v.numel()).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
    let w = tape.leaf(w);
    let p = tape.mul(x, w).unwrap();
    tape.sum(p)
}

/// One case per op: a name, the graph and the input ranges.
pub struct OpCase {
    pub name: &'static str,
    pub arity: usize,
    pub shapes: fn(&mut SimRng) -> Vec<(usize, usize)>,
    pub range: (f64, f64),
    pub graph: fn(&mut Tape, &[Var]) -> Var,
}

fn rc(rng: &mut SimRng) -> (usize, usize) {
    (rng.gen_range(1..5), rng.gen_range(1..5))
}

pub fn op_cases() -> Vec<OpCase> {
    vec![
        OpCase {
            name: "matmul",
            arity: 2,
            shapes: |r| {
                let (a, b, c) = (r.gen_range(1..5), r.gen_range(1..5), r.gen_range(1..5));
                vec![(a, b), (b, c)]
            },
            range: (-1.0, 1.0),
            graph: |t, v| {
                let y = t.matmul(v[0], v[1]).unwrap();
                project(t, y, 1)
            },
        },
        OpCase {
            name: "add",
            arity: 2,
            shapes: |r| {
                let s = rc(r);
                vec![s, s]
            },
            range: (-1.0, 1.0),
            graph: |t, v| {
                let y = t.add(v[0], v[1]).unwrap();
                project(t, y, 2)
            },
        },
        OpCase {
            name: "add (row broadcast)",
            arity: 2,
            shapes: |r| {
                let (a, b) = rc(r);
                vec![(a, b), (1, b)]
            },
            range: (-1.0, 1.0),
            graph: |t, v| {
                let y = t.add(v[0], v[1]).unwrap();
                project(t, y, 3)
            },
        },
        OpCase {
            name: "sub",
            arity: 2,
            shapes: |r| {
                let s = rc(r);
                vec![s, s]
            },
            range: (-1.0, 1.0),
            graph: |t, v| {
                let y = t.sub(v[0], v[1]).unwrap();
                project(t, y, 4)
            },
        },
        OpCase {
            name: "mul",
            arity: 2,
            shapes: |r| {
                let s = rc(r);
                vec![s, s]
            },
            range: (-1.0, 1.0),
            graph: |t, v| {
                let y = t.mul(v[0], v[1]).unwrap();
                project(t, y, 5)
            },
        },
        OpCase {
            name: "scale",
            arity: 1,
            shapes: |r| vec![rc(r)],
            range: (-1.0, 1.0),
            graph: |t, v| {
                let y = t.scale(v[0], -1.7);
                project(t, y, 6)
            },
        },
        OpCase {
            name: "add_scalar",
            arity: 1,
            shapes: |r| vec![rc(r)],
            range: (-1.0, 1.0),
            graph: |t, v| {
                let y = t.add_scalar(v[0], 0.3);
                let y = t.square(y);
                project(t, y, 7)
            },
        },
        OpCase {
            name: "tanh",
            arity: 1,
            shapes: |r| vec![rc(r)],
            range: (-2.0, 2.0),
            graph: |t, v| {
                let y = t.tanh(v[0]);
                project(t, y, 8)
            },
        },
        OpCase {
            name: "sigmoid",
            arity: 1,
            shapes: |r| vec![rc(r)],
            range: (-3.0, 3.0),
            graph: |t, v| {
                let y = t.sigmoid(v[0]);
                project(t, y, 9)
            },
        },
        OpCase {
            name: "square",
            arity: 1,
            shapes: |r| vec![rc(r)],
            range: (-2.0, 2.0),
            graph: |t, v| {
                let y = t.square(v[0]);
                project(t, y, 10)
            },
        },
        OpCase {
            name: "exp",
            arity: 1,
            shapes: |r| vec![rc(r)],
            range: (-2.0, 1.0),
            graph: |t, v| {
                let y = t.exp(v[0]);
                project(t, y, 11)
            },
        },
        OpCase {
            name: "log",
            arity: 1,
            shapes: |r| vec![rc(r)],
            range: (0.3, 3.0),
            graph: |t, v| {
                let y = t.log(v[0]);
                project(t, y, 12)
            },
        },
        OpCase {
            name: "sqrt",
            arity: 1,
            shapes: |r| vec![rc(r)],
            range: (0.3, 3.0),
            graph: |t, v| {
                let y = t.sqrt(v[0]);
                project(t, y, 13)
            },
        },
        OpCase {
            name: "sum",
            arity: 1,
            shapes: |r| vec![rc(r)],
            range: (-1.0, 1.0),
            graph: |t, v| {
                let y = t.square(v[0]);
                t.sum(y)
            },
        },
        OpCase {
            name: "mean",
            arity: 1,
            shapes: |r| vec![rc(r)],
            range: (-1.0, 1.0),
            graph: |t, v| {
                let y = t.tanh(v[0]);
                t.mean(y)
            },
        },
        OpCase {
            name: "concat_cols",
            arity: 2,
            shapes: |r| {
                let (a, b, c) = (r.gen_range(1..5), r.gen_range(1..4), r.gen_range(1..4));
                vec![(a, b), (a, c)]
            },
            range: (-1.0, 1.0),
            graph: |t, v| {
                let y = t.concat_cols(v[0], v[1]).unwrap();
                project(t, y, 14)
            },
        },
        OpCase {
            name: "gaussian_sample",
            arity: 2,
            shapes: |r| {
                let s = rc(r);
                vec![s, s]
            },
            range: (0.2, 1.5),
            graph: |t, v| {
                // the same noise on every evaluation
                let mut rng = SimRng::seed_from_u64(99);
                let y = t.gaussian_sample(v[0], v[1], &mut rng).unwrap();
                project(t, y, 15)
            },
        },
        OpCase {
            name: "dropout",
            arity: 1,
            shapes: |r| vec![rc(r)],
            range: (-1.0, 1.0),
            graph: |t, v| {
                let mut rng = SimRng::seed_from_u64(98);
                let y = t.dropout(v[0], 0.3, &mut rng);
                let y = t.square(y);
                project(t, y, 16)
            },
        },
    ]
}

/// Random inputs for `case`.
pub fn op_inputs(case: &OpCase, rng: &mut SimRng) -> Vec<Tensor> {
    let shapes = (case.shapes)(rng);
    assert_eq!(shapes.len(), case.arity);
    shapes.into_iter().map(|(r, c)| random_matrix(rng, r, c, case.range.0, case.range.1)).collect()
}

/// Multi-step loss of `model` as a function of its flat parameter vector.
pub fn loss_at<M: DynamicsModel + Clone>(model: &M, flat: &[f64], batch: &SegmentBatch, profile: &WeightProfile, nll: bool) -> (f64, Vec<f64>) {
    let mut m = model.clone();
    m.params_mut().set_flat(flat).unwrap();
    let mut tape = Tape::new();
    let params = m.params().bind(&mut tape);
    let out = if nll {
        nll_multistep_loss(&m, &mut tape, &params, batch, Sampling::Deterministic, None, None).unwrap()
    } else {
        multistep_loss(&m, &mut tape, &params, batch, profile, None).unwrap()
    };
    let value = tape.value(out.total).data()[0];
    let g = tape.backward(out.total).unwrap();
    let grad: Vec<f64> = params.iter().flat_map(|&p| g.wrt(&tape, p).data().to_vec()).collect();
    (value, grad)
}

/// Relative error of the multi-step loss gradient against central
/// differences over all parameters.
pub fn loss_gradcheck<M: DynamicsModel + Clone>(model: &M, batch: &SegmentBatch, profile: &WeightProfile, nll: bool) -> f64 {
    let flat = model.params().flat();
    let (_, g) = loss_at(model, &flat, batch, profile, nll);
    let fd: Vec<f64> = (0..flat.len())
        .map(|i| {
            let mut p = flat.clone();
            p[i] += FD_STEP;
            let up = loss_at(model, &p, batch, profile, nll).0;
            p[i] -= 2.0 * FD_STEP;
            let down = loss_at(model, &p, batch, profile, nll).0;
            (up - down) / (2.0 * FD_STEP)
        })
        .collect();
    let num: f64 = g.iter().zip(&fd).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    let den: f64 = fd.iter().map(|b| b * b).sum::<f64>().sqrt();
    num / den.max(1e-8)
}

/// Roots of `f` on `[lo, hi]` found by a uniform sign-change scan refined
/// with bisection.
pub fn scan_roots(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let mut roots = Vec::new();
    let step = (hi - lo) / n as f64;
    let mut x0 = lo;
    let mut f0 = f(x0);
    for i in 1..=n {
        let x1 = lo + step * i as f64;
        let f1 = f(x1);
        if f0 == 0.0 {
            roots.push(x0);
        } else if f0 * f1 < 0.0 {
            let (mut a, mut b, mut fa) = (x0, x1, f0);
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                let fm = f(m);
                if fm == 0.0 || (b - a) < 1e-15 * (1.0 + m.abs()) {
                    a = m;
                    b = m;
                    break;
                }
                if fa * fm < 0.0 {
                    b = m;
                } else {
                    a = m;
                    fa = fm;
                }
            }
            roots.push(0.5 * (a + b));
        }
        x0 = x1;
        f0 = f1;
    }
    roots
}

/// Random two-step dataset from a linear system with noise `sigma`.
pub fn linear_samples(rng: &mut impl Rng, n: usize, theta: f64, sigma: f64) -> Vec<msdyn::closed_form::TwoStepSample> {
    use rand_distr::StandardNormal;
    (0..n)
        .map(|_| {
            let s0: f64 = rng.gen_range(0.5..2.0) * if rng.gen::<bool>() { 1.0 } else { -1.0 };
            let z1: f64 = rng.sample(StandardNormal);
            let z2: f64 = rng.sample(StandardNormal);
            msdyn::closed_form::TwoStepSample { s0, o1: theta * s0 + sigma * z1, o2: theta * theta * s0 + sigma * z2 }
        })
        .collect()
}

/// Largest distance between returned roots and oracle roots, matched both
/// ways, and the largest `|dL/dθ|` at a returned root. `None` if the root
/// counts differ.
pub fn cubic_root_check(alpha: f64, samples: &[msdyn::closed_form::TwoStepSample]) -> Option<(f64, f64)> {
    use msdyn::closed_form::{loss_derivative, loss_derivative_roots, Moments};
    let m = Moments::of(samples);
    let (a, c, d) = m.derivative_coefficients(alpha);
    let bound = 1.0 + (c / a).abs().max((d / a).abs()).sqrt() + (c / a).abs() + (d / a).abs();
    let f = |x: f64| loss_derivative(x, alpha, &m);
    let oracle = scan_roots(f, -bound, bound, 20_000);
    let got = loss_derivative_roots(alpha, samples).ok()?;
    if oracle.len() != got.len() {
        return None;
    }
    let dist = oracle.iter().zip(&got).map(|(x, y)| (x - y).abs() / (1.0 + x.abs())).fold(0.0, f64::max);
    let slope = got.iter().map(|&r| f(r).abs()).fold(0.0, f64::max);
    Some((dist, slope))
}
