//! Reverse-mode gradients of a small network loss compared with central
//! finite differences.

use msdyn::autodiff::{Tape, Tensor};

fn loss(w: &Tensor, x: &Tensor, y: &Tensor) -> (f64, Tensor) {
    let mut tape = Tape::new();
    let wv = tape.leaf(w.clone());
    let xv = tape.leaf(x.clone());
    let yv = tape.leaf(y.clone());
    let z = tape.matmul(xv, wv).unwrap();
    let a = tape.tanh(z);
    let e = tape.sub(a, yv).unwrap();
    let sq = tape.square(e);
    let l = tape.mean(sq);
    let grads = tape.backward(l).unwrap();
    (tape.value(l).data()[0], grads.wrt(&tape, wv))
}

fn main() {
    let x = Tensor::matrix(4, 3, vec![0.1, -0.4, 0.7, 1.2, 0.3, -0.8, -0.5, 0.9, 0.2, 0.6, -1.1, 0.4]);
    let y = Tensor::matrix(4, 2, vec![0.3, -0.2, 0.5, 0.1, -0.7, 0.4, 0.2, 0.0]);
    let w = Tensor::matrix(3, 2, vec![0.2, -0.1, 0.4, 0.3, -0.6, 0.5]);
    let (l, g) = loss(&w, &x, &y);
    println!("loss {l:.6}");
    let h = 1e-6;
    let mut worst: f64 = 0.0;
    for i in 0..w.numel() {
        let mut wp = w.clone();
        wp.data_mut()[i] += h;
        let mut wm = w.clone();
        wm.data_mut()[i] -= h;
        let fd = (loss(&wp, &x, &y).0 - loss(&wm, &x, &y).0) / (2.0 * h);
        let rel = (g.data()[i] - fd).abs() / fd.abs().max(1e-12);
        worst = worst.max(rel);
        println!("w[{i}]  reverse {:+.9}  finite-diff {:+.9}", g.data()[i], fd);
    }
    println!("largest relative error {worst:.2e}");
}
