// SPDX-License-Identifier: Apache-2.0

//! Minimal reverse-mode automatic differentiation over dense matrices.
//!
//! A [`Tape`] records every operation in evaluation order; [`Tape::backward`]
//! walks it in reverse and returns the gradient of a scalar (1x1) output with
//! respect to every recorded value.

use std::rc::Rc;

use ndarray::{s, Array2, Axis};

/// Constant sparse matrix, used for neighbourhood aggregation and pooling.
#[derive(Clone, Debug, PartialEq)]
pub struct Sparse {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<(usize, usize, f64)>,
}

impl Sparse {
    /// `self * x`.
    pub fn apply(&self, x: &Array2<f64>) -> Array2<f64> {
        assert_eq!(self.cols, x.nrows(), "sparse apply: shape mismatch");
        let mut y = Array2::zeros((self.rows, x.ncols()));
        for &(r, c, w) in &self.entries {
            let src = x.row(c);
            let mut dst = y.row_mut(r);
            dst.scaled_add(w, &src);
        }
        y
    }

    /// `self^T * g`.
    pub fn apply_transpose(&self, g: &Array2<f64>) -> Array2<f64> {
        let mut y = Array2::zeros((self.cols, g.ncols()));
        for &(r, c, w) in &self.entries {
            let src = g.row(r);
            let mut dst = y.row_mut(c);
            dst.scaled_add(w, &src);
        }
        y
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

enum Op {
    Leaf,
    MatMul(Var, Var),
    AddBias(Var, Var),
    Relu(Var),
    Concat(Vec<Var>),
    Spmm(Rc<Sparse>, Var),
    /// Elementwise product with a fixed mask (dropout).
    Mask(Var, Array2<f64>),
    /// Mean binary cross-entropy of logits against fixed 0/1 targets.
    BceLogits(Var, Array2<f64>),
    /// Mean squared error against fixed targets.
    Mse(Var, Array2<f64>),
}

struct Entry {
    value: Array2<f64>,
    op: Op,
}

#[derive(Default)]
pub struct Tape {
    entries: Vec<Entry>,
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    fn push(&mut self, value: Array2<f64>, op: Op) -> Var {
        self.entries.push(Entry { value, op });
        Var(self.entries.len() - 1)
    }

    pub fn value(&self, v: Var) -> &Array2<f64> {
        &self.entries[v.0].value
    }

    pub fn leaf(&mut self, value: Array2<f64>) -> Var {
        self.push(value, Op::Leaf)
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Var {
        let v = self.value(a).dot(self.value(b));
        self.push(v, Op::MatMul(a, b))
    }

    /// Adds the 1 x d row `b` to every row of `x`.
    pub fn add_bias(&mut self, x: Var, b: Var) -> Var {
        let v = self.value(x) + self.value(b);
        self.push(v, Op::AddBias(x, b))
    }

    pub fn relu(&mut self, x: Var) -> Var {
        let v = self.value(x).mapv(|z| z.max(0.0));
        self.push(v, Op::Relu(x))
    }

    /// Column-wise concatenation.
    pub fn concat(&mut self, parts: &[Var]) -> Var {
        let views: Vec<_> = parts.iter().map(|&p| self.value(p).view()).collect();
        let v = ndarray::concatenate(Axis(1), &views).expect("concat: row counts differ");
        self.push(v, Op::Concat(parts.to_vec()))
    }

    pub fn spmm(&mut self, m: &Rc<Sparse>, x: Var) -> Var {
        let v = m.apply(self.value(x));
        self.push(v, Op::Spmm(Rc::clone(m), x))
    }

    pub fn mask(&mut self, x: Var, mask: Array2<f64>) -> Var {
        let v = self.value(x) * &mask;
        self.push(v, Op::Mask(x, mask))
    }

    pub fn bce_logits(&mut self, z: Var, targets: Array2<f64>) -> Var {
        let zv = self.value(z);
        assert_eq!(zv.dim(), targets.dim(), "bce: shape mismatch");
        let n = zv.len() as f64;
        let total: f64 = zv
            .iter()
            .zip(targets.iter())
            .map(|(&z, &y)| z.max(0.0) - z * y + (-z.abs()).exp().ln_1p())
            .sum();
        self.push(Array2::from_elem((1, 1), total / n), Op::BceLogits(z, targets))
    }

    pub fn mse(&mut self, p: Var, targets: Array2<f64>) -> Var {
        let pv = self.value(p);
        assert_eq!(pv.dim(), targets.dim(), "mse: shape mismatch");
        let n = pv.len() as f64;
        let total: f64 = pv.iter().zip(targets.iter()).map(|(&a, &b)| (a - b) * (a - b)).sum();
        self.push(Array2::from_elem((1, 1), total / n), Op::Mse(p, targets))
    }

    /// Gradients of the scalar `out` with respect to every tape entry; entries
    /// that do not influence `out` get `None`.
    pub fn backward(&self, out: Var) -> Vec<Option<Array2<f64>>> {
        let mut grads: Vec<Option<Array2<f64>>> = (0..self.entries.len()).map(|_| None).collect();
        grads[out.0] = Some(Array2::ones(self.value(out).dim()));
        for i in (0..=out.0).rev() {
            let Some(g) = grads[i].take() else { continue };
            match &self.entries[i].op {
                Op::Leaf => {}
                Op::MatMul(a, b) => {
                    let ga = g.dot(&self.value(*b).t());
                    let gb = self.value(*a).t().dot(&g);
                    accumulate(&mut grads, *a, ga);
                    accumulate(&mut grads, *b, gb);
                }
                Op::AddBias(x, b) => {
                    let gb = g.sum_axis(Axis(0)).insert_axis(Axis(0));
                    accumulate(&mut grads, *b, gb);
                    accumulate(&mut grads, *x, g.clone());
                }
                Op::Relu(x) => {
                    let mut gx = g.clone();
                    gx.zip_mut_with(self.value(*x), |d, &z| {
                        if z <= 0.0 {
                            *d = 0.0;
                        }
                    });
                    accumulate(&mut grads, *x, gx);
                }
                Op::Concat(parts) => {
                    let mut col = 0;
                    for &p in parts {
                        let w = self.value(p).ncols();
                        accumulate(&mut grads, p, g.slice(s![.., col..col + w]).to_owned());
                        col += w;
                    }
                }
                Op::Spmm(m, x) => accumulate(&mut grads, *x, m.apply_transpose(&g)),
                Op::Mask(x, m) => accumulate(&mut grads, *x, &g * m),
                Op::BceLogits(z, t) => {
                    let scale = g[[0, 0]] / t.len() as f64;
                    let mut gz = self.value(*z).mapv(sigmoid);
                    gz.zip_mut_with(t, |d, &y| *d = (*d - y) * scale);
                    accumulate(&mut grads, *z, gz);
                }
                Op::Mse(p, t) => {
                    let scale = 2.0 * g[[0, 0]] / t.len() as f64;
                    let mut gp = self.value(*p).clone();
                    gp.zip_mut_with(t, |d, &y| *d = (*d - y) * scale);
                    accumulate(&mut grads, *p, gp);
                }
            }
            grads[i] = Some(g);
        }
        grads
    }
}

fn accumulate(grads: &mut [Option<Array2<f64>>], v: Var, g: Array2<f64>) {
    match &mut grads[v.0] {
        Some(existing) => *existing += &g,
        slot @ None => *slot = Some(g),
    }
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}
