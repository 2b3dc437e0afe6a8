//! Dense matrices, layers and the Adam optimizer, with hand-written
//! backward passes.

use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "shape mismatch");
        Matrix { rows, cols, data }
    }

    pub fn uniform(rows: usize, cols: usize, bound: f64, rng: &mut impl Rng) -> Self {
        let data = (0..rows * cols).map(|_| rng.gen_range(-bound..=bound)).collect();
        Matrix { rows, cols, data }
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// `self · b`.
    pub fn matmul(&self, b: &Matrix) -> Matrix {
        assert_eq!(self.cols, b.rows, "matmul shape mismatch");
        let mut out = Matrix::zeros(self.rows, b.cols);
        for i in 0..self.rows {
            let o = &mut out.data[i * b.cols..(i + 1) * b.cols];
            for (k, &a) in self.row(i).iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                for (x, y) in o.iter_mut().zip(b.row(k)) {
                    *x += a * y;
                }
            }
        }
        out
    }

    /// `selfᵀ · b`.
    pub fn t_matmul(&self, b: &Matrix) -> Matrix {
        assert_eq!(self.rows, b.rows, "t_matmul shape mismatch");
        let mut out = Matrix::zeros(self.cols, b.cols);
        for k in 0..self.rows {
            let brow = b.row(k);
            for (i, &a) in self.row(k).iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                let o = &mut out.data[i * b.cols..(i + 1) * b.cols];
                for (x, y) in o.iter_mut().zip(brow) {
                    *x += a * y;
                }
            }
        }
        out
    }

    /// `self · bᵀ`.
    pub fn matmul_t(&self, b: &Matrix) -> Matrix {
        assert_eq!(self.cols, b.cols, "matmul_t shape mismatch");
        let mut out = Matrix::zeros(self.rows, b.rows);
        for i in 0..self.rows {
            let a = self.row(i);
            for j in 0..b.rows {
                out.data[i * b.rows + j] = a.iter().zip(b.row(j)).map(|(x, y)| x * y).sum();
            }
        }
        out
    }

    pub fn add_assign(&mut self, other: &Matrix) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }

    /// Adds the `1 x cols` row vector `b` to every row.
    pub fn add_row(&mut self, b: &Matrix) {
        for i in 0..self.rows {
            for (x, y) in self.row_mut(i).iter_mut().zip(&b.data) {
                *x += y;
            }
        }
    }

    pub fn column_sums(&self) -> Matrix {
        let mut out = Matrix::zeros(1, self.cols);
        for i in 0..self.rows {
            for (x, y) in out.data.iter_mut().zip(self.row(i)) {
                *x += y;
            }
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }
}

/// A trainable tensor with its gradient and Adam moments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Param {
    pub value: Matrix,
    #[serde(skip)]
    pub grad: Vec<f64>,
    #[serde(skip)]
    m: Vec<f64>,
    #[serde(skip)]
    v: Vec<f64>,
}

impl Param {
    pub fn new(value: Matrix) -> Self {
        let n = value.data.len();
        Param {
            value,
            grad: vec![0.0; n],
            m: vec![0.0; n],
            v: vec![0.0; n],
        }
    }

    pub fn zero_grad(&mut self) {
        self.grad.clear();
        self.grad.resize(self.value.data.len(), 0.0);
    }

    pub fn accumulate(&mut self, g: &Matrix) {
        if self.grad.len() != g.data.len() {
            self.zero_grad();
        }
        for (a, b) in self.grad.iter_mut().zip(&g.data) {
            *a += b;
        }
    }

    fn ensure_state(&mut self) {
        let n = self.value.data.len();
        if self.m.len() != n {
            self.m = vec![0.0; n];
            self.v = vec![0.0; n];
        }
        if self.grad.len() != n {
            self.grad = vec![0.0; n];
        }
    }
}

/// Adam with L2 weight decay added to the gradient.
#[derive(Debug, Clone)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub weight_decay: f64,
    t: i32,
}

impl Adam {
    pub fn new(lr: f64, weight_decay: f64) -> Self {
        Adam {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            weight_decay,
            t: 0,
        }
    }

    pub fn step(&mut self, params: &mut [&mut Param]) {
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t);
        let bc2 = 1.0 - self.beta2.powi(self.t);
        for p in params.iter_mut() {
            p.ensure_state();
            for i in 0..p.value.data.len() {
                let g = p.grad[i] + self.weight_decay * p.value.data[i];
                p.m[i] = self.beta1 * p.m[i] + (1.0 - self.beta1) * g;
                p.v[i] = self.beta2 * p.v[i] + (1.0 - self.beta2) * g * g;
                let mhat = p.m[i] / bc1;
                let vhat = p.v[i] / bc2;
                p.value.data[i] -= self.lr * mhat / (vhat.sqrt() + self.eps);
            }
        }
    }
}

/// `y = x W + b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Linear {
    pub w: Param,
    pub b: Param,
}

impl Linear {
    /// Glorot-uniform weights, zero bias.
    pub fn new(input: usize, output: usize, rng: &mut impl Rng) -> Self {
        let bound = (6.0 / (input + output) as f64).sqrt();
        Linear {
            w: Param::new(Matrix::uniform(input, output, bound, rng)),
            b: Param::new(Matrix::zeros(1, output)),
        }
    }

    pub fn forward(&self, x: &Matrix) -> Matrix {
        let mut y = x.matmul(&self.w.value);
        y.add_row(&self.b.value);
        y
    }

    /// Accumulates parameter gradients and returns `dL/dx`.
    pub fn backward(&mut self, x: &Matrix, dy: &Matrix) -> Matrix {
        self.w.accumulate(&x.t_matmul(dy));
        self.b.accumulate(&dy.column_sums());
        dy.matmul_t(&self.w.value)
    }

    pub fn params(&mut self) -> Vec<&mut Param> {
        vec![&mut self.w, &mut self.b]
    }
}

pub fn relu(x: &Matrix) -> Matrix {
    Matrix {
        rows: x.rows,
        cols: x.cols,
        data: x.data.iter().map(|&v| v.max(0.0)).collect(),
    }
}

/// `dy` masked to where the pre-activation was positive.
pub fn relu_backward(pre: &Matrix, dy: &Matrix) -> Matrix {
    Matrix {
        rows: dy.rows,
        cols: dy.cols,
        data: pre
            .data
            .iter()
            .zip(&dy.data)
            .map(|(&z, &d)| if z > 0.0 { d } else { 0.0 })
            .collect(),
    }
}

/// Inverted-dropout mask: kept entries hold `1 / (1 - p)`.
pub fn dropout_mask<R: Rng + ?Sized>(rows: usize, cols: usize, p: f64, rng: &mut R) -> Matrix {
    let keep = 1.0 / (1.0 - p);
    Matrix {
        rows,
        cols,
        data: (0..rows * cols)
            .map(|_| if rng.gen::<f64>() < p { 0.0 } else { keep })
            .collect(),
    }
}

pub fn hadamard(a: &Matrix, b: &Matrix) -> Matrix {
    Matrix {
        rows: a.rows,
        cols: a.cols,
        data: a.data.iter().zip(&b.data).map(|(x, y)| x * y).collect(),
    }
}

/// Two-layer perceptron `Linear -> ReLU -> Dropout -> Linear`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub l1: Linear,
    pub l2: Linear,
    pub dropout: f64,
}

/// Activations kept for the backward pass.
pub struct MlpCache {
    x: Matrix,
    pre: Matrix,
    hidden: Matrix,
    mask: Option<Matrix>,
}

impl Mlp {
    pub fn new(input: usize, hidden: usize, output: usize, dropout: f64, rng: &mut impl Rng) -> Self {
        Mlp {
            l1: Linear::new(input, hidden, rng),
            l2: Linear::new(hidden, output, rng),
            dropout,
        }
    }

    pub fn input_dim(&self) -> usize {
        self.l1.w.value.rows
    }

    pub fn forward(&self, x: &Matrix, train: Option<&mut dyn rand::RngCore>) -> (Matrix, MlpCache) {
        let pre = self.l1.forward(x);
        let mut hidden = relu(&pre);
        let mut mask = None;
        if let Some(rng) = train {
            if self.dropout > 0.0 {
                let m = dropout_mask(hidden.rows, hidden.cols, self.dropout, rng);
                hidden = hadamard(&hidden, &m);
                mask = Some(m);
            }
        }
        let out = self.l2.forward(&hidden);
        (
            out,
            MlpCache {
                x: x.clone(),
                pre,
                hidden,
                mask,
            },
        )
    }

    pub fn backward(&mut self, cache: &MlpCache, dy: &Matrix) -> Matrix {
        let mut dh = self.l2.backward(&cache.hidden, dy);
        if let Some(m) = &cache.mask {
            dh = hadamard(&dh, m);
        }
        let dpre = relu_backward(&cache.pre, &dh);
        self.l1.backward(&cache.x, &dpre)
    }

    pub fn params(&mut self) -> Vec<&mut Param> {
        let mut p = self.l1.params();
        p.extend(self.l2.params());
        p
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn products_agree() {
        let a = Matrix::from_vec(2, 3, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let b = Matrix::from_vec(3, 2, vec![7.0, 8.0, 9.0, 10.0, 11.0, 12.0]);
        assert_eq!(a.matmul(&b).data, vec![58.0, 64.0, 139.0, 154.0]);
        let at = Matrix::from_vec(3, 2, vec![1.0, 4.0, 2.0, 5.0, 3.0, 6.0]);
        assert_eq!(at.t_matmul(&b).data, a.matmul(&b).data);
        let bt = Matrix::from_vec(2, 3, vec![7.0, 9.0, 11.0, 8.0, 10.0, 12.0]);
        assert_eq!(a.matmul_t(&bt).data, a.matmul(&b).data);
    }

    #[test]
    fn adam_minimizes_a_quadratic() {
        let mut p = Param::new(Matrix::from_vec(1, 2, vec![3.0, -2.0]));
        let mut opt = Adam::new(0.1, 0.0);
        for _ in 0..500 {
            p.zero_grad();
            let g = Matrix::from_vec(1, 2, p.value.data.iter().map(|x| 2.0 * x).collect());
            p.accumulate(&g);
            opt.step(&mut [&mut p]);
        }
        assert!(p.value.data.iter().all(|x| x.abs() < 1e-2));
    }

    #[test]
    fn mlp_gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut mlp = Mlp::new(3, 5, 1, 0.0, &mut rng);
        let x = Matrix::uniform(4, 3, 1.0, &mut rng);
        let loss = |m: &Mlp| m.forward(&x, None).0.data.iter().map(|v| v * v).sum::<f64>();
        let (y, cache) = mlp.forward(&x, None);
        let dy = Matrix::from_vec(y.rows, y.cols, y.data.iter().map(|v| 2.0 * v).collect());
        for p in mlp.params() {
            p.zero_grad();
        }
        mlp.backward(&cache, &dy);
        let analytic = mlp.l1.w.grad.clone();
        for (i, a) in analytic.iter().enumerate() {
            let h = 1e-6;
            let mut plus = mlp.clone();
            plus.l1.w.value.data[i] += h;
            let mut minus = mlp.clone();
            minus.l1.w.value.data[i] -= h;
            let numeric = (loss(&plus) - loss(&minus)) / (2.0 * h);
            assert!((a - numeric).abs() <= 1e-4 * a.abs().max(numeric.abs()).max(1e-6));
        }
    }
}
