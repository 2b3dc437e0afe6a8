use super::nn::Matrix;
use crate::embeddings::{log_sigmoid, sigmoid};
use crate::{Error, Result};

/// Default number of negatives per positive in the unsupervised loss.
pub const DEFAULT_Q: f64 = 5.0;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `L = -(1/|E|) Σ w log σ(z_u·z_v) - Q · mean_neg log σ(-z_u·z_n)` and its
/// gradient with respect to every row of `z`.
pub fn unsupervised_loss(
    z: &Matrix,
    positives: &[(usize, usize, f64)],
    negatives: &[(usize, usize)],
    q: f64,
) -> Result<(f64, Matrix)> {
    if positives.is_empty() {
        return Err(Error::UndefinedLoss);
    }
    let mut grad = Matrix::zeros(z.rows, z.cols);
    let mut loss = 0.0;
    let e = positives.len() as f64;
    let push = |u: usize, v: usize, coeff: f64, grad: &mut Matrix| {
        for k in 0..z.cols {
            grad.data[u * z.cols + k] += coeff * z.data[v * z.cols + k];
            grad.data[v * z.cols + k] += coeff * z.data[u * z.cols + k];
        }
    };
    for &(u, v, w) in positives {
        let s = dot(z.row(u), z.row(v));
        loss -= w * log_sigmoid(s) / e;
        // d/ds of -log σ(s) is σ(s) - 1.
        push(u, v, w * (sigmoid(s) - 1.0) / e, &mut grad);
    }
    if !negatives.is_empty() {
        let scale = q / negatives.len() as f64;
        for &(u, v) in negatives {
            let s = dot(z.row(u), z.row(v));
            loss -= scale * log_sigmoid(-s);
            push(u, v, scale * sigmoid(s), &mut grad);
        }
    }
    Ok((loss, grad))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_dot_single_edge() {
        let z = Matrix::from_vec(2, 2, vec![1.0, 0.0, 0.0, 1.0]);
        let (l, _) = unsupervised_loss(&z, &[(0, 1, 1.0)], &[], DEFAULT_Q).unwrap();
        assert!((l - (-(0.5f64).ln())).abs() < 1e-12);
    }

    #[test]
    fn saturated_scores_drive_loss_to_zero() {
        let z = Matrix::from_vec(3, 1, vec![40.0, 40.0, -40.0]);
        let (l, _) = unsupervised_loss(&z, &[(0, 1, 1.0)], &[(0, 2)], DEFAULT_Q).unwrap();
        assert!(l.abs() < 1e-12);
    }

    #[test]
    fn empty_positives_are_an_error() {
        let z = Matrix::zeros(2, 2);
        assert!(matches!(
            unsupervised_loss(&z, &[], &[(0, 1)], 5.0),
            Err(Error::UndefinedLoss)
        ));
    }

    #[test]
    fn three_edge_fixture_matches_scalar_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let z = Matrix::uniform(4, 3, 1.0, &mut rng);
        let pos = [(0, 1, 2.0), (1, 2, 1.0), (2, 3, 3.0)];
        let neg = [(0, 3), (1, 3)];
        let (l, _) = unsupervised_loss(&z, &pos, &neg, 5.0).unwrap();
        let d = |a: usize, b: usize| -> f64 { (0..3).map(|k| z.data[a * 3 + k] * z.data[b * 3 + k]).sum() };
        let sig = |x: f64| 1.0 / (1.0 + (-x).exp());
        let pos_term = (2.0 * sig(d(0, 1)).ln() + sig(d(1, 2)).ln() + 3.0 * sig(d(2, 3)).ln()) / 3.0;
        let neg_term = 5.0 * ((sig(-d(0, 3))).ln() + (sig(-d(1, 3))).ln()) / 2.0;
        assert!((l - (-pos_term - neg_term)).abs() < 1e-10);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let z = Matrix::uniform(5, 4, 1.0, &mut rng);
        let pos = [(0, 1, 1.0), (1, 2, 2.0), (3, 4, 1.0)];
        let neg = [(0, 4), (2, 3)];
        let (_, g) = unsupervised_loss(&z, &pos, &neg, 5.0).unwrap();
        for i in 0..z.data.len() {
            let h = 1e-6 * rng.gen_range(0.9..1.1);
            let mut p = z.clone();
            p.data[i] += h;
            let mut m = z.clone();
            m.data[i] -= h;
            let numeric = (unsupervised_loss(&p, &pos, &neg, 5.0).unwrap().0
                - unsupervised_loss(&m, &pos, &neg, 5.0).unwrap().0)
                / (2.0 * h);
            let a = g.data[i];
            assert!(
                (a - numeric).abs() <= 1e-4 * a.abs().max(numeric.abs()).max(1e-6),
                "{a} vs {numeric}"
            );
        }
    }
}
