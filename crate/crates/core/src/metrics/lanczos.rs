//! Leading eigenpairs of a symmetric operator: block Krylov iteration with
//! full reorthogonalization and Rayleigh–Ritz extraction. The block start
//! resolves repeated eigenvalues (up to the block size), which symmetric
//! maps produce routinely.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::MetricError;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LanczosParams {
    /// Residual tolerance relative to `max(1, |θ|)`.
    pub tol: f64,
    /// Cap on the Krylov basis size.
    pub max_basis: usize,
    pub block: usize,
    pub seed: u64,
}

impl Default for LanczosParams {
    fn default() -> Self {
        LanczosParams { tol: 1e-9, max_basis: 2000, block: 4, seed: 0x5eed_d1ff }
    }
}

/// Largest `count` eigenvalues (descending) of the symmetric operator `op`
/// on `R^n`, with unit eigenvectors.
pub fn top_eigenpairs<F>(
    n: usize,
    count: usize,
    op: F,
    params: LanczosParams,
) -> Result<(Vec<f64>, Vec<Vec<f64>>), MetricError>
where
    F: Fn(&[f64], &mut [f64]),
{
    let count = count.min(n);
    if count == 0 {
        return Ok((Vec::new(), Vec::new()));
    }
    let max_basis = params.max_basis.min(n).max(count);
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);

    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut images: Vec<Vec<f64>> = Vec::new();
    // projected operator, grown row by row
    let mut h: Vec<Vec<f64>> = Vec::new();

    let mut block: Vec<Vec<f64>> =
        (0..params.block.max(1)).map(|_| (0..n).map(|_| rng.gen::<f64>() - 0.5).collect()).collect();
    let mut next_check = (2 * count + 16).min(max_basis);

    loop {
        let mut added = 0;
        for mut v in block.drain(..) {
            if basis.len() == max_basis {
                break;
            }
            let before = norm(&v);
            for _ in 0..2 {
                for b in &basis {
                    let c = dot(b, &v);
                    axpy(-c, b, &mut v);
                }
            }
            let after = norm(&v);
            if !(after > 1e-10 * before.max(1e-300)) || after < 1e-14 {
                continue;
            }
            v.iter_mut().for_each(|x| *x /= after);
            let mut av = vec![0.0; n];
            op(&v, &mut av);
            let row: Vec<f64> = basis.iter().map(|b| dot(b, &av)).chain(std::iter::once(dot(&v, &av))).collect();
            for (i, r) in h.iter_mut().enumerate() {
                r.push(row[i]);
            }
            h.push(row);
            basis.push(v);
            images.push(av);
            added += 1;
        }
        let m = basis.len();
        let exhausted = added == 0 || m == max_basis;

        if m >= next_check || exhausted {
            if let Some(found) = ritz(&basis, &images, &h, count, params.tol, exhausted && m < max_basis) {
                return Ok(found);
            }
            if exhausted {
                return Err(MetricError::EigenNoConvergence { iterations: m });
            }
            next_check = (next_check + next_check / 2).min(max_basis);
        }
        // next block: images of the last block's vectors
        let take = added.min(params.block.max(1));
        block = images[m - take..].to_vec();
    }
}

#[allow(clippy::type_complexity)]
fn ritz(
    basis: &[Vec<f64>],
    images: &[Vec<f64>],
    h: &[Vec<f64>],
    count: usize,
    tol: f64,
    invariant: bool,
) -> Option<(Vec<f64>, Vec<Vec<f64>>)> {
    let m = basis.len();
    if m < count {
        return None;
    }
    let n = basis[0].len();
    let hm = DMatrix::from_fn(m, m, |i, j| 0.5 * (h[i][j] + h[j][i]));
    let eig = SymmetricEigen::new(hm);
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let mut values = Vec::with_capacity(count);
    let mut vectors = Vec::with_capacity(count);
    for &i in &order[..count] {
        let theta = eig.eigenvalues[i];
        let mut x = vec![0.0; n];
        let mut ax = vec![0.0; n];
        for j in 0..m {
            let c = eig.eigenvectors[(j, i)];
            axpy(c, &basis[j], &mut x);
            axpy(c, &images[j], &mut ax);
        }
        let xn = norm(&x);
        let resid = ax.iter().zip(&x).map(|(a, b)| (a - theta * b).powi(2)).sum::<f64>().sqrt() / xn;
        if !invariant && resid > tol * theta.abs().max(1.0) {
            return None;
        }
        x.iter_mut().for_each(|v| *v /= xn);
        values.push(theta);
        vectors.push(x);
    }
    Some((values, vectors))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn axpy(c: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += c * xi;
    }
}
