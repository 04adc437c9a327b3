//! Symmetric eigensolvers.
//!
//! Two routes share the same tridiagonal QL core:
//! - [`dense_symmetric_eig`]: Householder tridiagonalization followed by
//!   implicit-shift QL with accumulated transformations. Full spectrum.
//! - [`lanczos_top_k`]: Krylov iteration with full reorthogonalization for
//!   the largest eigenpairs of a matrix given only as a matvec closure.
//!
//! Both return eigenvalues in descending order with unit-norm eigenvectors.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Largest eigenpairs of a symmetric operator.
pub struct EigenPairs {
    /// Eigenvalues, descending.
    pub values: Vec<f64>,
    /// Unit-norm eigenvectors; column `i` pairs with `values[i]`.
    pub vectors: Array2<f64>,
    /// Two-norm residuals `‖A v − λ v‖` per retained pair.
    pub residuals: Vec<f64>,
    /// Matrix-vector products spent.
    pub matvecs: usize,
}

/// Householder reduction of a symmetric matrix to tridiagonal form, with the
/// orthogonal transformation accumulated in place (EISPACK tred2).
///
/// On return `a` holds Q with `A = Q T Qᵀ`, `d` the diagonal of T and `e`
/// the subdiagonal (`e[0]` unused).
fn householder_tridiagonalize(a: &mut Array2<f64>, d: &mut [f64], e: &mut [f64]) {
    let n = a.nrows();
    for i in (1..n).rev() {
        let l = i - 1;
        let mut h = 0.0;
        if l > 0 {
            let scale: f64 = (0..=l).map(|k| a[[i, k]].abs()).sum();
            if scale == 0.0 {
                e[i] = a[[i, l]];
            } else {
                for k in 0..=l {
                    a[[i, k]] /= scale;
                    h += a[[i, k]] * a[[i, k]];
                }
                let f = a[[i, l]];
                let g = if f >= 0.0 { -h.sqrt() } else { h.sqrt() };
                e[i] = scale * g;
                h -= f * g;
                a[[i, l]] = f - g;
                let mut f_acc = 0.0;
                for j in 0..=l {
                    a[[j, i]] = a[[i, j]] / h;
                    let mut g_acc = 0.0;
                    for k in 0..=j {
                        g_acc += a[[j, k]] * a[[i, k]];
                    }
                    for k in (j + 1)..=l {
                        g_acc += a[[k, j]] * a[[i, k]];
                    }
                    e[j] = g_acc / h;
                    f_acc += e[j] * a[[i, j]];
                }
                let hh = f_acc / (h + h);
                for j in 0..=l {
                    let f = a[[i, j]];
                    let g = e[j] - hh * f;
                    e[j] = g;
                    for k in 0..=j {
                        a[[j, k]] -= f * e[k] + g * a[[i, k]];
                    }
                }
            }
        } else {
            e[i] = a[[i, l]];
        }
        d[i] = h;
    }
    d[0] = 0.0;
    e[0] = 0.0;
    for i in 0..n {
        if d[i] != 0.0 {
            for j in 0..i {
                let mut g = 0.0;
                for k in 0..i {
                    g += a[[i, k]] * a[[k, j]];
                }
                for k in 0..i {
                    a[[k, j]] -= g * a[[k, i]];
                }
            }
        }
        d[i] = a[[i, i]];
        a[[i, i]] = 1.0;
        for j in 0..i {
            a[[j, i]] = 0.0;
            a[[i, j]] = 0.0;
        }
    }
}

fn hypot(a: f64, b: f64) -> f64 {
    a.hypot(b)
}

/// Implicit-shift QL on a symmetric tridiagonal matrix (EISPACK tql2).
///
/// `d` holds the diagonal, `e` the subdiagonal in `e[1..n]`. Eigenvalues
/// replace `d` (unsorted); the rotations are accumulated into the columns of
/// `z`, so passing the identity yields eigenvectors of T and passing the
/// Householder Q yields eigenvectors of the original matrix.
fn tridiagonal_ql(d: &mut [f64], e: &mut [f64], z: &mut Array2<f64>) -> Result<()> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    let zn = z.nrows();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 64 {
                return Err(Error::EigenNonConvergence {
                    matvecs: 0,
                    residual: e[l].abs(),
                    tolerance: f64::EPSILON,
                });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = hypot(g, 1.0);
            let sign_r = if g >= 0.0 { r.abs() } else { -r.abs() };
            g = d[m] - d[l] + e[l] / (g + sign_r);
            let mut s = 1.0;
            let mut c = 1.0;
            let mut p = 0.0;
            let mut underflow = false;
            for i in (l..m).rev() {
                let mut f = s * e[i];
                let b = c * e[i];
                r = hypot(f, g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for k in 0..zn {
                    f = z[[k, i + 1]];
                    z[[k, i + 1]] = s * z[[k, i]] + c * f;
                    z[[k, i]] = c * z[[k, i]] - s * f;
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// Full eigendecomposition of a dense symmetric matrix.
///
/// Returns all eigenvalues in descending order and the matching unit-norm
/// eigenvector columns. Only the lower triangle of `a` is read.
pub fn dense_symmetric_eig(a: &Array2<f64>) -> Result<(Vec<f64>, Array2<f64>)> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::dims(format!(
            "symmetric eigensolve needs a square matrix, got {}x{}",
            n,
            a.ncols()
        )));
    }
    if n == 0 {
        return Ok((Vec::new(), Array2::zeros((0, 0))));
    }
    let mut q = a.clone();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    householder_tridiagonalize(&mut q, &mut d, &mut e);
    tridiagonal_ql(&mut d, &mut e, &mut q)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[j].partial_cmp(&d[i]).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| d[i]).collect();
    let mut vectors = Array2::zeros((n, n));
    for (dst, &src) in order.iter().enumerate() {
        for r in 0..n {
            vectors[[r, dst]] = q[[r, src]];
        }
    }
    fix_column_signs(&mut vectors);
    Ok((values, vectors))
}

/// Make each eigenvector's largest-magnitude component positive so the sign
/// convention is deterministic across solver paths.
fn fix_column_signs(vectors: &mut Array2<f64>) {
    let (n, k) = (vectors.nrows(), vectors.ncols());
    for c in 0..k {
        let mut best = 0usize;
        let mut best_abs = 0.0;
        for r in 0..n {
            let v = vectors[[r, c]].abs();
            if v > best_abs {
                best_abs = v;
                best = r;
            }
        }
        if vectors[[best, c]] < 0.0 {
            for r in 0..n {
                vectors[[r, c]] = -vectors[[r, c]];
            }
        }
    }
}

/// Largest `k` eigenpairs of a symmetric operator available only through
/// `apply` (y = A x), via Lanczos with full reorthogonalization.
///
/// The Krylov subspace grows until every requested Ritz pair has residual
/// below `tol` or the matvec budget is exhausted; hitting the budget with
/// unconverged pairs is an error carrying the worst residual.
pub fn lanczos_top_k<F>(
    apply: F,
    n: usize,
    k: usize,
    tol: f64,
    max_matvecs: usize,
    seed: u64,
) -> Result<EigenPairs>
where
    F: Fn(&[f64], &mut [f64]),
{
    if k == 0 || k > n {
        return Err(Error::invalid(format!(
            "requested {k} eigenpairs from an operator of dimension {n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new(); // beta[j] couples v_j and v_{j+1}
    let mut matvecs = 0usize;

    let mut v = random_unit(&mut rng, n);
    basis.push(v.clone());

    let mut w = vec![0.0; n];
    let mut target = (2 * k + 16).min(n);
    let mut last_worst = f64::INFINITY;

    loop {
        // Grow the Krylov basis to the current target size.
        while basis.len() <= target && alpha.len() < target {
            let j = alpha.len();
            apply(&v, &mut w);
            matvecs += 1;
            if j > 0 {
                let b = beta[j - 1];
                let prev = &basis[j - 1];
                for i in 0..n {
                    w[i] -= b * prev[i];
                }
            }
            let a = dot(&w, &v);
            alpha.push(a);
            for i in 0..n {
                w[i] -= a * v[i];
            }
            // Two rounds of classical Gram-Schmidt keep the basis orthogonal
            // to machine precision.
            for _ in 0..2 {
                for prev in &basis {
                    let proj = dot(&w, prev);
                    if proj != 0.0 {
                        for i in 0..n {
                            w[i] -= proj * prev[i];
                        }
                    }
                }
            }
            let b = dot(&w, &w).sqrt();
            if b < 1e-13 {
                // Invariant subspace: restart with a fresh direction
                // orthogonal to everything found so far.
                if basis.len() == n {
                    beta.push(0.0);
                    break;
                }
                let mut fresh = random_unit(&mut rng, n);
                for _ in 0..2 {
                    for prev in &basis {
                        let proj = dot(&fresh, prev);
                        for i in 0..n {
                            fresh[i] -= proj * prev[i];
                        }
                    }
                }
                let norm = dot(&fresh, &fresh).sqrt();
                if norm < 1e-13 {
                    beta.push(0.0);
                    break;
                }
                for x in fresh.iter_mut() {
                    *x /= norm;
                }
                beta.push(0.0);
                v = fresh;
                basis.push(v.clone());
                continue;
            }
            beta.push(b);
            for i in 0..n {
                v[i] = w[i] / b;
            }
            basis.push(v.clone());
        }

        let m = alpha.len();
        // Ritz pairs of the tridiagonal restriction.
        let mut d = alpha.clone();
        let mut e = vec![0.0; m];
        for i in 1..m {
            e[i] = beta[i - 1];
        }
        let mut s = Array2::eye(m);
        tridiagonal_ql(&mut d, &mut e, &mut s)?;
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&i, &j| d[j].partial_cmp(&d[i]).unwrap());
        let take = k.min(m);

        // Residual bound for Ritz pair i is |beta_m * s[m-1, i]|.
        let tail = if m < basis.len() && m > 0 {
            beta[m - 1]
        } else {
            0.0
        };
        let mut worst: f64 = 0.0;
        for &idx in order.iter().take(take) {
            worst = worst.max((tail * s[[m - 1, idx]]).abs());
        }

        let exhausted_space = m == n;
        if (take == k && worst <= tol) || exhausted_space {
            // Assemble Ritz vectors and verify residuals explicitly.
            let mut values = Vec::with_capacity(take);
            let mut vectors = Array2::<f64>::zeros((n, take));
            for (col, &idx) in order.iter().take(take).enumerate() {
                values.push(d[idx]);
                for (j, bv) in basis.iter().take(m).enumerate() {
                    let c = s[[j, idx]];
                    if c != 0.0 {
                        for r in 0..n {
                            vectors[[r, col]] += c * bv[r];
                        }
                    }
                }
                // Normalize; Ritz combinations are unit up to roundoff.
                let mut norm = 0.0;
                for r in 0..n {
                    norm += vectors[[r, col]] * vectors[[r, col]];
                }
                let norm = norm.sqrt();
                if norm > 0.0 {
                    for r in 0..n {
                        vectors[[r, col]] /= norm;
                    }
                }
            }
            fix_column_signs(&mut vectors);

            let mut residuals = Vec::with_capacity(take);
            let mut av = vec![0.0; n];
            let mut x = vec![0.0; n];
            let mut verified_worst: f64 = 0.0;
            for col in 0..take {
                for r in 0..n {
                    x[r] = vectors[[r, col]];
                }
                apply(&x, &mut av);
                matvecs += 1;
                let mut res = 0.0;
                for r in 0..n {
                    let diff = av[r] - values[col] * x[r];
                    res += diff * diff;
                }
                let res = res.sqrt();
                residuals.push(res);
                verified_worst = verified_worst.max(res);
            }
            if take < k || (verified_worst > tol && !exhausted_space) {
                if matvecs >= max_matvecs {
                    return Err(Error::EigenNonConvergence {
                        matvecs,
                        residual: verified_worst,
                        tolerance: tol,
                    });
                }
            } else {
                return Ok(EigenPairs {
                    values,
                    vectors,
                    residuals,
                    matvecs,
                });
            }
        }

        if matvecs >= max_matvecs {
            return Err(Error::EigenNonConvergence {
                matvecs,
                residual: if last_worst.is_finite() { last_worst } else { worst },
                tolerance: tol,
            });
        }
        last_worst = worst;
        target = (target * 2).min(n).min(target + (max_matvecs - matvecs));
        if target <= m {
            target = (m + 1).min(n);
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn random_unit(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() - 0.5).collect();
        let norm = dot(&v, &v).sqrt();
        if norm > 1e-6 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}
