//! Matrix kernels: exponential, Mittag-Leffler function of a matrix, and
//! guarded linear solves.
//!
//! The matrix Mittag-Leffler routine picks between three strategies:
//!   1. the defining power series when the norm is small enough that
//!      cancellation stays below tolerance,
//!   2. spectral evaluation through Lagrange-Sylvester interpolation on the
//!      (clustered) eigenvalues when the matrix is diagonalizable with
//!      well-separated clusters,
//!   3. a Cauchy-integral fallback over a circular contour enclosing the
//!      spectrum (handles defective matrices such as Erlang blocks).

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::ml::{ml_complex, MlParams};
use crate::error::{Error, Result};

type CMatrix = DMatrix<Complex64>;

/// Matrix exponential via scaling-and-squaring Padé (nalgebra).
pub fn matrix_exp(m: &DMatrix<f64>) -> DMatrix<f64> {
    m.exp()
}

/// Solve A x = b, reporting near-singular pivots as an error.
pub fn solve_linear(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    debug_assert_eq!(a.nrows(), a.ncols());
    debug_assert_eq!(a.nrows(), b.len());
    let scale = a.amax().max(1e-300);
    let lu = a.clone().lu();
    let min_pivot = lu.u().diagonal().iter().fold(f64::INFINITY, |m, d| m.min(d.abs()));
    if min_pivot < 1e-13 * scale {
        return Err(Error::Singular(format!(
            "pivot {min_pivot:e} below threshold for matrix of scale {scale:e}"
        )));
    }
    lu.solve(b)
        .ok_or_else(|| Error::Singular("LU solve failed".into()))
}

/// Solve A X = B with a matrix right-hand side, same singularity guard as
/// `solve_linear`.
pub fn solve_linear_matrix(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    debug_assert_eq!(a.nrows(), a.ncols());
    debug_assert_eq!(a.nrows(), b.nrows());
    let scale = a.amax().max(1e-300);
    let lu = a.clone().lu();
    let min_pivot = lu.u().diagonal().iter().fold(f64::INFINITY, |m, d| m.min(d.abs()));
    if min_pivot < 1e-13 * scale {
        return Err(Error::Singular(format!(
            "pivot {min_pivot:e} below threshold for matrix of scale {scale:e}"
        )));
    }
    lu.solve(b)
        .ok_or_else(|| Error::Singular("LU solve failed".into()))
}

/// Solve xᵀ A = bᵀ for a row vector b (convenience for initial-vector
/// algebra).
pub fn solve_linear_left(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    solve_linear(&a.transpose(), b)
}

fn to_complex(m: &DMatrix<f64>) -> CMatrix {
    m.map(|x| Complex64::new(x, 0.0))
}

fn max_abs_complex(m: &CMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

/// E_{α,β}(M) = Σ M^k / Γ(αk + β).
pub fn ml_matrix(params: MlParams, m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if m.nrows() != m.ncols() || m.nrows() == 0 {
        return Err(Error::Invalid("ml_matrix requires a nonempty square matrix".into()));
    }
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::Domain("ml_matrix requires finite entries".into()));
    }
    let (alpha, beta) = (params.alpha(), params.beta());
    if alpha == 1.0 && beta == 1.0 {
        return Ok(matrix_exp(m));
    }
    let norm1 = m
        .column_iter()
        .map(|c| c.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0_f64, f64::max);
    if norm1 == 0.0 {
        return Ok(DMatrix::identity(m.nrows(), m.nrows()) * super::gamma::rgamma(beta));
    }
    if norm1.powf(1.0 / alpha) < 8.0 {
        return ml_matrix_series(alpha, beta, m);
    }
    let eigs: Vec<Complex64> = m.clone().complex_eigenvalues().iter().copied().collect();
    if let Some(result) = ml_matrix_spectral(alpha, beta, m, &eigs)? {
        return Ok(result);
    }
    ml_matrix_contour(alpha, beta, m, &eigs)
}

fn ml_matrix_series(alpha: f64, beta: f64, m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let p = m.nrows();
    let mut sum = DMatrix::<f64>::zeros(p, p);
    let mut term = DMatrix::<f64>::identity(p, p);
    for k in 0..1_000usize {
        let coeff = super::gamma::rgamma(alpha * k as f64 + beta);
        sum += &term * coeff;
        term *= m;
        let tmax = term.amax();
        if !tmax.is_finite() {
            return Err(Error::Accuracy("matrix ML series overflowed".into()));
        }
        if k > 4 && tmax * super::gamma::rgamma(alpha * (k + 1) as f64 + beta).abs() < 1e-17 * sum.amax().max(1.0) {
            // one more sanity term: the coefficient sequence is eventually
            // decreasing, so the bound above controls the tail
            let next = super::gamma::rgamma(alpha * (k + 2) as f64 + beta).abs();
            if tmax * m.amax().max(1.0) * next < 1e-16 * sum.amax().max(1.0) {
                return Ok(sum);
            }
        }
    }
    Err(Error::Accuracy("matrix ML series did not converge".into()))
}

/// Cluster eigenvalues, verify the clustered minimal polynomial annihilates
/// the matrix (diagonalizability up to tolerance), then interpolate:
/// f(M) = Σ f(μ_i) Π_{j≠i} (M - μ_j I)/(μ_i - μ_j).
/// Returns Ok(None) when the matrix looks defective or clusters are too
/// close for the interpolation to be well conditioned.
fn ml_matrix_spectral(
    alpha: f64,
    beta: f64,
    m: &DMatrix<f64>,
    eigs: &[Complex64],
) -> Result<Option<DMatrix<f64>>> {
    let p = m.nrows();
    let scale = eigs.iter().fold(0.0_f64, |a, z| a.max(z.norm())).max(1.0);
    let cluster_tol = 1e-7 * scale;

    let mut reps: Vec<(Complex64, usize)> = Vec::new();
    for &lam in eigs {
        match reps.iter_mut().find(|(r, n)| (*r / *n as f64 - lam).norm() < cluster_tol * (*n as f64).max(1.0)) {
            Some((r, n)) => {
                *r += lam;
                *n += 1;
            }
            None => reps.push((lam, 1)),
        }
    }
    let reps: Vec<Complex64> = reps.iter().map(|(s, n)| s / *n as f64).collect();

    // well-separated clusters required for conditioning
    for i in 0..reps.len() {
        for j in 0..i {
            if (reps[i] - reps[j]).norm() < 1e-5 * scale {
                return Ok(None);
            }
        }
    }

    let mc = to_complex(m);
    let id = CMatrix::identity(p, p);

    // minimal-polynomial annihilation test
    let mut prod = id.clone();
    let mut denom = 1.0_f64;
    for &mu in &reps {
        prod = &prod * (&mc - &id * mu);
        denom *= max_abs_complex(&(&mc - &id * mu)).max(1e-30);
    }
    if max_abs_complex(&prod) > 1e-8 * denom {
        return Ok(None); // defective
    }

    let mut sum = CMatrix::zeros(p, p);
    for (i, &mu_i) in reps.iter().enumerate() {
        let mut li = id.clone();
        for (j, &mu_j) in reps.iter().enumerate() {
            if i != j {
                li = &li * (&mc - &id * mu_j) / (mu_i - mu_j);
            }
        }
        let f = ml_complex(alpha, beta, mu_i)?;
        sum += li * f;
    }
    let imag = sum.iter().fold(0.0_f64, |a, z| a.max(z.im.abs()));
    let real_scale = sum.iter().fold(0.0_f64, |a, z| a.max(z.re.abs())).max(1.0);
    if imag > 1e-8 * real_scale {
        return Ok(None); // interpolation lost accuracy, let the contour try
    }
    Ok(Some(sum.map(|z| z.re)))
}

/// Trapezoidal Cauchy integral over a circle enclosing the spectrum:
/// f(M) = (1/2πi) ∮ f(z) (zI - M)^{-1} dz.
fn ml_matrix_contour(
    alpha: f64,
    beta: f64,
    m: &DMatrix<f64>,
    eigs: &[Complex64],
) -> Result<DMatrix<f64>> {
    const NODES: usize = 256;
    let p = m.nrows();
    let center: Complex64 = eigs.iter().sum::<Complex64>() / eigs.len() as f64;
    let center = Complex64::new(center.re, 0.0); // conjugate symmetry
    let spread = eigs.iter().fold(0.0_f64, |a, z| a.max((z - center).norm()));
    let radius = 1.2 * spread + 1.0;

    let mc = to_complex(m);
    let mut sum = CMatrix::zeros(p, p);
    for k in 0..NODES {
        let theta = 2.0 * std::f64::consts::PI * k as f64 / NODES as f64;
        let dir = Complex64::new(theta.cos(), theta.sin());
        let z = center + radius * dir;
        let f = ml_complex(alpha, beta, z)?;
        let a = CMatrix::identity(p, p) * z - &mc;
        let lu = a.lu();
        let inv = lu
            .solve(&CMatrix::identity(p, p))
            .ok_or_else(|| Error::Accuracy("resolvent solve failed on contour".into()))?;
        sum += inv * (f * radius * dir);
    }
    sum /= Complex64::from(NODES as f64);
    let imag = sum.iter().fold(0.0_f64, |a, z| a.max(z.im.abs()));
    let real_scale = sum.iter().fold(0.0_f64, |a, z| a.max(z.re.abs())).max(1.0);
    if imag > 1e-8 * real_scale {
        return Err(Error::Accuracy(format!(
            "matrix ML contour left imaginary residue {imag:e}"
        )));
    }
    Ok(sum.map(|z| z.re))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::ml::ml_scalar;

    fn params(a: f64, b: f64) -> MlParams {
        MlParams::new(a, b).unwrap()
    }

    #[test]
    fn exp_of_zero_is_identity() {
        let z = DMatrix::<f64>::zeros(3, 3);
        assert_eq!(matrix_exp(&z), DMatrix::identity(3, 3));
    }

    #[test]
    fn exp_of_nilpotent() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        let e = matrix_exp(&m);
        let expected = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        assert!((e - expected).amax() < 1e-14);
    }

    #[test]
    fn exp_of_diagonal() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![-1.0, -2.0]));
        let e = matrix_exp(&m);
        assert!((e[(0, 0)] - (-1.0_f64).exp()).abs() < 1e-14);
        assert!((e[(1, 1)] - (-2.0_f64).exp()).abs() < 1e-14);
        assert!(e[(0, 1)].abs() < 1e-16);
    }

    #[test]
    fn exp_commuting_product_rule() {
        // diagonal and a scalar multiple commute
        let a = DMatrix::from_diagonal(&DVector::from_vec(vec![-1.0, 0.5, -2.0]));
        let b = &a * 0.3;
        let lhs = matrix_exp(&(&a + &b));
        let rhs = matrix_exp(&a) * matrix_exp(&b);
        assert!((lhs - rhs).amax() < 1e-12);
    }

    #[test]
    fn solve_identity_and_diagonal() {
        let i = DMatrix::<f64>::identity(3, 3);
        let b = DVector::from_vec(vec![1.0, 2.0, 3.0]);
        assert!((solve_linear(&i, &b).unwrap() - &b).amax() < 1e-14);

        let d = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 4.0]));
        let b = DVector::from_vec(vec![2.0, 4.0]);
        let x = solve_linear(&d, &b).unwrap();
        assert!((x - DVector::from_element(2, 1.0)).amax() < 1e-14);
    }

    #[test]
    fn solve_singular_detected() {
        let s = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        let b = DVector::from_vec(vec![1.0, 2.0]);
        assert!(matches!(solve_linear(&s, &b), Err(Error::Singular(_))));
    }

    #[test]
    fn ml_diagonal_case() {
        let d = DMatrix::from_diagonal(&DVector::from_vec(vec![-1.0, -4.0, 2.0]));
        let e = ml_matrix(params(0.7, 0.7), &d).unwrap();
        for (i, &lam) in [-1.0, -4.0, 2.0].iter().enumerate() {
            let s = ml_scalar(params(0.7, 0.7), lam).unwrap();
            assert!((e[(i, i)] - s).abs() < 1e-10, "diag {i}");
        }
        assert!(e[(0, 1)].abs() < 1e-10);
    }

    #[test]
    fn ml_alpha_one_is_exp() {
        let m = DMatrix::from_row_slice(2, 2, &[-3.0, 2.0, 1.0, -4.0]);
        let e = ml_matrix(params(1.0, 1.0), &m).unwrap();
        assert!((e - matrix_exp(&m)).amax() < 1e-12);
    }

    #[test]
    fn ml_fig3_block_frozen_value() {
        // E_{0.9,0.9}([[-3,2],[0,-4]]); reference: 500-term mpmath series
        let m = DMatrix::from_row_slice(2, 2, &[-3.0, 2.0, 0.0, -4.0]);
        let e = ml_matrix(params(0.9, 0.9), &m).unwrap();
        let expected = [
            [0.044151271783037725, 0.048454849280502950],
            [0.0, 0.019923847142786250],
        ];
        for i in 0..2 {
            for j in 0..2 {
                assert!(
                    (e[(i, j)] - expected[i][j]).abs() < 1e-10,
                    "entry ({i},{j}): {} vs {}",
                    e[(i, j)],
                    expected[i][j]
                );
            }
        }
    }

    #[test]
    fn ml_defective_erlang_block() {
        // repeated eigenvalue with a single Jordan block forces the contour
        let lam = 1.5_f64;
        let m = DMatrix::from_row_slice(2, 2, &[-lam, lam, 0.0, -lam]) * 3.0_f64.powf(0.8);
        let e = ml_matrix(params(0.8, 1.0), &m).unwrap();
        // check against a straight series evaluation (norm is small enough
        // for reduced precision, so compare loosely)
        let series = ml_matrix_series(0.8, 1.0, &m).unwrap();
        assert!((&e - &series).amax() < 1e-8, "diff {}", (&e - &series).amax());
    }

    #[test]
    fn ml_similarity_invariance() {
        // V E(D) V^{-1} equals E(V D V^{-1})
        let d = DMatrix::from_diagonal(&DVector::from_vec(vec![-0.5, -1.5, -3.5]));
        let v = DMatrix::from_row_slice(3, 3, &[1.0, 0.3, 0.0, -0.2, 1.0, 0.5, 0.1, 0.0, 1.0]);
        let vinv = v.clone().try_inverse().unwrap();
        let m = &v * &d * &vinv;
        let p = params(0.6, 1.0);
        let lhs = ml_matrix(p, &m).unwrap();
        let ed = ml_matrix(p, &d).unwrap();
        let rhs = &v * ed * &vinv;
        assert!((lhs - rhs).amax() < 1e-8);
    }

    #[test]
    fn ml_matches_series_for_moderate_norm() {
        // pseudo-random 3x3 with norm <= 2: spectral route vs raw series
        let m = DMatrix::from_row_slice(
            3,
            3,
            &[-0.7, 0.4, 0.1, 0.2, -1.1, 0.6, 0.05, 0.3, -0.9],
        );
        let series = ml_matrix_series(0.7, 0.7, &m).unwrap();
        let spectral = {
            let eigs: Vec<Complex64> = m.clone().complex_eigenvalues().iter().copied().collect();
            ml_matrix_spectral(0.7, 0.7, &m, &eigs).unwrap().unwrap()
        };
        assert!((series - spectral).amax() < 1e-9);
    }
}
