//! Python bindings: scalar special functions plus the main distribution
//! types. Matrices cross the boundary as nested lists of floats; every
//! sampling method takes an explicit seed so results are reproducible
//! from Python too.

use nalgebra::{DMatrix, DVector};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use fracphase::constructors::{bivariate_demo, BivariateModel, BivariateRegion};
use fracphase::frac_phase::FracPHDist;
use fracphase::mph::{MPHAlphaDist, PowerVector, RewardMatrix};
use fracphase::numerics::{self, MlParams};
use fracphase::phase_type::{ph_validate, PHDist};
use fracphase::random::RngStream;

fn err(e: fracphase::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_matrix(rows: Vec<Vec<f64>>, what: &str) -> PyResult<DMatrix<f64>> {
    if rows.is_empty() || rows.iter().any(|r| r.len() != rows[0].len()) {
        return Err(PyValueError::new_err(format!("{what}: need a rectangular non-empty matrix")));
    }
    let ncols = rows[0].len();
    Ok(DMatrix::from_row_iterator(
        rows.len(),
        ncols,
        rows.iter().flat_map(|r| r.iter().copied()),
    ))
}

/// Gamma function for positive arguments.
#[pyfunction]
fn gamma(x: f64) -> PyResult<f64> {
    numerics::gamma(x).map_err(err)
}

/// Mittag-Leffler function E_{alpha,beta}(z) for real z, alpha in (0, 1].
#[pyfunction]
fn ml(alpha: f64, beta: f64, z: f64) -> PyResult<f64> {
    numerics::ml_scalar(MlParams::new(alpha, beta).map_err(err)?, z).map_err(err)
}

/// Classical phase-type distribution PH(pi, T).
#[pyclass]
struct PhaseType {
    inner: PHDist,
}

#[pymethods]
impl PhaseType {
    #[new]
    fn new(pi: Vec<f64>, t: Vec<Vec<f64>>) -> PyResult<Self> {
        let inner = ph_validate(DVector::from_vec(pi), to_matrix(t, "T")?).map_err(err)?;
        Ok(Self { inner })
    }

    fn density(&self, x: f64) -> PyResult<f64> {
        self.inner.density(x).map_err(err)
    }

    fn cdf(&self, x: f64) -> PyResult<f64> {
        self.inner.cdf(x).map_err(err)
    }

    fn laplace(&self, u: f64) -> PyResult<f64> {
        self.inner.laplace(u).map_err(err)
    }

    fn sample(&self, n: usize, seed: u64) -> PyResult<Vec<f64>> {
        let mut rng = RngStream::new(seed, 0);
        (0..n)
            .map(|_| self.inner.sample_path(&mut rng).map(|p| p.total).map_err(err))
            .collect()
    }
}

/// Fractional phase-type distribution with Mittag-Leffler sojourns.
#[pyclass]
struct FracPhaseType {
    inner: FracPHDist,
}

#[pymethods]
impl FracPhaseType {
    #[new]
    fn new(pi: Vec<f64>, t: Vec<Vec<f64>>, alpha: f64) -> PyResult<Self> {
        let base = ph_validate(DVector::from_vec(pi), to_matrix(t, "T")?).map_err(err)?;
        Ok(Self { inner: FracPHDist::new(base, alpha).map_err(err)? })
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.inner.alpha()
    }

    #[getter]
    fn atom(&self) -> f64 {
        self.inner.atom()
    }

    fn density(&self, x: f64) -> PyResult<f64> {
        self.inner.density(x).map_err(err)
    }

    fn cdf(&self, x: f64) -> PyResult<f64> {
        self.inner.cdf(x).map_err(err)
    }

    fn laplace(&self, u: f64) -> PyResult<f64> {
        self.inner.laplace(u).map_err(err)
    }

    /// Semi-Markov transition matrix E_{alpha,1}(T t^alpha) as row lists.
    fn transition_matrix(&self, t: f64) -> PyResult<Vec<Vec<f64>>> {
        let m = self.inner.transition_matrix(t).map_err(err)?;
        Ok((0..m.nrows())
            .map(|i| m.row(i).iter().copied().collect())
            .collect())
    }

    #[pyo3(signature = (n, seed, sampler = "path"))]
    fn sample(&self, n: usize, seed: u64, sampler: &str) -> PyResult<Vec<f64>> {
        let mut rng = RngStream::new(seed, 0);
        (0..n)
            .map(|_| match sampler {
                "path" => self.inner.sample_path(&mut rng).map(|p| p.total).map_err(err),
                "product" => self.inner.sample_product(&mut rng).map_err(err),
                other => Err(PyValueError::new_err(format!(
                    "sampler must be 'path' or 'product', got '{other}'"
                ))),
            })
            .collect()
    }
}

/// Multivariate fractional phase-type distribution with rewards.
#[pyclass]
struct MphAlpha {
    inner: MPHAlphaDist,
}

#[pymethods]
impl MphAlpha {
    #[new]
    fn new(pi: Vec<f64>, t: Vec<Vec<f64>>, r: Vec<Vec<f64>>, alpha: f64) -> PyResult<Self> {
        let base = ph_validate(DVector::from_vec(pi), to_matrix(t, "T")?).map_err(err)?;
        let rewards = RewardMatrix::new(to_matrix(r, "R")?).map_err(err)?;
        Ok(Self { inner: MPHAlphaDist::new(base, rewards, alpha).map_err(err)? })
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.inner.alpha()
    }

    #[getter]
    fn components(&self) -> usize {
        self.inner.components()
    }

    fn laplace(&self, theta: Vec<f64>) -> PyResult<f64> {
        self.inner.laplace(&theta).map_err(err)
    }

    #[pyo3(signature = (n, seed, sampler = "path"))]
    fn sample(&self, n: usize, seed: u64, sampler: &str) -> PyResult<Vec<Vec<f64>>> {
        let mut rng = RngStream::new(seed, 0);
        (0..n)
            .map(|_| match sampler {
                "path" => self.inner.sample_path(&mut rng).map_err(err),
                "product" => self.inner.sample_product(&mut rng).map_err(err),
                other => Err(PyValueError::new_err(format!(
                    "sampler must be 'path' or 'product', got '{other}'"
                ))),
            })
            .collect()
    }

    /// Law of <Y, w>: returns (atom_at_zero, FracPhaseType).
    fn project(&self, w: Vec<f64>) -> PyResult<(f64, FracPhaseType)> {
        let p = self.inner.project(&w).map_err(err)?;
        Ok((p.atom, FracPhaseType { inner: p.dist }))
    }

    /// Componentwise power transform Y_k^(1/nu_k) of sampled vectors.
    fn power_sample(&self, n: usize, seed: u64, nu: Vec<f64>) -> PyResult<Vec<Vec<f64>>> {
        let nu = PowerVector::new(nu).map_err(err)?;
        let mut rng = RngStream::new(seed, 0);
        (0..n)
            .map(|_| self.inner.power_sample(&mut rng, &nu).map_err(err))
            .collect()
    }
}

/// Bivariate block construction with a closed-form piecewise density.
#[pyclass]
struct Bivariate {
    inner: BivariateModel,
}

#[pymethods]
impl Bivariate {
    /// Joint density at (x, y): returns (region, value) where region is
    /// one of "lower_wedge", "upper_wedge", "diagonal", "x_axis",
    /// "y_axis", "origin".
    fn density(&self, x: f64, y: f64) -> PyResult<(String, f64)> {
        let (region, v) = self.inner.density(x, y).map_err(err)?;
        let name = match region {
            BivariateRegion::LowerWedge => "lower_wedge",
            BivariateRegion::UpperWedge => "upper_wedge",
            BivariateRegion::Diagonal => "diagonal",
            BivariateRegion::XAxis => "x_axis",
            BivariateRegion::YAxis => "y_axis",
            BivariateRegion::Origin => "origin",
        };
        Ok((name.to_string(), v))
    }

    fn laplace(&self, theta: Vec<f64>) -> PyResult<f64> {
        self.inner.dist().laplace(&theta).map_err(err)
    }

    #[pyo3(signature = (n, seed, sampler = "path"))]
    fn sample(&self, n: usize, seed: u64, sampler: &str) -> PyResult<Vec<Vec<f64>>> {
        let mut rng = RngStream::new(seed, 0);
        (0..n)
            .map(|_| match sampler {
                "path" => self.inner.dist().sample_path(&mut rng).map_err(err),
                "product" => self.inner.dist().sample_product(&mut rng).map_err(err),
                other => Err(PyValueError::new_err(format!(
                    "sampler must be 'path' or 'product', got '{other}'"
                ))),
            })
            .collect()
    }

    fn project(&self, w: Vec<f64>) -> PyResult<(f64, FracPhaseType)> {
        let p = self.inner.dist().project(&w).map_err(err)?;
        Ok((p.atom, FracPhaseType { inner: p.dist }))
    }
}

/// The built-in bivariate demo model (alpha = 0.9, two states per block).
#[pyfunction]
fn paper_fig3() -> Bivariate {
    Bivariate { inner: bivariate_demo() }
}

#[pymodule]
fn fracphase_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(gamma, m)?)?;
    m.add_function(wrap_pyfunction!(ml, m)?)?;
    m.add_function(wrap_pyfunction!(paper_fig3, m)?)?;
    m.add_class::<PhaseType>()?;
    m.add_class::<FracPhaseType>()?;
    m.add_class::<MphAlpha>()?;
    m.add_class::<Bivariate>()?;
    Ok(())
}
