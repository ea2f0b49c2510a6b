//! Classical univariate phase-type distributions PH(π, T): validated
//! parameters, density, CDF, Laplace transform, and Markov-jump-process path
//! sampling.
//!
//! Sub-probability initial vectors (πe < 1) are supported everywhere; the
//! deficit is an atom at zero handled explicitly rather than through an
//! augmented state, because projections of multivariate models produce such
//! atoms naturally.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::numerics::matrix::{matrix_exp, solve_linear};
use crate::random::RngStream;

/// A p×p sub-intensity matrix: nonnegative off-diagonal, negative diagonal,
/// nonpositive row sums, and every state transient (absorption reachable
/// from everywhere).
#[derive(Debug, Clone, PartialEq)]
pub struct SubIntensityMatrix {
    t: DMatrix<f64>,
}

impl SubIntensityMatrix {
    pub fn new(t: DMatrix<f64>) -> Result<Self> {
        let p = t.nrows();
        if p == 0 || t.ncols() != p {
            return Err(Error::Invalid("sub-intensity matrix must be square and nonempty".into()));
        }
        if t.iter().any(|x| !x.is_finite()) {
            return Err(Error::Invalid("sub-intensity matrix entries must be finite".into()));
        }
        for i in 0..p {
            if !(t[(i, i)] < 0.0) {
                return Err(Error::Invalid(format!(
                    "diagonal entry T[{i},{i}] = {} must be negative",
                    t[(i, i)]
                )));
            }
            for j in 0..p {
                if i != j && t[(i, j)] < 0.0 {
                    return Err(Error::Invalid(format!(
                        "off-diagonal entry T[{i},{j}] = {} must be nonnegative",
                        t[(i, j)]
                    )));
                }
            }
            let row_sum: f64 = t.row(i).iter().sum();
            if row_sum > 1e-10 * t[(i, i)].abs() {
                return Err(Error::Invalid(format!(
                    "row {i} sums to {row_sum} > 0; exit rate would be negative"
                )));
            }
        }
        // transience: -T invertible with entrywise nonnegative inverse
        let neg_t = -&t;
        let inv = neg_t
            .clone()
            .lu()
            .solve(&DMatrix::identity(p, p))
            .ok_or_else(|| Error::Invalid("sub-intensity matrix is singular: some state is recurrent".into()))?;
        if inv.iter().any(|&x| x < -1e-12) {
            return Err(Error::Invalid(
                "(-T)^{-1} has negative entries: not a valid sub-intensity matrix".into(),
            ));
        }
        // absorption must be reachable from every state through the
        // embedded chain (guards zero exit rows feeding only each other)
        let exit = Self::exit_vector_of(&t);
        let mut reaches: Vec<bool> = (0..p).map(|i| exit[i] > 0.0).collect();
        loop {
            let mut changed = false;
            for i in 0..p {
                if !reaches[i] {
                    for j in 0..p {
                        if i != j && t[(i, j)] > 0.0 && reaches[j] {
                            reaches[i] = true;
                            changed = true;
                            break;
                        }
                    }
                }
            }
            if !changed {
                break;
            }
        }
        if let Some(i) = reaches.iter().position(|r| !r) {
            return Err(Error::Invalid(format!(
                "absorption unreachable from state {i}"
            )));
        }
        Ok(Self { t })
    }

    pub fn dim(&self) -> usize {
        self.t.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.t
    }

    fn exit_vector_of(t: &DMatrix<f64>) -> DVector<f64> {
        let p = t.nrows();
        DVector::from_iterator(p, (0..p).map(|i| (-t.row(i).iter().sum::<f64>()).max(0.0)))
    }

    /// Exit-rate vector t = -T·e (clamped at 0 against roundoff).
    pub fn exit_vector(&self) -> DVector<f64> {
        Self::exit_vector_of(&self.t)
    }

    /// Total rates λ_i = -T_ii.
    pub fn rates(&self) -> DVector<f64> {
        -self.t.diagonal()
    }

    /// Embedded-chain row for state i: p destination probabilities followed
    /// by the absorption probability (q_ii = 0 by construction).
    pub fn embedded_row(&self, i: usize) -> Vec<f64> {
        let lambda = -self.t[(i, i)];
        let mut row: Vec<f64> = (0..self.dim())
            .map(|j| if j == i { 0.0 } else { self.t[(i, j)] / lambda })
            .collect();
        let absorb = 1.0 - row.iter().sum::<f64>();
        row.push(absorb.max(0.0));
        row
    }
}

/// Nonnegative initial vector with πe ≤ 1; a deficit is an atom at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialDistribution {
    pi: DVector<f64>,
}

impl InitialDistribution {
    pub fn new(pi: DVector<f64>) -> Result<Self> {
        if pi.is_empty() {
            return Err(Error::Invalid("initial vector must be nonempty".into()));
        }
        if pi.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
            return Err(Error::Invalid(format!(
                "initial vector entries must be nonnegative and finite: {pi:?}"
            )));
        }
        let total: f64 = pi.iter().sum();
        if total > 1.0 + 1e-12 {
            return Err(Error::Invalid(format!("initial vector sums to {total} > 1")));
        }
        Ok(Self { pi })
    }

    pub fn dim(&self) -> usize {
        self.pi.len()
    }

    pub fn vector(&self) -> &DVector<f64> {
        &self.pi
    }

    /// πe: mass placed on the transient states.
    pub fn mass(&self) -> f64 {
        self.pi.iter().sum::<f64>().min(1.0)
    }

    /// 1 - πe: the atom at zero.
    pub fn atom(&self) -> f64 {
        (1.0 - self.mass()).max(0.0)
    }
}

/// One sampled trajectory of the underlying jump process. An immediate
/// absorption (the πe < 1 atom) is the empty path with total 0.
#[derive(Debug, Clone, PartialEq)]
pub struct PathRecord {
    pub states: Vec<usize>,
    pub sojourns: Vec<f64>,
    pub total: f64,
}

impl PathRecord {
    pub fn empty() -> Self {
        Self { states: Vec::new(), sojourns: Vec::new(), total: 0.0 }
    }
}

/// Phase-type distribution PH(π, T).
#[derive(Debug, Clone, PartialEq)]
pub struct PHDist {
    pi: InitialDistribution,
    t: SubIntensityMatrix,
}

/// Validate raw arrays into a PH distribution.
pub fn ph_validate(pi: DVector<f64>, t: DMatrix<f64>) -> Result<PHDist> {
    PHDist::new(InitialDistribution::new(pi)?, SubIntensityMatrix::new(t)?)
}

impl PHDist {
    pub fn new(pi: InitialDistribution, t: SubIntensityMatrix) -> Result<Self> {
        if pi.dim() != t.dim() {
            return Err(Error::Invalid(format!(
                "initial vector dimension {} does not match matrix dimension {}",
                pi.dim(),
                t.dim()
            )));
        }
        Ok(Self { pi, t })
    }

    pub fn dim(&self) -> usize {
        self.t.dim()
    }

    pub fn initial(&self) -> &InitialDistribution {
        &self.pi
    }

    pub fn sub_intensity(&self) -> &SubIntensityMatrix {
        &self.t
    }

    pub fn atom(&self) -> f64 {
        self.pi.atom()
    }

    /// Density of the absolutely continuous part: π e^{Tx} t.
    pub fn density(&self, x: f64) -> Result<f64> {
        if !(x > 0.0) || !x.is_finite() {
            return Err(Error::Domain(format!("density requires x > 0, got {x}")));
        }
        let etx = matrix_exp(&(self.t.matrix() * x));
        Ok((self.pi.vector().transpose() * etx * self.t.exit_vector())[(0, 0)])
    }

    /// F(x) = 1 - π e^{Tx} e; F(0) = 1 - πe (the atom).
    pub fn cdf(&self, x: f64) -> Result<f64> {
        if !(x >= 0.0) || !x.is_finite() {
            return Err(Error::Domain(format!("cdf requires x >= 0, got {x}")));
        }
        let etx = matrix_exp(&(self.t.matrix() * x));
        let ones = DVector::from_element(self.dim(), 1.0);
        Ok(1.0 - (self.pi.vector().transpose() * etx * ones)[(0, 0)])
    }

    /// L(u) = (1 - πe) + π (uI - T)^{-1} t.
    pub fn laplace(&self, u: f64) -> Result<f64> {
        if !(u >= 0.0) || !u.is_finite() {
            return Err(Error::Domain(format!("laplace requires u >= 0, got {u}")));
        }
        let p = self.dim();
        let a = DMatrix::identity(p, p) * u - self.t.matrix();
        let x = solve_linear(&a, &self.t.exit_vector())?;
        Ok(self.pi.atom() + self.pi.vector().dot(&x))
    }

    /// Simulate the jump process to absorption. `total` is PH(π,T)
    /// distributed; the empty path occurs with probability 1 - πe.
    pub fn sample_path(&self, rng: &mut RngStream) -> Result<PathRecord> {
        let p = self.dim();
        let mut init: Vec<f64> = self.pi.vector().iter().copied().collect();
        init.push(self.pi.atom());
        let start = rng.discrete(&normalized(&init))?;
        if start == p {
            return Ok(PathRecord::empty());
        }
        let mut path = PathRecord::empty();
        let mut state = start;
        loop {
            let lambda = -self.t.matrix()[(state, state)];
            let dwell = rng.exponential(lambda)?;
            path.states.push(state);
            path.sojourns.push(dwell);
            path.total += dwell;
            let row = self.t.embedded_row(state);
            let next = rng.discrete(&normalized(&row))?;
            if next == p {
                return Ok(path);
            }
            state = next;
        }
    }
}

/// Clean tiny negative/rounding noise so rows pass the strict simplex check
/// in `discrete`.
fn normalized(probs: &[f64]) -> Vec<f64> {
    let total: f64 = probs.iter().map(|&p| p.max(0.0)).sum();
    probs.iter().map(|&p| p.max(0.0) / total).collect()
}
