//! JSON model files: the on-disk schema the CLI loads and emits. A file is
//! one object tagged by `kind`; building it either yields a validated
//! distribution or a structured error naming the first violated invariant.
//! Numbers are plain IEEE-754 doubles in decimal text so fixtures stay
//! diff-able.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::constructors::{
    build_bivariate, build_feed_forward, bivariate_demo, BivariateBlockSpec, BivariateModel,
    FeedForwardSpec,
};
use crate::error::{Error, Result};
use crate::frac_phase::FracPHDist;
use crate::mph::{MPHAlphaDist, MPHStarDist, PowerVector, ProjectionResult, RewardMatrix};
use crate::phase_type::{ph_validate, PHDist};

fn rows_to_mat(rows: &[Vec<f64>], what: &str) -> Result<DMatrix<f64>> {
    if rows.is_empty() {
        return Err(Error::Invalid(format!("{what}: empty matrix")));
    }
    let ncols = rows[0].len();
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::Invalid(format!("{what}: ragged rows")));
    }
    Ok(DMatrix::from_row_iterator(
        rows.len(),
        ncols,
        rows.iter().flat_map(|r| r.iter().copied()),
    ))
}

fn mat_to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| m.row(i).iter().copied().collect())
        .collect()
}

/// One feed-forward block: internal generator C, hand-off D into the next
/// block (absent on the final block).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeedForwardBlock {
    #[serde(rename = "C")]
    pub c: Vec<Vec<f64>>,
    #[serde(rename = "D", skip_serializing_if = "Option::is_none", default)]
    pub d: Option<Vec<Vec<f64>>>,
}

/// Block data of the bivariate construction.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BivariateBlocks {
    pub pi1: Vec<f64>,
    pub pi2: Vec<f64>,
    pub pi3: Vec<f64>,
    #[serde(rename = "T11")]
    pub t11: Vec<Vec<f64>>,
    #[serde(rename = "T12")]
    pub t12: Vec<Vec<f64>>,
    #[serde(rename = "T13")]
    pub t13: Vec<Vec<f64>>,
    #[serde(rename = "T22")]
    pub t22: Vec<Vec<f64>>,
    #[serde(rename = "T33")]
    pub t33: Vec<Vec<f64>>,
}

/// On-disk schema, tagged by `kind`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ModelFile {
    Ph {
        pi: Vec<f64>,
        #[serde(rename = "T")]
        t: Vec<Vec<f64>>,
    },
    Fph {
        alpha: f64,
        pi: Vec<f64>,
        #[serde(rename = "T")]
        t: Vec<Vec<f64>>,
        /// Mass at zero: recorded on projection output for readability
        /// (it is implied by 1 − Σπ and checked against it on load).
        #[serde(skip_serializing_if = "Option::is_none", default)]
        atom: Option<f64>,
    },
    Mph {
        pi: Vec<f64>,
        #[serde(rename = "T")]
        t: Vec<Vec<f64>>,
        #[serde(rename = "R")]
        r: Vec<Vec<f64>>,
    },
    Mpha {
        alpha: f64,
        pi: Vec<f64>,
        #[serde(rename = "T")]
        t: Vec<Vec<f64>>,
        #[serde(rename = "R")]
        r: Vec<Vec<f64>>,
        #[serde(skip_serializing_if = "Option::is_none", default)]
        nu: Option<Vec<f64>>,
    },
    Feedforward {
        alpha: f64,
        pi: Vec<f64>,
        blocks: Vec<FeedForwardBlock>,
    },
    Bivariate {
        alpha: f64,
        blocks: BivariateBlocks,
    },
    Preset {
        name: String,
    },
}

/// A validated, ready-to-evaluate model.
#[derive(Debug, Clone)]
pub enum Model {
    Ph(PHDist),
    Fph(FracPHDist),
    Mph(MPHStarDist),
    Mpha {
        dist: MPHAlphaDist,
        nu: Option<PowerVector>,
    },
    Bivariate(BivariateModel),
}

impl Model {
    /// Number of components a sample of this model has.
    pub fn components(&self) -> usize {
        match self {
            Model::Ph(_) | Model::Fph(_) => 1,
            Model::Mph(d) => d.components(),
            Model::Mpha { dist, .. } => dist.components(),
            Model::Bivariate(_) => 2,
        }
    }

    /// The multivariate fractional view, when the model has one.
    pub fn as_mpha(&self) -> Option<&MPHAlphaDist> {
        match self {
            Model::Mpha { dist, .. } => Some(dist),
            Model::Bivariate(m) => Some(m.dist()),
            _ => None,
        }
    }
}

impl ModelFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Invalid(format!("model file: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    /// Validate and build. Errors carry the first violated invariant.
    pub fn build(&self) -> Result<Model> {
        match self {
            ModelFile::Ph { pi, t } => Ok(Model::Ph(ph_validate(
                DVector::from_vec(pi.clone()),
                rows_to_mat(t, "T")?,
            )?)),
            ModelFile::Fph { alpha, pi, t, atom } => {
                let base = ph_validate(DVector::from_vec(pi.clone()), rows_to_mat(t, "T")?)?;
                if let Some(a) = atom {
                    if (a - base.atom()).abs() > 1e-10 {
                        return Err(Error::Invalid(format!(
                            "recorded atom {a} contradicts 1 - sum(pi) = {}",
                            base.atom()
                        )));
                    }
                }
                Ok(Model::Fph(FracPHDist::new(base, *alpha)?))
            }
            ModelFile::Mph { pi, t, r } => {
                let base = ph_validate(DVector::from_vec(pi.clone()), rows_to_mat(t, "T")?)?;
                Ok(Model::Mph(MPHStarDist::new(
                    base,
                    RewardMatrix::new(rows_to_mat(r, "R")?)?,
                )?))
            }
            ModelFile::Mpha { alpha, pi, t, r, nu } => {
                let base = ph_validate(DVector::from_vec(pi.clone()), rows_to_mat(t, "T")?)?;
                let dist = MPHAlphaDist::new(base, RewardMatrix::new(rows_to_mat(r, "R")?)?, *alpha)?;
                let nu = match nu {
                    Some(v) => {
                        if v.len() != dist.components() {
                            return Err(Error::Invalid(format!(
                                "nu has {} entries, model has {} components",
                                v.len(),
                                dist.components()
                            )));
                        }
                        Some(PowerVector::new(v.clone())?)
                    }
                    None => None,
                };
                Ok(Model::Mpha { dist, nu })
            }
            ModelFile::Feedforward { alpha, pi, blocks } => {
                let mut c = Vec::with_capacity(blocks.len());
                let mut d = Vec::new();
                for (i, b) in blocks.iter().enumerate() {
                    c.push(rows_to_mat(&b.c, &format!("block {i} C"))?);
                    match (&b.d, i + 1 == blocks.len()) {
                        (Some(m), false) => d.push(rows_to_mat(m, &format!("block {i} D"))?),
                        (None, true) => {}
                        (Some(_), true) => {
                            return Err(Error::Invalid("final block must not have D".into()))
                        }
                        (None, false) => {
                            return Err(Error::Invalid(format!("block {i} is missing D")))
                        }
                    }
                }
                let spec = FeedForwardSpec::new(DVector::from_vec(pi.clone()), c, d)?;
                Ok(Model::Mpha {
                    dist: build_feed_forward(&spec, *alpha)?,
                    nu: None,
                })
            }
            ModelFile::Bivariate { alpha, blocks } => {
                let spec = BivariateBlockSpec {
                    pi1: DVector::from_vec(blocks.pi1.clone()),
                    pi2: DVector::from_vec(blocks.pi2.clone()),
                    pi3: DVector::from_vec(blocks.pi3.clone()),
                    t11: rows_to_mat(&blocks.t11, "T11")?,
                    t12: rows_to_mat(&blocks.t12, "T12")?,
                    t13: rows_to_mat(&blocks.t13, "T13")?,
                    t22: rows_to_mat(&blocks.t22, "T22")?,
                    t33: rows_to_mat(&blocks.t33, "T33")?,
                };
                Ok(Model::Bivariate(build_bivariate(spec, *alpha)?))
            }
            ModelFile::Preset { name } => match name.as_str() {
                "paper-fig3" => Ok(Model::Bivariate(bivariate_demo())),
                other => Err(Error::Invalid(format!("unknown preset '{other}'"))),
            },
        }
    }

    /// Serialize a projection result as a standalone fph model.
    pub fn from_projection(p: &ProjectionResult) -> Self {
        ModelFile::Fph {
            alpha: p.dist.alpha(),
            pi: p.dist.base().initial().vector().iter().copied().collect(),
            t: mat_to_rows(p.dist.base().sub_intensity().matrix()),
            atom: Some(p.atom),
        }
    }
}
