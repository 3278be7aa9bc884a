//! JSON forms of spaces, approximate isometries and tuples. Every number is a
//! rational string such as `"1/8"`; `"inf"` appears only in matrices of
//! approximate isometries.

use std::sync::Arc;

use metfraisse_core::apx::{validate_apx, ApproxIsometry, Space};
use metfraisse_core::banach::{PolytopalNormSpace, VectorTuple};
use metfraisse_core::metric::FiniteMetricSpace;
use metfraisse_core::{Rat, RatInf};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub fn parse_rat(s: &str) -> Result<Rat, CliError> {
    s.parse()
        .map_err(|e| CliError::Usage(format!("bad rational {:?}: {}", s, e)))
}

pub fn parse_rat_inf(s: &str) -> Result<RatInf, CliError> {
    s.parse()
        .map_err(|e| CliError::Usage(format!("bad value {:?}: {}", s, e)))
}

pub fn rat_row(v: &[Rat]) -> Vec<String> {
    v.iter().map(Rat::to_string).collect()
}

pub fn parse_row(v: &[String]) -> Result<Vec<Rat>, CliError> {
    v.iter().map(|s| parse_rat(s)).collect()
}

pub fn parse_rows(v: &[Vec<String>]) -> Result<Vec<Vec<Rat>>, CliError> {
    v.iter().map(|r| parse_row(r)).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpaceJson {
    pub points: Vec<String>,
    pub dist: Vec<Vec<String>>,
}

impl SpaceJson {
    pub fn from_space(s: &FiniteMetricSpace) -> Self {
        SpaceJson {
            points: s.labels().to_vec(),
            dist: (0..s.len())
                .map(|p| (0..s.len()).map(|q| s.dist(p, q).to_string()).collect())
                .collect(),
        }
    }

    pub fn to_space(&self) -> Result<FiniteMetricSpace, CliError> {
        let rows = parse_rows(&self.dist)?;
        Ok(FiniteMetricSpace::new(self.points.clone(), &rows)?)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApxJson {
    pub source: SpaceJson,
    pub target: SpaceJson,
    pub values: Vec<Vec<String>>,
}

impl ApxJson {
    pub fn from_apx(psi: &ApproxIsometry) -> Self {
        ApxJson {
            source: SpaceJson::from_space(psi.source()),
            target: SpaceJson::from_space(psi.target()),
            values: psi
                .rows()
                .iter()
                .map(|r| r.iter().map(RatInf::to_string).collect())
                .collect(),
        }
    }

    pub fn to_apx(&self) -> Result<ApproxIsometry, CliError> {
        let x: Space = Arc::new(self.source.to_space()?);
        let y: Space = Arc::new(self.target.to_space()?);
        self.to_apx_over(x, y)
    }

    /// Reads the matrix against spaces the caller already holds.
    pub fn to_apx_over(&self, x: Space, y: Space) -> Result<ApproxIsometry, CliError> {
        let rows: Vec<Vec<RatInf>> = self
            .values
            .iter()
            .map(|r| r.iter().map(|s| parse_rat_inf(s)).collect())
            .collect::<Result<_, _>>()?;
        Ok(validate_apx(&rows, x, y)?)
    }
}

/// A tuple of points of a metric space.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointTupleJson {
    pub space: SpaceJson,
    pub indices: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormSpaceJson {
    pub dim: usize,
    pub functionals: Vec<Vec<String>>,
}

impl NormSpaceJson {
    pub fn from_space(s: &PolytopalNormSpace) -> Self {
        NormSpaceJson {
            dim: s.dim(),
            functionals: s.functionals().iter().map(|f| rat_row(f)).collect(),
        }
    }

    pub fn to_space(&self) -> Result<PolytopalNormSpace, CliError> {
        Ok(PolytopalNormSpace::new(
            self.dim,
            parse_rows(&self.functionals)?,
        )?)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VectorTupleJson {
    pub space: NormSpaceJson,
    pub vectors: Vec<Vec<String>>,
}

impl VectorTupleJson {
    pub fn from_tuple(t: &VectorTuple) -> Self {
        VectorTupleJson {
            space: NormSpaceJson::from_space(t.space()),
            vectors: t.vectors().iter().map(|v| rat_row(v)).collect(),
        }
    }

    pub fn to_tuple(&self) -> Result<VectorTuple, CliError> {
        Ok(VectorTuple::new(
            self.space.to_space()?,
            parse_rows(&self.vectors)?,
        )?)
    }
}
