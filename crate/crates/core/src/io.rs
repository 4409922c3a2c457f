// SPDX-License-Identifier: Apache-2.0

//! JSON artifacts: states, unitaries, histograms and pipeline reports.
//!
//! Keys, circuits and analysis reports serialize through their own types in
//! [`crate::crypto`], [`crate::evaluate`] and [`crate::secinfo`]. All
//! schemas here reject unknown fields.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::crypto::Key;
use crate::error::{invalid, Error, Result};
use crate::evaluate::{SpatialUnitary, View};
use crate::fock::{FockBasis, StateVector};
use crate::linalg::{CMatrix, CVector, C64};

pub fn from_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::Format(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisDescriptor {
    pub m: usize,
    pub d: usize,
}

/// Sparse state: `(occupation, re, im)` triples for the nonzero amplitudes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub basis: BasisDescriptor,
    pub amplitudes: Vec<(Vec<u32>, f64, f64)>,
}

impl StateFile {
    pub fn from_state(state: &StateVector) -> Result<Self> {
        let layout = state.basis().require_layout("state serialization")?;
        let amplitudes = state
            .amplitudes()
            .iter()
            .enumerate()
            .filter(|(_, a)| a.re != 0.0 || a.im != 0.0)
            .map(|(i, a)| (state.basis().state(i).occupations().to_vec(), a.re, a.im))
            .collect();
        Ok(Self {
            basis: BasisDescriptor {
                m: layout.spatial,
                d: layout.internal,
            },
            amplitudes,
        })
    }

    /// Rebuild on a fresh basis of the described `(m, d)`.
    pub fn to_state(&self, max_dim: usize) -> Result<StateVector> {
        let basis = Arc::new(FockBasis::for_scheme(self.basis.m, self.basis.d, max_dim)?);
        self.to_state_on(&basis)
    }

    pub fn to_state_on(&self, basis: &Arc<FockBasis>) -> Result<StateVector> {
        let layout = basis.require_layout("state deserialization")?;
        if (layout.spatial, layout.internal) != (self.basis.m, self.basis.d) {
            return Err(invalid(format!(
                "state file is for (m, d) = ({}, {}), basis is ({}, {})",
                self.basis.m, self.basis.d, layout.spatial, layout.internal
            )));
        }
        let mut amps = CVector::zeros(basis.dimension());
        for (occ, re, im) in &self.amplitudes {
            let i = basis
                .index_of(occ)
                .ok_or_else(|| invalid(format!("occupation {occ:?} is not in the basis")))?;
            amps[i] = C64::new(*re, *im);
        }
        StateVector::new(Arc::clone(basis), amps)
    }
}

/// Dense `m × m` matrix as separate real and imaginary row-major arrays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnitaryFile {
    pub m: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl UnitaryFile {
    pub fn from_matrix(u: &CMatrix) -> Self {
        let rows = |f: fn(&C64) -> f64| {
            (0..u.nrows())
                .map(|r| (0..u.ncols()).map(|c| f(&u[(r, c)])).collect())
                .collect()
        };
        Self {
            m: u.nrows(),
            re: rows(|z| z.re),
            im: rows(|z| z.im),
        }
    }

    pub fn to_matrix(&self) -> Result<CMatrix> {
        let m = self.m;
        let ok = |a: &Vec<Vec<f64>>| a.len() == m && a.iter().all(|r| r.len() == m);
        if !ok(&self.re) || !ok(&self.im) {
            return Err(invalid(format!("unitary file arrays must be {m}×{m}")));
        }
        Ok(CMatrix::from_fn(m, m, |r, c| C64::new(self.re[r][c], self.im[r][c])))
    }

    pub fn to_unitary(&self) -> Result<SpatialUnitary> {
        SpatialUnitary::new(self.to_matrix()?)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HistogramBin {
    pub outcome: Vec<u32>,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HistogramFile {
    pub view: View,
    pub shots: u64,
    pub seed: u64,
    pub counts: Vec<HistogramBin>,
}

impl HistogramFile {
    pub fn new(view: View, shots: u64, seed: u64, counts: BTreeMap<Vec<u32>, u64>) -> Self {
        Self {
            view,
            shots,
            seed,
            counts: counts
                .into_iter()
                .map(|(outcome, count)| HistogramBin { outcome, count })
                .collect(),
        }
    }
}

/// Output of an encrypt → evaluate → decrypt run next to plain evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunReport {
    pub m: usize,
    pub d: usize,
    pub plaintext: Vec<usize>,
    pub key: Key,
    pub homomorphic: StateFile,
    pub plain: StateFile,
    pub fidelity: f64,
    pub tolerance: f64,
    pub passed: bool,
}
