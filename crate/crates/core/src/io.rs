//! JSON model files.
//!
//! Schema: `{"eta", "hi", "poles", "residues", "interp_points"?, "meta"}`.
//! Reals are written in shortest round-trip form and parsed with correct
//! rounding, so `load(save(m))` is bit-exact.
//!
//! A file with empty `residues` and present `interp_points` is a bare greedy
//! model with no target attached.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fraction::{Interval, PartialFraction};
use crate::reim::{GreedyTrace, ReimModel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub eta: f64,
    pub hi: f64,
    pub poles: Vec<f64>,
    pub residues: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interp_points: Option<Vec<f64>>,
    #[serde(default)]
    pub meta: BTreeMap<String, String>,
}

impl ModelFile {
    /// A partial fraction over `interval` without interpolation points.
    pub fn from_fraction(interval: Interval, pf: &PartialFraction) -> Self {
        ModelFile {
            eta: interval.lo(),
            hi: interval.hi(),
            poles: pf.poles_b().to_vec(),
            residues: pf.residues().to_vec(),
            interp_points: None,
            meta: BTreeMap::new(),
        }
    }

    /// A greedy model, optionally with the residues of one interpolant.
    pub fn from_model(model: &ReimModel, pf: Option<&PartialFraction>) -> Result<Self> {
        let residues = match pf {
            Some(pf) if pf.poles_b() != model.poles_b() => {
                return Err(Error::invalid("fraction does not share the model's poles"))
            }
            Some(pf) => pf.residues().to_vec(),
            None => Vec::new(),
        };
        Ok(ModelFile {
            eta: model.interval().lo(),
            hi: model.interval().hi(),
            poles: model.poles_b().to_vec(),
            residues,
            interp_points: Some(model.interp_x().to_vec()),
            meta: BTreeMap::new(),
        })
    }

    pub fn with_meta(mut self, key: impl Into<String>, value: impl ToString) -> Self {
        self.meta.insert(key.into(), value.to_string());
        self
    }

    pub fn interval(&self) -> Result<Interval> {
        Interval::new(self.eta, self.hi)
            .map_err(|_| Error::InvariantViolation(format!("bad interval [{}, {}]", self.eta, self.hi)))
    }

    /// Check every schema invariant.
    pub fn validate(&self) -> Result<()> {
        self.interval()?;
        if self.residues.is_empty() && !self.poles.is_empty() {
            if self.interp_points.is_none() {
                return Err(Error::InvariantViolation(
                    "file has neither residues nor interpolation points".into(),
                ));
            }
            PartialFraction::new(self.poles.clone(), vec![0.0; self.poles.len()])?;
        } else {
            PartialFraction::new(self.poles.clone(), self.residues.clone())?;
        }
        if self.interp_points.is_some() {
            self.to_model()?;
        }
        Ok(())
    }

    pub fn to_fraction(&self) -> Result<PartialFraction> {
        if self.residues.is_empty() && !self.poles.is_empty() {
            return Err(Error::InvariantViolation("file stores no residues".into()));
        }
        PartialFraction::new(self.poles.clone(), self.residues.clone())
    }

    /// Rebuild the greedy model. The trace is not stored and comes back empty.
    pub fn to_model(&self) -> Result<ReimModel> {
        let points = self
            .interp_points
            .clone()
            .ok_or_else(|| Error::InvariantViolation("file stores no interpolation points".into()))?;
        ReimModel::from_selection(self.interval()?, self.poles.clone(), points, GreedyTrace::default())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model file serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        if [file.eta, file.hi]
            .iter()
            .chain(&file.poles)
            .chain(&file.residues)
            .chain(file.interp_points.iter().flatten())
            .any(|v| !v.is_finite())
        {
            return Err(Error::InvariantViolation("non-finite value in model file".into()));
        }
        file.validate()?;
        Ok(file)
    }
}

pub fn save_model(path: impl AsRef<Path>, file: &ModelFile) -> Result<()> {
    file.validate()?;
    let mut text = file.to_json();
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<ModelFile> {
    ModelFile::from_json(&fs::read_to_string(path)?)
}
