//! On-disk scheme descriptions: a small tagged JSON format the CLI and
//! tests exchange.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::codespace::{permutation_code, shift_code, vip_code, CodeSpace, Permutation};
use crate::error::{Error, Result};
use crate::tensor::Tensor4;

/// A scheme as stored in a file. Constructor variants may optionally embed
/// the materialized tensor; `build_tensor` always reconstructs from the
/// parameters, so an embedded copy is advisory.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SchemeSpec {
    Shift {
        d: usize,
        k1: usize,
        k2: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tensor: Option<Tensor4>,
    },
    Permutation {
        d: usize,
        sigma1: Vec<usize>,
        sigma2: Vec<usize>,
        sigma3: Vec<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tensor: Option<Tensor4>,
    },
    Vip {
        d: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tensor: Option<Tensor4>,
    },
    Raw { tensor: Tensor4 },
}

impl SchemeSpec {
    pub fn build_tensor(&self) -> Result<Tensor4> {
        match self {
            SchemeSpec::Shift { d, k1, k2, .. } => shift_code(*d, *k1, *k2),
            SchemeSpec::Permutation {
                d,
                sigma1,
                sigma2,
                sigma3,
                ..
            } => {
                let s1 = Permutation::new(sigma1.clone())?;
                let s2 = Permutation::new(sigma2.clone())?;
                let s3 = Permutation::new(sigma3.clone())?;
                if [s1.len(), s2.len(), s3.len()].iter().any(|&n| n != *d) {
                    return Err(Error::Validation(format!(
                        "permutations must act on {{0..{}}}",
                        d - 1
                    )));
                }
                permutation_code(*d, &s1, &s2, &s3)
            }
            SchemeSpec::Vip { d, .. } => vip_code(*d),
            SchemeSpec::Raw { tensor } => Ok(tensor.clone()),
        }
    }

    pub fn codespace(&self) -> Result<CodeSpace> {
        CodeSpace::from_tensor(self.build_tensor()?)
    }

    /// Re-serialize with the tensor embedded (handy for `raw` consumers).
    pub fn with_tensor(mut self) -> Result<Self> {
        let t = self.build_tensor()?;
        match &mut self {
            SchemeSpec::Shift { tensor, .. }
            | SchemeSpec::Permutation { tensor, .. }
            | SchemeSpec::Vip { tensor, .. } => *tensor = Some(t),
            SchemeSpec::Raw { .. } => {}
        }
        Ok(self)
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            SchemeSpec::Shift { .. } => "shift",
            SchemeSpec::Permutation { .. } => "permutation",
            SchemeSpec::Vip { .. } => "vip",
            SchemeSpec::Raw { .. } => "raw",
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        fs::write(path, text)?;
        Ok(())
    }
}
