//! JSON file formats.
//!
//! A tensor is `{"shape": [..], "data": [..]}` with `data` in row-major order
//! (last index fastest). Marginal targets are `{"targets": [[..], ..]}`, one
//! array per axis. A problem file bundles both as `{"prior": .., "marginals": ..}`.
//!
//! Numbers are written in the shortest decimal form that parses back to the
//! same double, so a write/read round trip is bit-exact.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use signed_sinkhorn::{MarginalTargets, SignedTensor};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TensorFile {
    pub shape: Vec<usize>,
    pub data: Vec<f64>,
}

impl TensorFile {
    pub fn from_tensor(t: &SignedTensor) -> Self {
        TensorFile { shape: t.shape().to_vec(), data: t.values().to_vec() }
    }

    pub fn into_tensor(self) -> signed_sinkhorn::Result<SignedTensor> {
        SignedTensor::new(self.shape, self.data)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarginalsFile {
    pub targets: Vec<Vec<f64>>,
}

impl MarginalsFile {
    pub fn from_targets(t: &MarginalTargets) -> Self {
        MarginalsFile { targets: t.as_slices().to_vec() }
    }

    pub fn into_targets(self) -> signed_sinkhorn::Result<MarginalTargets> {
        MarginalTargets::new(self.targets)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub prior: TensorFile,
    pub marginals: MarginalsFile,
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_owned(), source })?;
    serde_json::from_str(&text).map_err(|source| CliError::Parse { path: path.to_owned(), source })
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string(value).expect("finite numbers serialize");
    text.push('\n');
    fs::write(path, text).map_err(|source| CliError::Io { path: path.to_owned(), source })
}

fn invalid(path: &Path) -> impl FnOnce(signed_sinkhorn::Error) -> CliError + '_ {
    move |source| CliError::Invalid { path: path.to_owned(), source }
}

pub fn read_tensor(path: &Path) -> Result<SignedTensor, CliError> {
    read_json::<TensorFile>(path)?.into_tensor().map_err(invalid(path))
}

pub fn read_marginals(path: &Path) -> Result<MarginalTargets, CliError> {
    read_json::<MarginalsFile>(path)?.into_targets().map_err(invalid(path))
}

pub fn read_problem(path: &Path) -> Result<(SignedTensor, MarginalTargets), CliError> {
    let file: ProblemFile = read_json(path)?;
    let prior = file.prior.into_tensor().map_err(invalid(path))?;
    let targets = file.marginals.into_targets().map_err(invalid(path))?;
    Ok((prior, targets))
}

pub fn write_tensor(path: &Path, t: &SignedTensor) -> Result<(), CliError> {
    write_json(path, &TensorFile::from_tensor(t))
}

pub fn write_marginals(path: &Path, t: &MarginalTargets) -> Result<(), CliError> {
    write_json(path, &MarginalsFile::from_targets(t))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_fields_are_rejected() {
        let err = serde_json::from_str::<TensorFile>(r#"{"shape":[1],"data":[1.0],"extra":0}"#).unwrap_err();
        assert!(err.to_string().contains("unknown field"));
        assert!(serde_json::from_str::<MarginalsFile>(r#"{"targets":[[1]],"x":1}"#).is_err());
    }

    #[test]
    fn integers_read_as_reals() {
        let t: TensorFile = serde_json::from_str(r#"{"shape":[2],"data":[1,-2]}"#).unwrap();
        assert_eq!(t.into_tensor().unwrap().values(), &[1.0, -2.0]);
    }

    #[test]
    fn tensor_invariants_apply_at_parse() {
        let t: TensorFile = serde_json::from_str(r#"{"shape":[2,2],"data":[1,2,3]}"#).unwrap();
        assert!(matches!(t.into_tensor(), Err(signed_sinkhorn::Error::LengthMismatch { expected: 4, found: 3 })));
    }
}
