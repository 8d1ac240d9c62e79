//! Task fields, streaming data sources and instantaneous gradients.

mod stream;
mod synth;

pub use stream::{
    agent_rng, instantaneous_gradient, instantaneous_gradient_into, instantaneous_loss, logistic_sample, mse_sample,
    AgentRng, ModelKind, Sample, Samples, StreamModel,
};
pub use synth::{synth_smooth_tasks, AmplitudeProfile};

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Stacked network vector `W = col{w_1, ..., w_N}` with per-agent block lengths.
#[derive(Clone, Debug, PartialEq)]
pub struct TaskField {
    offsets: Vec<usize>,
    data: Vec<f64>,
}

impl TaskField {
    pub fn zeros(sizes: &[usize]) -> Self {
        let mut offsets = Vec::with_capacity(sizes.len() + 1);
        offsets.push(0);
        for &s in sizes {
            offsets.push(offsets.last().unwrap() + s);
        }
        let total = *offsets.last().unwrap();
        TaskField {
            offsets,
            data: vec![0.0; total],
        }
    }

    pub fn uniform(n_agents: usize, m: usize) -> Self {
        Self::zeros(&vec![m; n_agents])
    }

    pub fn from_blocks<B: AsRef<[f64]>>(blocks: &[B]) -> Self {
        let sizes: Vec<usize> = blocks.iter().map(|b| b.as_ref().len()).collect();
        let mut field = Self::zeros(&sizes);
        for (k, b) in blocks.iter().enumerate() {
            field.block_mut(k).copy_from_slice(b.as_ref());
        }
        field
    }

    pub fn from_stacked(sizes: &[usize], stacked: &[f64]) -> Result<Self> {
        let mut field = Self::zeros(sizes);
        if field.data.len() != stacked.len() {
            return Err(Error::Dimension(format!(
                "stacked vector has length {}, block sizes sum to {}",
                stacked.len(),
                field.data.len()
            )));
        }
        field.data.copy_from_slice(stacked);
        Ok(field)
    }

    pub fn n_agents(&self) -> usize {
        self.offsets.len() - 1
    }

    /// Total length `M_t`.
    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn block_len(&self, k: usize) -> usize {
        self.offsets[k + 1] - self.offsets[k]
    }

    pub fn sizes(&self) -> Vec<usize> {
        (0..self.n_agents()).map(|k| self.block_len(k)).collect()
    }

    pub fn offset(&self, k: usize) -> usize {
        self.offsets[k]
    }

    /// Common block length, if every agent has the same one.
    pub fn uniform_len(&self) -> Option<usize> {
        let n = self.n_agents();
        if n == 0 {
            return None;
        }
        let m = self.block_len(0);
        (1..n).all(|k| self.block_len(k) == m).then_some(m)
    }

    pub fn require_uniform(&self) -> Result<usize> {
        self.uniform_len()
            .ok_or_else(|| Error::Dimension("agent blocks have unequal lengths".into()))
    }

    pub fn same_shape(&self, other: &TaskField) -> bool {
        self.offsets == other.offsets
    }

    pub fn block(&self, k: usize) -> &[f64] {
        &self.data[self.offsets[k]..self.offsets[k + 1]]
    }

    pub fn block_mut(&mut self, k: usize) -> &mut [f64] {
        &mut self.data[self.offsets[k]..self.offsets[k + 1]]
    }

    pub fn blocks(&self) -> impl Iterator<Item = &[f64]> {
        (0..self.n_agents()).map(move |k| self.block(k))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn to_dvector(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.data)
    }

    pub fn norm_squared(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum()
    }

    /// `||self - other||^2` over the whole stacked vector.
    pub fn distance_squared(&self, other: &TaskField) -> f64 {
        debug_assert_eq!(self.data.len(), other.data.len());
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b) * (a - b)).sum()
    }

    pub fn block_distance_squared(&self, other: &TaskField, k: usize) -> f64 {
        self.block(k)
            .iter()
            .zip(other.block(k))
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }

    pub fn scale(&mut self, alpha: f64) {
        self.data.iter_mut().for_each(|x| *x *= alpha);
    }

    pub fn copy_from(&mut self, other: &TaskField) {
        debug_assert!(self.same_shape(other));
        self.data.copy_from_slice(&other.data);
    }

    pub fn to_doc(&self) -> TaskFieldDoc {
        TaskFieldDoc {
            m: self.uniform_len(),
            blocks: self.blocks().map(|b| b.to_vec()).collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_doc()).expect("task field serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: TaskFieldDoc = serde_json::from_str(s)?;
        doc.into_field()
    }
}

/// JSON form `{"M": M, "blocks": [[...], ...]}`. `M` is `null` when the
/// blocks have different lengths.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskFieldDoc {
    #[serde(rename = "M")]
    pub m: Option<usize>,
    pub blocks: Vec<Vec<f64>>,
}

impl TaskFieldDoc {
    pub fn into_field(self) -> Result<TaskField> {
        if let Some(m) = self.m {
            if let Some(bad) = self.blocks.iter().position(|b| b.len() != m) {
                return Err(Error::Dimension(format!(
                    "block {bad} has length {}, expected M = {m}",
                    self.blocks[bad].len()
                )));
            }
        }
        if self.blocks.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter("task field has non-finite entries".into()));
        }
        Ok(TaskField::from_blocks(&self.blocks))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blocks_and_offsets() {
        let f = TaskField::from_blocks(&[vec![1.0, 2.0], vec![3.0], vec![4.0, 5.0, 6.0]]);
        assert_eq!(f.n_agents(), 3);
        assert_eq!(f.len(), 6);
        assert_eq!(f.block(2), &[4.0, 5.0, 6.0]);
        assert_eq!(f.offset(2), 3);
        assert_eq!(f.uniform_len(), None);
        assert!(f.require_uniform().is_err());
    }

    #[test]
    fn json_round_trip_keeps_shape() {
        let f = TaskField::from_blocks(&[vec![0.5, -1.0], vec![2.0, 0.25]]);
        let json = f.to_json();
        assert!(json.contains("\"M\": 2"));
        assert_eq!(TaskField::from_json(&json).unwrap(), f);
    }

    #[test]
    fn json_rejects_wrong_block_length() {
        let err = TaskField::from_json(r#"{"M": 2, "blocks": [[1.0, 2.0], [3.0]]}"#);
        assert!(matches!(err, Err(Error::Dimension(_))));
        let err = TaskField::from_json(r#"{"M": 1, "blocks": [[1.0]], "extra": 1}"#);
        assert!(err.is_err());
    }

    #[test]
    fn distances() {
        let a = TaskField::from_blocks(&[vec![1.0, 0.0], vec![0.0, 2.0]]);
        let b = TaskField::uniform(2, 2);
        assert_eq!(a.distance_squared(&b), 5.0);
        assert_eq!(a.block_distance_squared(&b, 1), 4.0);
    }
}
