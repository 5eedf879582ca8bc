//! Polynomial maps evaluated by the workers.

use serde::{Deserialize, Serialize};

use crate::matrix::ComplexMatrix;

/// Descriptor of the polynomial `f` each worker applies to its share.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PolyFunction {
    /// `f(X) = X`, degree 1.
    Identity,
    /// `f(X) = XᵀX` (plain transpose), degree 2.
    #[default]
    Gram,
}

impl PolyFunction {
    pub fn degree(self) -> usize {
        match self {
            PolyFunction::Identity => 1,
            PolyFunction::Gram => 2,
        }
    }

    pub fn output_shape(self, rows: usize, cols: usize) -> (usize, usize) {
        match self {
            PolyFunction::Identity => (rows, cols),
            PolyFunction::Gram => (cols, cols),
        }
    }

    pub fn apply(self, x: &ComplexMatrix) -> ComplexMatrix {
        match self {
            PolyFunction::Identity => x.clone(),
            PolyFunction::Gram => x.transpose().matmul(x).expect("transpose always conforms"),
        }
    }
}
