//! A graph together with everything derived from it.

use nalgebra::DVector;

use crate::error::Result;
use crate::graph::{laplacian, symmetrize, LaplacianMatrix, SymmetrizationData, Tolerances, WeightedDigraph};
use crate::spectral::{eigendecompose, Spectrum};

#[derive(Debug, Clone)]
pub struct NetworkModel {
    pub graph: WeightedDigraph,
    pub laplacian: LaplacianMatrix,
    pub symmetrization: SymmetrizationData,
    pub spectrum: Spectrum,
}

impl NetworkModel {
    pub fn new(graph: WeightedDigraph) -> Result<Self> {
        Self::with_tolerances(graph, &Tolerances::default())
    }

    pub fn with_tolerances(graph: WeightedDigraph, tol: &Tolerances) -> Result<Self> {
        let laplacian = laplacian(&graph);
        let symmetrization = symmetrize(&graph, tol)?;
        let spectrum = eigendecompose(&symmetrization)?;
        Ok(Self {
            graph,
            laplacian,
            symmetrization,
            spectrum,
        })
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::new(text.parse()?)
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    /// Node masses, normalized to sum to `n`.
    pub fn masses(&self) -> &DVector<f64> {
        &self.symmetrization.m
    }
}
