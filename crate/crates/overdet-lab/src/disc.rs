//! One-stop bundle of everything a solve needs: domain geometry, tensor grid,
//! metric jets, differentiation operators, and quadrature, built together so
//! they cannot drift out of sync.

use crate::error::Result;
use crate::geometry::{build_domain, DomainGeometry, MapJet};
use crate::grid::TensorGrid;
use crate::ops::DiffOps;
use crate::quad::Quadrature;
use crate::shape::BoundaryShape;

pub struct Discretization {
    pub geom: DomainGeometry,
    pub grid: TensorGrid,
    pub jets: Vec<MapJet>,
    pub ops: DiffOps,
    pub quad: Quadrature,
}

impl Discretization {
    pub fn new(shape: BoundaryShape, nr: usize, ntheta: usize) -> Result<Self> {
        let geom = build_domain(shape)?;
        let grid = TensorGrid::new(nr, ntheta, geom.shape.max_mode())?;
        let jets = grid.jets(&geom);
        let ops = DiffOps::build(&geom, &grid, &jets)?;
        let quad = Quadrature::build(&geom, &grid, &jets)?;
        Ok(Discretization { geom, grid, jets, ops, quad })
    }

    /// Flat node count.
    pub fn n(&self) -> usize {
        self.grid.n_total()
    }
}
