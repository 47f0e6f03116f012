use super::grid::{GridSpec, Point};
use crate::error::{invalid, Result};

/// Grid samples of a scalar function.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    grid: GridSpec,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return invalid(format!(
                "expected {} values for a {}x{} grid, got {}",
                grid.len(),
                grid.nx(),
                grid.ny(),
                values.len()
            ));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            let (i, j) = grid.ij(k);
            return invalid(format!("non-finite value at node ({i}, {j})"));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self { grid, values: vec![0.0; grid.len()] }
    }

    /// Samples `f` at every node. Non-finite samples are rejected.
    pub fn from_fn(grid: GridSpec, f: impl Fn(Point) -> f64) -> Result<Self> {
        let mut values = Vec::with_capacity(grid.len());
        for j in 0..grid.ny() {
            for i in 0..grid.nx() {
                values.push(f(grid.point(i, j)));
            }
        }
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Crate-internal mutable access; callers keep values finite.
    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.idx(i, j)]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// True when no sample is negative: the field is a one-phase profile whose
    /// zero set is a clamped region rather than a sign change.
    pub fn is_one_phase(&self) -> bool {
        self.values.iter().all(|&v| v >= 0.0)
    }

    pub fn has_sign_change(&self) -> bool {
        self.values.iter().any(|&v| v > 0.0) && self.values.iter().any(|&v| v <= 0.0)
    }

    /// Bilinear interpolation; `None` outside the grid.
    pub fn bilinear(&self, p: Point) -> Option<f64> {
        let (i, j, fx, fy) = self.grid.locate(p)?;
        let v00 = self.at(i, j);
        let v10 = self.at(i + 1, j);
        let v01 = self.at(i, j + 1);
        let v11 = self.at(i + 1, j + 1);
        Some((1.0 - fy) * ((1.0 - fx) * v00 + fx * v10) + fy * ((1.0 - fx) * v01 + fx * v11))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    /// Rotates the sample array by 90 degrees counter-clockwise about the grid centre.
    /// Only meaningful for square grids.
    pub fn rotated_90(&self) -> Result<Self> {
        let (nx, ny) = (self.grid.nx(), self.grid.ny());
        let grid = GridSpec::new(self.grid.origin(), self.grid.h(), ny, nx)?;
        let mut values = vec![0.0; self.values.len()];
        for j in 0..ny {
            for i in 0..nx {
                // (i, j) -> (ny - 1 - j, i)
                values[grid.idx(ny - 1 - j, i)] = self.at(i, j);
            }
        }
        Self::new(grid, values)
    }
}

/// Symmetric 2x2 matrix.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Sym2 {
    pub xx: f64,
    pub xy: f64,
    pub yy: f64,
}

impl Sym2 {
    pub const IDENTITY: Sym2 = Sym2 { xx: 1.0, xy: 0.0, yy: 1.0 };

    pub fn new(xx: f64, xy: f64, yy: f64) -> Self {
        Self { xx, xy, yy }
    }

    pub fn trace(&self) -> f64 {
        self.xx + self.yy
    }

    pub fn apply(&self, v: Point) -> Point {
        [self.xx * v[0] + self.xy * v[1], self.xy * v[0] + self.yy * v[1]]
    }

    /// `v^T A w`
    pub fn bilinear(&self, v: Point, w: Point) -> f64 {
        let aw = self.apply(w);
        v[0] * aw[0] + v[1] * aw[1]
    }

    /// Contraction `A : B = sum_ij a_ij b_ij`.
    pub fn contract(&self, other: &Sym2) -> f64 {
        self.xx * other.xx + 2.0 * self.xy * other.xy + self.yy * other.yy
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let m = 0.5 * (self.xx + self.yy);
        let d = (0.5 * (self.xx - self.yy)).hypot(self.xy);
        (m - d, m + d)
    }

    pub fn is_finite(&self) -> bool {
        self.xx.is_finite() && self.xy.is_finite() && self.yy.is_finite()
    }
}

/// Per-node vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    pub grid: GridSpec,
    pub values: Vec<Point>,
}

impl VectorField {
    #[inline]
    pub fn at(&self, i: usize, j: usize) -> Point {
        self.values[self.grid.idx(i, j)]
    }
}

/// Per-node symmetric matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixField {
    pub grid: GridSpec,
    pub values: Vec<Sym2>,
}

impl MatrixField {
    #[inline]
    pub fn at(&self, i: usize, j: usize) -> Sym2 {
        self.values[self.grid.idx(i, j)]
    }
}
