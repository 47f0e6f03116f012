use crate::error::{invalid, Result};

/// A point or vector in the plane.
pub type Point = [f64; 2];

pub(crate) fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

pub(crate) fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

pub(crate) fn cross(a: Point, b: Point) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

pub(crate) fn norm(a: Point) -> f64 {
    a[0].hypot(a[1])
}

/// Uniform node-centred grid. Node `(i, j)` sits at `origin + h * (i, j)`;
/// values are stored row-major with `i` running fastest.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    origin: Point,
    h: f64,
    nx: usize,
    ny: usize,
}

impl GridSpec {
    pub fn new(origin: Point, h: f64, nx: usize, ny: usize) -> Result<Self> {
        if !(h.is_finite() && h > 0.0) {
            return invalid(format!("grid spacing must be positive, got {h}"));
        }
        if nx < 3 || ny < 3 {
            return invalid(format!("grid needs at least 3 nodes per axis, got {nx}x{ny}"));
        }
        if !(origin[0].is_finite() && origin[1].is_finite()) {
            return invalid("grid origin must be finite");
        }
        Ok(Self { origin, h, nx, ny })
    }

    /// Square grid covering `[lo, hi]^2` with spacing `h`; `(hi - lo) / h` must be an integer.
    pub fn square(lo: f64, hi: f64, h: f64) -> Result<Self> {
        Self::rect([lo, hi], [lo, hi], h)
    }

    pub fn rect(xr: [f64; 2], yr: [f64; 2], h: f64) -> Result<Self> {
        let count = |lo: f64, hi: f64| -> Result<usize> {
            let n = (hi - lo) / h;
            let r = n.round();
            if !(n.is_finite() && r >= 2.0 && (n - r).abs() <= 1e-9 * r.max(1.0)) {
                return invalid(format!("extent [{lo}, {hi}] is not a multiple of h = {h}"));
            }
            Ok(r as usize + 1)
        };
        Self::new([xr[0], yr[0]], h, count(xr[0], xr[1])?, count(yr[0], yr[1])?)
    }

    pub fn origin(&self) -> Point {
        self.origin
    }
    pub fn h(&self) -> f64 {
        self.h
    }
    pub fn nx(&self) -> usize {
        self.nx
    }
    pub fn ny(&self) -> usize {
        self.ny
    }
    pub fn len(&self) -> usize {
        self.nx * self.ny
    }
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    #[inline]
    pub fn ij(&self, k: usize) -> (usize, usize) {
        (k % self.nx, k / self.nx)
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        self.origin[0] + self.h * i as f64
    }

    #[inline]
    pub fn y(&self, j: usize) -> f64 {
        self.origin[1] + self.h * j as f64
    }

    #[inline]
    pub fn point(&self, i: usize, j: usize) -> Point {
        [self.x(i), self.y(j)]
    }

    /// Upper-right corner of the physical extent.
    pub fn max_corner(&self) -> Point {
        [self.x(self.nx - 1), self.y(self.ny - 1)]
    }

    pub fn contains(&self, p: Point) -> bool {
        let tol = 1e-12 * self.h;
        let hi = self.max_corner();
        p[0] >= self.origin[0] - tol
            && p[0] <= hi[0] + tol
            && p[1] >= self.origin[1] - tol
            && p[1] <= hi[1] + tol
    }

    /// Whether the closed disk `B_r(center)` lies inside the grid extent.
    pub fn contains_disk(&self, center: Point, r: f64) -> bool {
        self.contains([center[0] - r, center[1] - r]) && self.contains([center[0] + r, center[1] + r])
    }

    /// Cell `(i, j)` containing `p` and the local coordinates in `[0, 1]^2`.
    pub fn locate(&self, p: Point) -> Option<(usize, usize, f64, f64)> {
        if !self.contains(p) {
            return None;
        }
        let fx = ((p[0] - self.origin[0]) / self.h).max(0.0);
        let fy = ((p[1] - self.origin[1]) / self.h).max(0.0);
        let i = (fx.floor() as usize).min(self.nx - 2);
        let j = (fy.floor() as usize).min(self.ny - 2);
        Some((i, j, (fx - i as f64).min(1.0), (fy - j as f64).min(1.0)))
    }

    /// Every second node; requires odd-compatible dims.
    pub fn coarsened(&self) -> Option<Self> {
        if (self.nx - 1) % 2 != 0 || (self.ny - 1) % 2 != 0 {
            return None;
        }
        let (nx, ny) = ((self.nx - 1) / 2 + 1, (self.ny - 1) / 2 + 1);
        Self::new(self.origin, 2.0 * self.h, nx, ny).ok()
    }
}

/// Closed subregion of the plane used to restrict quadrature and masks.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum Region {
    Whole,
    Rect { lo: Point, hi: Point },
    Disk { center: Point, radius: f64 },
}

impl Region {
    pub fn contains(&self, p: Point) -> bool {
        match *self {
            Region::Whole => true,
            Region::Rect { lo, hi } => p[0] >= lo[0] && p[0] <= hi[0] && p[1] >= lo[1] && p[1] <= hi[1],
            Region::Disk { center, radius } => norm(sub(p, center)) <= radius * (1.0 + 1e-12),
        }
    }

    /// A cell belongs to the region when all four corners do.
    pub fn contains_cell(&self, g: &GridSpec, i: usize, j: usize) -> bool {
        [(i, j), (i + 1, j), (i, j + 1), (i + 1, j + 1)]
            .iter()
            .all(|&(a, b)| self.contains(g.point(a, b)))
    }
}
