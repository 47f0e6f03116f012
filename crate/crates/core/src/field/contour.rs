//! Zero-level geometry of a scalar field: edge crossings, per-cell positivity
//! polygons and the marching-squares free-boundary polylines.
//!
//! Crossings on an edge between a positive node `p` and a non-positive node `q`
//! are placed by linear interpolation. For one-phase fields (no negative sample)
//! a zero at `q` carries no location information, so the profile is continued
//! past `p` with the ghost value `2 u(p) - u(pp)`, `pp` being the next node
//! beyond `p` on the same line; the crossing is then interpolated against the
//! ghost when it is negative, and falls on `q` otherwise.

use std::collections::HashMap;

use super::fit::{positive_side_fit, LocalFit};
use super::grid::{dot, norm, sub, GridSpec, Point};
use super::types::{ScalarField, Sym2};

/// Crossing rule bound to one field.
pub(crate) struct Level<'a> {
    u: &'a ScalarField,
    one_phase: bool,
}

impl<'a> Level<'a> {
    pub(crate) fn new(u: &'a ScalarField) -> Self {
        Self { u, one_phase: u.is_one_phase() }
    }

    #[inline]
    pub(crate) fn positive(&self, i: usize, j: usize) -> bool {
        self.u.at(i, j) > 0.0
    }

    /// Fraction in `[0, 1]` from `(pi, pj)` (positive) towards its axis
    /// neighbour `(qi, qj)` (non-positive) where the zero level crosses.
    pub(crate) fn fraction(&self, pi: usize, pj: usize, qi: usize, qj: usize) -> f64 {
        let up = self.u.at(pi, pj);
        let uq = self.u.at(qi, qj);
        if uq < 0.0 || !self.one_phase {
            return (up / (up - uq)).clamp(0.0, 1.0);
        }
        let g = self.u.grid();
        let di = pi as isize - qi as isize;
        let dj = pj as isize - qj as isize;
        let (ppi, ppj) = (pi as isize + di, pj as isize + dj);
        if ppi < 0 || ppj < 0 || ppi >= g.nx() as isize || ppj >= g.ny() as isize {
            return 1.0;
        }
        let upp = self.u.at(ppi as usize, ppj as usize);
        let ghost = 2.0 * up - upp;
        if ghost < 0.0 {
            (up / (up - ghost)).clamp(0.0, 1.0)
        } else {
            1.0
        }
    }

    /// Crossing point on the edge between two axis-adjacent nodes of opposite sign.
    pub(crate) fn crossing(&self, a: (usize, usize), b: (usize, usize)) -> Point {
        let g = self.u.grid();
        let (p, q) = if self.positive(a.0, a.1) { (a, b) } else { (b, a) };
        let t = self.fraction(p.0, p.1, q.0, q.1);
        let pp = g.point(p.0, p.1);
        let qq = g.point(q.0, q.1);
        [pp[0] + t * (qq[0] - pp[0]), pp[1] + t * (qq[1] - pp[1])]
    }
}

/// Global id of the edge from corner `k` to corner `k + 1` of cell `(i, j)`.
fn edge_id(g: &GridSpec, i: usize, j: usize, k: usize) -> usize {
    match k {
        0 => 2 * g.idx(i, j),
        1 => 2 * g.idx(i + 1, j) + 1,
        2 => 2 * g.idx(i, j + 1),
        _ => 2 * g.idx(i, j) + 1,
    }
}

fn corners(i: usize, j: usize) -> [(usize, usize); 4] {
    [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)]
}

/// Pieces of one cell: positivity polygons (counter-clockwise) and oriented
/// boundary segments with the positive side on their left.
pub(crate) struct CellGeometry {
    pub polygons: Vec<Vec<Point>>,
    pub segments: Vec<(usize, Point, usize, Point)>,
}

pub(crate) fn cell_geometry(level: &Level<'_>, i: usize, j: usize) -> CellGeometry {
    let g = level.u.grid();
    let cs = corners(i, j);
    let s: [bool; 4] = std::array::from_fn(|k| level.positive(cs[k].0, cs[k].1));
    let npos = s.iter().filter(|&&b| b).count();
    if npos == 0 {
        return CellGeometry { polygons: vec![], segments: vec![] };
    }
    if npos == 4 {
        let poly = cs.iter().map(|&(a, b)| g.point(a, b)).collect();
        return CellGeometry { polygons: vec![poly], segments: vec![] };
    }
    let cross = |k: usize| level.crossing(cs[k], cs[(k + 1) % 4]);
    let saddle = npos == 2 && s[0] == s[2];
    if saddle {
        let center = 0.25 * cs.iter().map(|&(a, b)| level.u.at(a, b)).sum::<f64>();
        if center <= 0.0 {
            // two separated corners: triangles around each positive corner
            let mut polygons = Vec::new();
            let mut segments = Vec::new();
            for k in 0..4 {
                if !s[k] {
                    continue;
                }
                let prev = (k + 3) % 4;
                let out = cross(k);
                let inn = cross(prev);
                polygons.push(vec![g.point(cs[k].0, cs[k].1), out, inn]);
                segments.push((edge_id(g, i, j, k), out, edge_id(g, i, j, prev), inn));
            }
            return CellGeometry { polygons, segments };
        }
    }
    let mut poly = Vec::with_capacity(6);
    let mut exits: Vec<(usize, Point)> = Vec::new();
    let mut entries: Vec<(usize, Point)> = Vec::new();
    // walk order of crossing events, to pair each exit with the next entry
    let mut events: Vec<(bool, usize, Point)> = Vec::new();
    for k in 0..4 {
        if s[k] {
            poly.push(g.point(cs[k].0, cs[k].1));
        }
        let n = (k + 1) % 4;
        if s[k] != s[n] {
            let p = cross(k);
            poly.push(p);
            let e = edge_id(g, i, j, k);
            events.push((s[k], e, p));
            if s[k] {
                exits.push((e, p));
            } else {
                entries.push((e, p));
            }
        }
    }
    let mut segments = Vec::new();
    let m = events.len();
    for a in 0..m {
        if events[a].0 {
            // exit: pair with the next entry in walk order
            for d in 1..m {
                let b = (a + d) % m;
                if !events[b].0 {
                    segments.push((events[a].1, events[a].2, events[b].1, events[b].2));
                    break;
                }
            }
        }
    }
    CellGeometry { polygons: vec![poly], segments }
}

/// One sample of the free boundary.
#[derive(Clone, Debug, PartialEq)]
pub struct FbVertex {
    pub position: Point,
    /// Unit normal pointing into `{u > 0}`.
    pub normal: Point,
    /// One-sided gradient of `u` from the positive side.
    pub gradient: Point,
    /// Arc length attributed to the vertex (half of each adjacent segment).
    pub weight: f64,
    /// One-sided Hessian from the local fit, when the fit had enough support.
    pub hessian: Option<Sym2>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Polyline {
    pub vertices: Vec<FbVertex>,
    pub closed: bool,
}

impl Polyline {
    /// Segment `k` joins vertex `k` to `k + 1` (wrapping when closed).
    pub fn segment_count(&self) -> usize {
        let n = self.vertices.len();
        if self.closed {
            n
        } else {
            n.saturating_sub(1)
        }
    }

    pub fn segment(&self, k: usize) -> (&FbVertex, &FbVertex) {
        let n = self.vertices.len();
        (&self.vertices[k], &self.vertices[(k + 1) % n])
    }

    pub fn length(&self) -> f64 {
        (0..self.segment_count())
            .map(|k| {
                let (a, b) = self.segment(k);
                norm(sub(b.position, a.position))
            })
            .sum()
    }
}

/// Polyline approximation of `∂{u > 0}`.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct FreeBoundary {
    pub polylines: Vec<Polyline>,
    pub h: f64,
}

impl FreeBoundary {
    pub fn is_empty(&self) -> bool {
        self.polylines.iter().all(|p| p.vertices.is_empty())
    }

    pub fn vertices(&self) -> impl Iterator<Item = &FbVertex> {
        self.polylines.iter().flat_map(|p| p.vertices.iter())
    }

    pub fn vertex_count(&self) -> usize {
        self.polylines.iter().map(|p| p.vertices.len()).sum()
    }

    /// Vertex nearest to `p`, with its distance.
    pub fn nearest_vertex(&self, p: Point) -> Option<(&FbVertex, f64)> {
        self.vertices()
            .map(|v| (v, norm(sub(v.position, p))))
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }

    /// Distance from `p` to the polylines (segments included).
    pub fn distance(&self, p: Point) -> f64 {
        let mut best = f64::INFINITY;
        for pl in &self.polylines {
            if pl.vertices.len() == 1 {
                best = best.min(norm(sub(pl.vertices[0].position, p)));
            }
            for k in 0..pl.segment_count() {
                let (a, b) = pl.segment(k);
                best = best.min(point_segment_distance(p, a.position, b.position));
            }
        }
        best
    }

    /// Per-node distance to the polylines, exact up to `cap` and saturated at `cap` beyond.
    pub fn distance_field(&self, grid: &GridSpec, cap: f64) -> Vec<f64> {
        let mut dist = vec![cap; grid.len()];
        let h = grid.h();
        let reach = (cap / h).ceil() as isize + 1;
        for pl in &self.polylines {
            let nseg = pl.segment_count().max(usize::from(!pl.vertices.is_empty()));
            for k in 0..nseg {
                let (a, b) = if pl.segment_count() == 0 {
                    (&pl.vertices[0], &pl.vertices[0])
                } else {
                    pl.segment(k)
                };
                let (pa, pb) = (a.position, b.position);
                let lo = [pa[0].min(pb[0]), pa[1].min(pb[1])];
                let hi = [pa[0].max(pb[0]), pa[1].max(pb[1])];
                let o = grid.origin();
                let i0 = (((lo[0] - o[0]) / h).floor() as isize - reach).max(0) as usize;
                let j0 = (((lo[1] - o[1]) / h).floor() as isize - reach).max(0) as usize;
                let i1 = ((((hi[0] - o[0]) / h).ceil() as isize + reach).max(0) as usize).min(grid.nx() - 1);
                let j1 = ((((hi[1] - o[1]) / h).ceil() as isize + reach).max(0) as usize).min(grid.ny() - 1);
                for j in j0..=j1 {
                    for i in i0..=i1 {
                        let d = point_segment_distance(grid.point(i, j), pa, pb);
                        let slot = &mut dist[grid.idx(i, j)];
                        if d < *slot {
                            *slot = d;
                        }
                    }
                }
            }
        }
        dist
    }
}

pub(crate) fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let ab = sub(b, a);
    let l2 = dot(ab, ab);
    if l2 == 0.0 {
        return norm(sub(p, a));
    }
    let t = (dot(sub(p, a), ab) / l2).clamp(0.0, 1.0);
    norm(sub(p, [a[0] + t * ab[0], a[1] + t * ab[1]]))
}

/// Marching-squares extraction of the zero level of `u`, oriented with
/// `{u > 0}` on the left, with normals and gradients from a one-sided local
/// fit on the positive side. No sign change yields an empty boundary.
pub fn extract_free_boundary(u: &ScalarField) -> FreeBoundary {
    extract_free_boundary_in(u, |_, _| true)
}

/// As [`extract_free_boundary`], keeping only the pieces inside cells `(i, j)`
/// accepted by `keep` (for instance cells of a non-rectangular domain, whose
/// rim would otherwise read as a zero level).
pub fn extract_free_boundary_in(u: &ScalarField, keep: impl Fn(usize, usize) -> bool) -> FreeBoundary {
    let g = *u.grid();
    let h = g.h();
    let level = Level::new(u);
    let mut segs: Vec<(usize, Point, usize, Point)> = Vec::new();
    for j in 0..g.ny() - 1 {
        for i in 0..g.nx() - 1 {
            if keep(i, j) {
                segs.extend(cell_geometry(&level, i, j).segments);
            }
        }
    }
    let mut by_start: HashMap<usize, usize> = HashMap::with_capacity(segs.len());
    let mut is_end: HashMap<usize, ()> = HashMap::with_capacity(segs.len());
    for (k, s) in segs.iter().enumerate() {
        by_start.insert(s.0, k);
        is_end.insert(s.2, ());
    }
    let mut used = vec![false; segs.len()];
    let mut chains: Vec<(Vec<Point>, bool)> = Vec::new();
    let follow = |start: usize, used: &mut Vec<bool>| -> (Vec<Point>, bool) {
        let mut pts = vec![segs[start].1];
        let mut k = start;
        loop {
            used[k] = true;
            pts.push(segs[k].3);
            match by_start.get(&segs[k].2) {
                Some(&n) if n == start => return (pts, true),
                Some(&n) if !used[n] => k = n,
                _ => return (pts, false),
            }
        }
    };
    // open chains start where no segment ends (grid boundary)
    let mut order: Vec<usize> = (0..segs.len()).filter(|&k| !is_end.contains_key(&segs[k].0)).collect();
    order.sort_unstable_by_key(|&k| segs[k].0);
    for k in order {
        if !used[k] {
            chains.push(follow(k, &mut used));
        }
    }
    let mut rest: Vec<usize> = (0..segs.len()).filter(|&k| !used[k]).collect();
    rest.sort_unstable_by_key(|&k| segs[k].0);
    for k in rest {
        if !used[k] {
            chains.push(follow(k, &mut used));
        }
    }

    let tol = 1e-9 * h;
    let mut polylines = Vec::with_capacity(chains.len());
    for (pts, closed) in chains {
        let mut clean: Vec<Point> = Vec::with_capacity(pts.len());
        for p in pts {
            if clean.last().is_none_or(|q: &Point| norm(sub(p, *q)) > tol) {
                clean.push(p);
            }
        }
        if closed && clean.len() > 1 && norm(sub(clean[0], *clean.last().unwrap())) <= tol {
            clean.pop();
        }
        if clean.len() < 2 {
            continue;
        }
        polylines.push(build_polyline(u, &clean, closed));
    }
    FreeBoundary { polylines, h }
}

fn build_polyline(u: &ScalarField, pts: &[Point], closed: bool) -> Polyline {
    let n = pts.len();
    let seg_len = |a: usize, b: usize| norm(sub(pts[b], pts[a]));
    let vertices = (0..n)
        .map(|k| {
            let prev = if k > 0 { Some(k - 1) } else if closed && n > 1 { Some(n - 1) } else { None };
            let next = if k + 1 < n { Some(k + 1) } else if closed && n > 1 { Some(0) } else { None };
            let weight = 0.5 * (prev.map_or(0.0, |p| seg_len(p, k)) + next.map_or(0.0, |q| seg_len(k, q)));
            let a = pts[prev.unwrap_or(k)];
            let b = pts[next.unwrap_or(k)];
            let t = sub(b, a);
            let tl = norm(t);
            let geo_normal = if tl > 0.0 { [-t[1] / tl, t[0] / tl] } else { [0.0, 0.0] };
            let fit: Option<LocalFit> = positive_side_fit(u, pts[k], geo_normal);
            let (gradient, hessian) = match fit {
                Some(f) => (f.gradient, f.hessian),
                None => ([0.0, 0.0], None),
            };
            let gl = norm(gradient);
            let normal = if gl > 0.0 && dot(gradient, geo_normal) > -0.5 * gl {
                [gradient[0] / gl, gradient[1] / gl]
            } else {
                geo_normal
            };
            FbVertex { position: pts[k], normal, gradient, weight, hessian }
        })
        .collect();
    Polyline { vertices, closed }
}
