//! Planar lattices with a fixed absolute offset, restricted to a rectangle or
//! a centred disc.
//!
//! Interior nodes are the lattice points strictly inside the domain. Boundary
//! nodes are the lattice points outside it that are 4-neighbours of an
//! interior node; Dirichlet data lives there. Refining a grid keeps the
//! absolute offset, so every coarse node is also a node of the refined grid.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Minimum number of distinct interior rows and columns.
pub const MIN_EXTENT: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "kebab-case")]
pub enum Domain {
    Rectangle {
        x_min: f64,
        x_max: f64,
        y_min: f64,
        y_max: f64,
    },
    /// Open disc of the given radius about the origin.
    Disc { radius: f64 },
}

impl Domain {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        match *self {
            Domain::Rectangle {
                x_min,
                x_max,
                y_min,
                y_max,
            } => x > x_min && x < x_max && y > y_min && y < y_max,
            Domain::Disc { radius } => x * x + y * y < radius * radius,
        }
    }

    /// Signed distance to the domain boundary, positive inside.
    pub fn distance_to_boundary(&self, x: f64, y: f64) -> f64 {
        match *self {
            Domain::Rectangle {
                x_min,
                x_max,
                y_min,
                y_max,
            } => (x - x_min).min(x_max - x).min(y - y_min).min(y_max - y),
            Domain::Disc { radius } => radius - x.hypot(y),
        }
    }

    fn bounding_box(&self) -> [f64; 4] {
        match *self {
            Domain::Rectangle {
                x_min,
                x_max,
                y_min,
                y_max,
            } => [x_min, x_max, y_min, y_max],
            Domain::Disc { radius } => [-radius, radius, -radius, radius],
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            Domain::Rectangle {
                x_min,
                x_max,
                y_min,
                y_max,
            } => [x_min, x_max, y_min, y_max].iter().all(|v| v.is_finite())
                && x_min < x_max
                && y_min < y_max,
            Domain::Disc { radius } => radius.is_finite() && radius > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("degenerate domain {self:?}")))
        }
    }
}

/// Serializable description of a grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub domain: Domain,
    pub h: f64,
    /// Absolute lattice offset; `None` means `(h/3, h/3)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offset: Option<[f64; 2]>,
}

impl GridSpec {
    pub fn new(domain: Domain, h: f64) -> Self {
        Self {
            domain,
            h,
            offset: None,
        }
    }

    pub fn with_offset(mut self, offset: [f64; 2]) -> Self {
        self.offset = Some(offset);
        self
    }

    pub fn resolved_offset(&self) -> [f64; 2] {
        self.offset.unwrap_or([self.h / 3.0, self.h / 3.0])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NodeKind {
    Interior,
    Boundary,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Node {
    pub ix: i64,
    pub iy: i64,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone)]
pub struct Grid2D {
    domain: Domain,
    h: f64,
    offset: [f64; 2],
    /// Interior nodes first (row-major), then boundary nodes.
    nodes: Vec<Node>,
    n_interior: usize,
    /// Dense lookup over the index box `[ix_lo, ix_hi] × [iy_lo, iy_hi]`.
    ix_lo: i64,
    iy_lo: i64,
    width: usize,
    height: usize,
    lookup: Vec<usize>,
    /// East, west, north, south neighbour of each interior node.
    neighbors: Vec<[usize; 4]>,
}

const NONE: usize = usize::MAX;

impl Grid2D {
    pub fn new(spec: &GridSpec) -> Result<Self> {
        spec.domain.validate()?;
        let h = spec.h;
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::InvalidInput(format!("grid spacing h = {h}")));
        }
        let offset = spec.resolved_offset();
        if !offset.iter().all(|o| o.is_finite()) {
            return Err(Error::InvalidInput(format!("grid offset {offset:?}")));
        }
        let [bx0, bx1, by0, by1] = spec.domain.bounding_box();
        // one extra layer on each side holds the boundary ring
        let ix_lo = ((bx0 - offset[0]) / h).floor() as i64 - 1;
        let ix_hi = ((bx1 - offset[0]) / h).ceil() as i64 + 1;
        let iy_lo = ((by0 - offset[1]) / h).floor() as i64 - 1;
        let iy_hi = ((by1 - offset[1]) / h).ceil() as i64 + 1;
        let width = (ix_hi - ix_lo + 1) as usize;
        let height = (iy_hi - iy_lo + 1) as usize;
        let coord = |ix: i64, iy: i64| (offset[0] + ix as f64 * h, offset[1] + iy as f64 * h);

        let mut inside = vec![false; width * height];
        for iy in 0..height {
            for ix in 0..width {
                let (x, y) = coord(ix as i64 + ix_lo, iy as i64 + iy_lo);
                inside[iy * width + ix] = spec.domain.contains(x, y);
            }
        }
        // the extra layer guarantees no interior node touches the box edge
        let mut lookup = vec![NONE; width * height];
        let mut nodes = Vec::new();
        for iy in 0..height {
            for ix in 0..width {
                if inside[iy * width + ix] {
                    let (gx, gy) = (ix as i64 + ix_lo, iy as i64 + iy_lo);
                    let (x, y) = coord(gx, gy);
                    lookup[iy * width + ix] = nodes.len();
                    nodes.push(Node { ix: gx, iy: gy, x, y });
                }
            }
        }
        let n_interior = nodes.len();
        for iy in 0..height {
            for ix in 0..width {
                let slot = iy * width + ix;
                if inside[slot] {
                    continue;
                }
                let touches = [(1i64, 0i64), (-1, 0), (0, 1), (0, -1)].iter().any(|(dx, dy)| {
                    let (nx, ny) = (ix as i64 + dx, iy as i64 + dy);
                    nx >= 0
                        && ny >= 0
                        && (nx as usize) < width
                        && (ny as usize) < height
                        && inside[ny as usize * width + nx as usize]
                });
                if touches {
                    let (gx, gy) = (ix as i64 + ix_lo, iy as i64 + iy_lo);
                    let (x, y) = coord(gx, gy);
                    lookup[slot] = nodes.len();
                    nodes.push(Node { ix: gx, iy: gy, x, y });
                }
            }
        }

        let mut grid = Self {
            domain: spec.domain,
            h,
            offset,
            nodes,
            n_interior,
            ix_lo,
            iy_lo,
            width,
            height,
            lookup,
            neighbors: Vec::new(),
        };
        grid.neighbors = (0..n_interior)
            .map(|k| {
                let Node { ix, iy, .. } = grid.nodes[k];
                [(1, 0), (-1, 0), (0, 1), (0, -1)].map(|(dx, dy)| {
                    grid.index_of(ix + dx, iy + dy)
                        .expect("interior neighbours are always stored")
                })
            })
            .collect();

        let cols = grid.interior_extent(|n| n.ix);
        let rows = grid.interior_extent(|n| n.iy);
        if cols < MIN_EXTENT || rows < MIN_EXTENT {
            return Err(Error::InvalidInput(format!(
                "grid has {cols}×{rows} interior nodes, need at least {MIN_EXTENT}×{MIN_EXTENT}"
            )));
        }
        Ok(grid)
    }

    fn interior_extent(&self, key: impl Fn(&Node) -> i64) -> usize {
        let it = self.nodes[..self.n_interior].iter().map(&key);
        match (it.clone().min(), it.max()) {
            (Some(lo), Some(hi)) => (hi - lo + 1) as usize,
            _ => 0,
        }
    }

    pub fn spec(&self) -> GridSpec {
        GridSpec {
            domain: self.domain,
            h: self.h,
            offset: Some(self.offset),
        }
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn offset(&self) -> [f64; 2] {
        self.offset
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, k: usize) -> Node {
        self.nodes[k]
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_interior(&self) -> usize {
        self.n_interior
    }

    pub fn kind(&self, k: usize) -> NodeKind {
        if k < self.n_interior {
            NodeKind::Interior
        } else {
            NodeKind::Boundary
        }
    }

    /// Neighbours (E, W, N, S) of interior node `k`.
    pub fn neighbors(&self, k: usize) -> [usize; 4] {
        self.neighbors[k]
    }

    pub fn index_of(&self, ix: i64, iy: i64) -> Option<usize> {
        let (cx, cy) = (ix - self.ix_lo, iy - self.iy_lo);
        if cx < 0 || cy < 0 || cx as usize >= self.width || cy as usize >= self.height {
            return None;
        }
        let v = self.lookup[cy as usize * self.width + cx as usize];
        (v != NONE).then_some(v)
    }

    pub fn distance_to_boundary(&self, k: usize) -> f64 {
        let n = self.nodes[k];
        self.domain.distance_to_boundary(n.x, n.y)
    }

    /// Interior nodes at distance at least `margin` from the domain boundary.
    pub fn test_region(&self, margin: f64) -> Vec<usize> {
        (0..self.n_interior)
            .filter(|&k| self.distance_to_boundary(k) >= margin)
            .collect()
    }

    /// Interior node closest to `(x, y)`.
    pub fn nearest_interior(&self, x: f64, y: f64) -> Option<usize> {
        (0..self.n_interior).min_by(|&a, &b| {
            let da = (self.nodes[a].x - x).hypot(self.nodes[a].y - y);
            let db = (self.nodes[b].x - x).hypot(self.nodes[b].y - y);
            da.total_cmp(&db)
        })
    }

    /// The `(2 half + 1)²` interior nodes centred on the node nearest `(x, y)`.
    pub fn patch(&self, x: f64, y: f64, half: i64) -> Result<Vec<usize>> {
        let c = self
            .nearest_interior(x, y)
            .ok_or_else(|| Error::InvalidInput("grid has no interior nodes".into()))?;
        let Node { ix, iy, .. } = self.nodes[c];
        let mut out = Vec::new();
        for dy in -half..=half {
            for dx in -half..=half {
                match self.index_of(ix + dx, iy + dy) {
                    Some(k) if k < self.n_interior => out.push(k),
                    _ => {
                        return Err(Error::InvalidInput(format!(
                            "patch around ({x}, {y}) leaves the interior"
                        )))
                    }
                }
            }
        }
        Ok(out)
    }

    /// Same domain and offset at spacing `h/2`.
    pub fn halved(&self) -> Result<Self> {
        Grid2D::new(&GridSpec {
            domain: self.domain,
            h: self.h / 2.0,
            offset: Some(self.offset),
        })
    }

    /// Ratio `coarse.h / self.h` when `self` refines `coarse` by a power of
    /// two with the same domain and offset.
    pub fn refinement_factor(&self, coarse: &Grid2D) -> Result<i64> {
        if self.domain != coarse.domain || self.offset != coarse.offset {
            return Err(Error::NotNested(
                "grids differ in domain or lattice offset".into(),
            ));
        }
        let ratio = coarse.h / self.h;
        let k = ratio.round();
        if k < 1.0 || (ratio - k).abs() > 1e-9 * ratio || (k as i64).count_ones() != 1 {
            return Err(Error::NotNested(format!(
                "spacing ratio {ratio} is not a power of two"
            )));
        }
        Ok(k as i64)
    }

    /// For each coarse node in `coarse_nodes`, the matching node of `self`.
    pub fn embed(&self, coarse: &Grid2D, coarse_nodes: &[usize]) -> Result<Vec<usize>> {
        let f = self.refinement_factor(coarse)?;
        coarse_nodes
            .iter()
            .map(|&k| {
                let n = coarse.nodes[k];
                self.index_of(n.ix * f, n.iy * f).ok_or_else(|| {
                    Error::NotNested(format!("coarse node ({}, {}) has no fine match", n.ix, n.iy))
                })
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disc(h: f64) -> Grid2D {
        Grid2D::new(&GridSpec::new(Domain::Disc { radius: 0.9 }, h)).unwrap()
    }

    #[test]
    fn interior_and_boundary_partition() {
        let g = disc(1.0 / 16.0);
        for k in 0..g.n_interior() {
            let n = g.node(k);
            assert!(n.x.hypot(n.y) < 0.9);
            for nb in g.neighbors(k) {
                let m = g.node(nb);
                assert_eq!((m.ix - n.ix).abs() + (m.iy - n.iy).abs(), 1);
            }
        }
        for k in g.n_interior()..g.node_count() {
            let n = g.node(k);
            assert!(n.x.hypot(n.y) >= 0.9);
            assert!(n.x.hypot(n.y) < 0.9 + g.h() * 1.5);
            assert_eq!(g.kind(k), NodeKind::Boundary);
        }
    }

    #[test]
    fn default_offset_keeps_origin_off_lattice() {
        let g = disc(1.0 / 32.0);
        let min = g.nodes().iter().map(|n| n.x.hypot(n.y)).fold(f64::INFINITY, f64::min);
        assert!(min > 0.3 * g.h());
    }

    #[test]
    fn refinement_nests() {
        let g = disc(1.0 / 16.0);
        let f = g.halved().unwrap().halved().unwrap();
        assert_eq!(f.refinement_factor(&g).unwrap(), 4);
        let region = g.test_region(0.2);
        let emb = f.embed(&g, &region).unwrap();
        for (c, k) in region.iter().zip(emb) {
            assert!((g.node(*c).x - f.node(k).x).abs() < 1e-14);
            assert!((g.node(*c).y - f.node(k).y).abs() < 1e-14);
        }
    }

    #[test]
    fn non_nested_rejected() {
        let g = disc(1.0 / 16.0);
        let other = Grid2D::new(&GridSpec::new(Domain::Disc { radius: 0.9 }, 1.0 / 32.0)).unwrap();
        // default offsets differ (h/3 at each level)
        assert!(matches!(other.refinement_factor(&g), Err(Error::NotNested(_))));
        let odd = Grid2D::new(
            &GridSpec::new(Domain::Disc { radius: 0.9 }, 1.0 / 48.0).with_offset(g.offset()),
        )
        .unwrap();
        assert!(odd.refinement_factor(&g).is_err());
    }

    #[test]
    fn too_coarse_rejected() {
        let r = Grid2D::new(&GridSpec::new(Domain::Disc { radius: 0.9 }, 0.2));
        assert!(r.is_err());
    }

    #[test]
    fn rectangle_region_and_patch() {
        let spec = GridSpec::new(
            Domain::Rectangle {
                x_min: -1.0,
                x_max: 1.0,
                y_min: -1.0,
                y_max: 1.0,
            },
            1.0 / 16.0,
        );
        let g = Grid2D::new(&spec).unwrap();
        assert_eq!(g.n_interior(), 32 * 32);
        assert!(g.test_region(0.5).len() < g.n_interior());
        let p = g.patch(0.0, 0.0, 1).unwrap();
        assert_eq!(p.len(), 9);
        assert!(g.patch(0.99, 0.0, 3).is_err());
    }
}
