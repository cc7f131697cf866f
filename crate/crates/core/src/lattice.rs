//! Periodic toric-code lattice and the pooling combinatorics built on top of it.
//!
//! ## Indexing
//!
//! The torus has `l1` cells horizontally and `l2` cells vertically. Sites sit at
//! `(row, col)` with `row < l2`, `col < l1`; rows grow downwards. Each site owns
//! two edges:
//!
//! - the horizontal edge `H(row, col)` from site `(row, col)` to `(row, col + 1)`,
//! - the vertical edge `V(row, col)` from site `(row, col)` to `(row + 1, col)`.
//!
//! Flat qubit ids are sublattice-major, then row-major: `H(r, c) = r * l1 + c` and
//! `V(r, c) = l1 * l2 + r * l1 + c`. Every other module uses this convention.
//!
//! The plaquette `(r, c)` is the cell whose top-left corner is site `(r, c)`; its
//! edges are `H(r, c)`, `V(r, c)`, `H(r + 1, c)` and `V(r, c + 1)`. The vertex
//! `(r, c)` is the site itself, with edges `H(r, c)`, `H(r, c - 1)`, `V(r, c)` and
//! `V(r - 1, c)`. Plaquettes carry X-type stabilizers, vertices Z-type ones.

use crate::error::{Error, Result};

/// Edge orientation; each sublattice holds `l1 * l2` qubits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sublattice {
    Horizontal,
    Vertical,
}

/// An edge addressed by sublattice and cell coordinate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Edge {
    pub sublattice: Sublattice,
    pub row: usize,
    pub col: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StabilizerKind {
    /// Product of X on the four edges around a cell.
    Plaquette,
    /// Product of Z on the four edges meeting at a site.
    Vertex,
}

/// A stabilizer generator. Coordinates are reduced modulo the torus on lookup.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StabilizerId {
    pub kind: StabilizerKind,
    pub row: usize,
    pub col: usize,
}

impl StabilizerId {
    pub fn plaquette(row: usize, col: usize) -> Self {
        Self { kind: StabilizerKind::Plaquette, row, col }
    }

    pub fn vertex(row: usize, col: usize) -> Self {
        Self { kind: StabilizerKind::Vertex, row, col }
    }
}

/// Supports of the four non-contractible strings.
///
/// `z_horizontal` and `x_horizontal` wind around the horizontal cycle and commute
/// with each other; each anticommutes with the vertical string of the other type.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LogicalOperators {
    /// Z on `V(0, c)` for every column (Wilson loop, horizontal cycle).
    pub z_horizontal: Vec<usize>,
    /// Z on `H(r, 0)` for every row (Wilson loop, vertical cycle).
    pub z_vertical: Vec<usize>,
    /// X on `H(0, c)` for every column ('t Hooft loop, horizontal cycle).
    pub x_horizontal: Vec<usize>,
    /// X on `V(r, 0)` for every row ('t Hooft loop, vertical cycle).
    pub x_vertical: Vec<usize>,
}

/// Periodic `l1 x l2` toric-code lattice with precomputed incidence maps.
#[derive(Clone, Debug)]
pub struct LatticeGeometry {
    l1: usize,
    l2: usize,
    plaquettes: Vec<[usize; 4]>,
    vertices: Vec<[usize; 4]>,
    qubit_plaquettes: Vec<[usize; 2]>,
    qubit_vertices: Vec<[usize; 2]>,
}

impl LatticeGeometry {
    /// Builds the torus. Both sides must be at least 2.
    pub fn build_torus(l1: usize, l2: usize) -> Result<Self> {
        if l1 < 2 || l2 < 2 {
            return Err(Error::InvalidLattice(format!(
                "torus sides must be >= 2, got {l1} x {l2}"
            )));
        }
        let mut geom = Self {
            l1,
            l2,
            plaquettes: Vec::with_capacity(l1 * l2),
            vertices: Vec::with_capacity(l1 * l2),
            qubit_plaquettes: vec![[usize::MAX; 2]; 2 * l1 * l2],
            qubit_vertices: vec![[usize::MAX; 2]; 2 * l1 * l2],
        };
        for r in 0..l2 {
            for c in 0..l1 {
                geom.plaquettes.push(geom.plaquette_edges(r, c));
                geom.vertices.push(geom.vertex_edges(r, c));
            }
        }
        for (s, edges) in geom.plaquettes.iter().enumerate() {
            for &q in edges {
                let slot = &mut geom.qubit_plaquettes[q];
                if slot[0] == usize::MAX {
                    slot[0] = s;
                } else {
                    slot[1] = s;
                }
            }
        }
        for (s, edges) in geom.vertices.iter().enumerate() {
            for &q in edges {
                let slot = &mut geom.qubit_vertices[q];
                if slot[0] == usize::MAX {
                    slot[0] = s;
                } else {
                    slot[1] = s;
                }
            }
        }
        Ok(geom)
    }

    /// Cells in the horizontal direction.
    pub fn l1(&self) -> usize {
        self.l1
    }

    /// Cells in the vertical direction.
    pub fn l2(&self) -> usize {
        self.l2
    }

    pub fn n_qubits(&self) -> usize {
        2 * self.l1 * self.l2
    }

    /// Number of cells, which is also the number of plaquettes and of vertices.
    pub fn n_cells(&self) -> usize {
        self.l1 * self.l2
    }

    /// Flat id of an edge; `row` and `col` wrap around the torus.
    pub fn qubit(&self, sublattice: Sublattice, row: usize, col: usize) -> usize {
        let cell = (row % self.l2) * self.l1 + col % self.l1;
        match sublattice {
            Sublattice::Horizontal => cell,
            Sublattice::Vertical => self.n_cells() + cell,
        }
    }

    pub fn h(&self, row: usize, col: usize) -> usize {
        self.qubit(Sublattice::Horizontal, row, col)
    }

    pub fn v(&self, row: usize, col: usize) -> usize {
        self.qubit(Sublattice::Vertical, row, col)
    }

    /// Inverse of [`qubit`](Self::qubit).
    pub fn edge(&self, q: usize) -> Edge {
        assert!(q < self.n_qubits(), "qubit {q} out of range");
        let (sublattice, cell) = if q < self.n_cells() {
            (Sublattice::Horizontal, q)
        } else {
            (Sublattice::Vertical, q - self.n_cells())
        };
        Edge { sublattice, row: cell / self.l1, col: cell % self.l1 }
    }

    /// Flat cell index `row * l1 + col` after wrapping.
    pub fn cell_index(&self, row: usize, col: usize) -> usize {
        (row % self.l2) * self.l1 + col % self.l1
    }

    /// Qubits of a plaquette in `[N, W, S, E]` order.
    pub fn plaquette_qubits(&self, id: StabilizerId) -> [usize; 4] {
        debug_assert_eq!(id.kind, StabilizerKind::Plaquette);
        self.plaquettes[self.cell_index(id.row, id.col)]
    }

    /// Qubits of a vertex (star) in `[E, W, S, N]` order.
    pub fn vertex_qubits(&self, id: StabilizerId) -> [usize; 4] {
        debug_assert_eq!(id.kind, StabilizerKind::Vertex);
        self.vertices[self.cell_index(id.row, id.col)]
    }

    pub fn stabilizer_qubits(&self, id: StabilizerId) -> [usize; 4] {
        match id.kind {
            StabilizerKind::Plaquette => self.plaquette_qubits(id),
            StabilizerKind::Vertex => self.vertex_qubits(id),
        }
    }

    /// Plaquette supports indexed by flat cell index.
    pub fn plaquettes(&self) -> &[[usize; 4]] {
        &self.plaquettes
    }

    /// Vertex supports indexed by flat cell index.
    pub fn vertices(&self) -> &[[usize; 4]] {
        &self.vertices
    }

    /// The two plaquettes (flat cell indices) containing qubit `q`.
    pub fn plaquettes_of(&self, q: usize) -> [usize; 2] {
        self.qubit_plaquettes[q]
    }

    /// The two vertices (flat cell indices) containing qubit `q`.
    pub fn vertices_of(&self, q: usize) -> [usize; 2] {
        self.qubit_vertices[q]
    }

    pub fn logical_operators(&self) -> LogicalOperators {
        LogicalOperators {
            z_horizontal: (0..self.l1).map(|c| self.v(0, c)).collect(),
            z_vertical: (0..self.l2).map(|r| self.h(r, 0)).collect(),
            x_horizontal: (0..self.l1).map(|c| self.h(0, c)).collect(),
            x_vertical: (0..self.l2).map(|r| self.v(r, 0)).collect(),
        }
    }

    fn plaquette_edges(&self, r: usize, c: usize) -> [usize; 4] {
        [self.h(r, c), self.v(r, c), self.h(r + 1, c), self.v(r, c + 1)]
    }

    fn vertex_edges(&self, r: usize, c: usize) -> [usize; 4] {
        let west = (c + self.l1 - 1) % self.l1;
        let north = (r + self.l2 - 1) % self.l2;
        [self.h(r, c), self.h(r, west), self.v(r, c), self.v(north, c)]
    }
}

/// Number of qubits alive at `layer` of a depth-`depth` QCNN: `2 * 3^(2 (depth - layer))`.
pub fn layer_qubit_count(depth: usize, layer: usize) -> Result<u64> {
    if layer > depth {
        return Err(Error::LayerOutOfRange { depth, layer });
    }
    let exp = u32::try_from(2 * (depth - layer))
        .map_err(|_| Error::InvalidParameter(format!("depth {depth} too large")))?;
    3u64.checked_pow(exp)
        .and_then(|v| v.checked_mul(2))
        .ok_or_else(|| Error::InvalidParameter(format!("depth {depth} overflows the qubit count")))
}

/// Largest depth accepted by [`PoolingSchedule::new`]; `3^(2 * 13)` cells do not fit
/// in memory anyway.
pub const MAX_DEPTH: usize = 13;

/// One pooling target and its correction neighbourhood, in flat grid-cell indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PoolingTarget {
    pub target: usize,
    /// The cross-shaped neighbourhood `N(t)`.
    pub controls: [usize; 4],
    /// `N(c) \ {t}` for each control, in the same order as `controls`.
    pub partners: [[usize; 3]; 4],
}

/// Pooling neighbourhoods for one layer on an `side x side` periodic grid.
#[derive(Clone, Debug)]
pub struct PoolingLayer {
    pub side: usize,
    pub targets: Vec<PoolingTarget>,
}

/// Target, control and partner sets for every pooling layer.
///
/// Both sublattices reduce to square grids of stabilizer cells with the same
/// geometry, so one schedule serves the plaquette and the vertex grid. Targets sit
/// at cell `(1, 1)` of every 3x3 block; the targets of layer `l` become the grid of
/// layer `l + 1`.
#[derive(Clone, Debug)]
pub struct PoolingSchedule {
    depth: usize,
    layers: Vec<PoolingLayer>,
}

impl PoolingSchedule {
    /// Schedule for a `3^depth x 3^depth` lattice.
    pub fn new(depth: usize) -> Result<Self> {
        if depth == 0 || depth > MAX_DEPTH {
            return Err(Error::InvalidParameter(format!(
                "pooling depth must be in 1..={MAX_DEPTH}, got {depth}"
            )));
        }
        let layers = (0..depth)
            .map(|l| pooling_layer(3usize.pow((depth - l) as u32)))
            .collect();
        Ok(Self { depth, layers })
    }

    /// Schedule matching a geometry; the torus must be square with side `3^d`.
    pub fn for_geometry(geom: &LatticeGeometry) -> Result<Self> {
        let depth = side_depth(geom.l1()).filter(|_| geom.l1() == geom.l2());
        match depth {
            Some(d) if d >= 1 => Self::new(d),
            _ => Err(Error::InvalidLattice(format!(
                "pooling needs a square 3^d torus, got {} x {}",
                geom.l1(),
                geom.l2()
            ))),
        }
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn layer(&self, layer: usize) -> Option<&PoolingLayer> {
        self.layers.get(layer)
    }

    pub fn layers(&self) -> &[PoolingLayer] {
        &self.layers
    }

    /// Grid side at `layer`, for `layer` in `0..=depth`.
    pub fn side(&self, layer: usize) -> usize {
        3usize.pow((self.depth - layer) as u32)
    }
}

/// Returns `d` when `side == 3^d`.
pub fn side_depth(side: usize) -> Option<usize> {
    let mut s = side;
    let mut d = 0;
    while s > 1 && s.is_multiple_of(3) {
        s /= 3;
        d += 1;
    }
    (s == 1).then_some(d)
}

fn pooling_layer(side: usize) -> PoolingLayer {
    let at = |r: isize, c: isize| -> usize {
        let n = side as isize;
        (r.rem_euclid(n) * n + c.rem_euclid(n)) as usize
    };
    const STEPS: [(isize, isize); 4] = [(-1, 0), (0, -1), (1, 0), (0, 1)];
    let mut targets = Vec::with_capacity(side * side / 9);
    for br in 0..side / 3 {
        for bc in 0..side / 3 {
            let (tr, tc) = ((3 * br + 1) as isize, (3 * bc + 1) as isize);
            let mut controls = [0; 4];
            let mut partners = [[0; 3]; 4];
            for (k, &(dr, dc)) in STEPS.iter().enumerate() {
                let (cr, cc) = (tr + dr, tc + dc);
                controls[k] = at(cr, cc);
                let mut m = 0;
                for &(er, ec) in &STEPS {
                    // skip the step leading back onto the target
                    if (er, ec) == (-dr, -dc) {
                        continue;
                    }
                    partners[k][m] = at(cr + er, cc + ec);
                    m += 1;
                }
            }
            targets.push(PoolingTarget { target: at(tr, tc), controls, partners });
        }
    }
    PoolingLayer { side, targets }
}
