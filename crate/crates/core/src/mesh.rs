//! Structured triangulation of the rectangle `[0, Lx] × [0, Ly]`.
//!
//! The top edge is clamped (Dirichlet), the lateral edges carry tractions
//! (Neumann) and the bottom edge is the contact surface. Bulk nodes are
//! numbered row by row from the bottom, so the contact nodes are
//! `0..=nx` and surface node `k` is bulk node `k`.

use std::io::Write;

use crate::error::{Error, Result};
use crate::regularizers::{Vec2, NORMAL};

/// One-dimensional mesh of the contact edge.
#[derive(Clone, Debug, PartialEq)]
pub struct SurfaceMesh {
    /// Bulk node id of each surface node.
    pub nodes: Vec<usize>,
    /// Abscissa of each surface node.
    pub coords: Vec<f64>,
    /// Segments as pairs of surface-local indices.
    pub elements: Vec<[usize; 2]>,
    pub normal: Vec2,
    /// Surface-local indices of the two endpoints, where the surface
    /// Laplacian has its natural (zero-flux) condition.
    pub endpoints: [usize; 2],
}

impl SurfaceMesh {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn element_length(&self, e: usize) -> f64 {
        let [a, b] = self.elements[e];
        (self.coords[b] - self.coords[a]).abs()
    }

    pub fn total_length(&self) -> f64 {
        (0..self.elements.len()).map(|e| self.element_length(e)).sum()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Mesh {
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
    pub ly: f64,
    pub nodes: Vec<[f64; 2]>,
    pub triangles: Vec<[usize; 3]>,
    pub gamma_d: Vec<usize>,
    pub gamma_n: Vec<usize>,
    pub gamma_c: Vec<usize>,
    /// Boundary segments on the lateral edges.
    pub neumann_edges: Vec<[usize; 2]>,
    pub surface: SurfaceMesh,
}

impl Mesh {
    pub fn node_id(&self, i: usize, j: usize) -> usize {
        j * (self.nx + 1) + i
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn hx(&self) -> f64 {
        self.lx / self.nx as f64
    }

    pub fn hy(&self) -> f64 {
        self.ly / self.ny as f64
    }

    /// Signed area of a triangle (positive: counter-clockwise).
    pub fn area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t];
        let (pa, pb, pc) = (self.nodes[a], self.nodes[b], self.nodes[c]);
        0.5 * ((pb[0] - pa[0]) * (pc[1] - pa[1]) - (pc[0] - pa[0]) * (pb[1] - pa[1]))
    }

    /// Dirichlet mask per node.
    pub fn dirichlet_mask(&self) -> Vec<bool> {
        let mut m = vec![false; self.num_nodes()];
        for &n in &self.gamma_d {
            m[n] = true;
        }
        m
    }

    /// Plain-text listing: a `nodes` block (`id x y`) then an `elements`
    /// block (`id n1 n2 n3`).
    pub fn export<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "# nodes {}", self.nodes.len())?;
        for (i, p) in self.nodes.iter().enumerate() {
            writeln!(w, "{i} {:.16e} {:.16e}", p[0], p[1])?;
        }
        writeln!(w, "# elements {}", self.triangles.len())?;
        for (i, t) in self.triangles.iter().enumerate() {
            writeln!(w, "{i} {} {} {}", t[0], t[1], t[2])?;
        }
        Ok(())
    }
}

/// Rectangle split into `nx × ny` cells, each cut into two right triangles
/// along alternating diagonals.
pub fn build_mesh(nx: usize, ny: usize, lx: f64, ly: f64) -> Result<Mesh> {
    if nx < 2 || ny < 2 {
        return Err(Error::Parameter(format!("mesh needs nx, ny ≥ 2, got {nx} × {ny}")));
    }
    if !(lx > 0.0 && ly > 0.0 && lx.is_finite() && ly.is_finite()) {
        return Err(Error::Parameter(format!("degenerate domain extents {lx} × {ly}")));
    }
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut nodes = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            nodes.push([lx * i as f64 / nx as f64, ly * j as f64 / ny as f64]);
        }
    }
    let mut triangles = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            if (i + j) % 2 == 0 {
                triangles.push([a, b, c]);
                triangles.push([a, c, d]);
            } else {
                triangles.push([a, b, d]);
                triangles.push([b, c, d]);
            }
        }
    }
    let gamma_c: Vec<usize> = (0..=nx).map(|i| id(i, 0)).collect();
    let gamma_d: Vec<usize> = (0..=nx).map(|i| id(i, ny)).collect();
    let mut gamma_n = Vec::new();
    for j in 1..ny {
        gamma_n.push(id(0, j));
        gamma_n.push(id(nx, j));
    }
    let mut neumann_edges = Vec::new();
    for j in 0..ny {
        neumann_edges.push([id(0, j), id(0, j + 1)]);
        neumann_edges.push([id(nx, j), id(nx, j + 1)]);
    }
    let surface = SurfaceMesh {
        nodes: gamma_c.clone(),
        coords: gamma_c.iter().map(|&n| nodes[n][0]).collect(),
        elements: (0..nx).map(|k| [k, k + 1]).collect(),
        normal: NORMAL,
        endpoints: [0, nx],
    };
    Ok(Mesh { nx, ny, lx, ly, nodes, triangles, gamma_d, gamma_n, gamma_c, neumann_edges, surface })
}
