//! P1 finite-element assembly of every bilinear form in the weak system.
//!
//! Displacement dofs are interleaved: node `i` owns dofs `2i` (x) and
//! `2i + 1` (y). Clamped dofs are eliminated by zeroing their rows and
//! columns and placing 1 on the diagonal, which keeps the operators
//! symmetric.

use sprs::TriMat;

use crate::error::{Error, Result};
use crate::linalg::{bilinear, lin_comb, SpMat, SpdSolver};
use crate::mesh::Mesh;
use crate::physics::{Lame, MaterialModel};

pub struct AssembledForms {
    pub mass_bulk: SpMat,
    /// Row sums of `mass_bulk`.
    pub lumped_bulk: Vec<f64>,
    /// `∫∇φ_i·∇φ_j`.
    pub stiffness_bulk: SpMat,
    pub elasticity_a: SpMat,
    pub viscosity_b: SpMat,
    /// `D[i, 2j+c] = ∫φ_i ∂_c φ_j`, so that `θᵀ D v = ∫θ div v`.
    pub div_coupling: SpMat,
    /// Restriction of bulk nodal values to the contact nodes.
    pub trace_contact: SpMat,
    pub mass_surface: SpMat,
    pub lumped_surface: Vec<f64>,
    /// Neumann Laplacian on the contact edge.
    pub surface_stiffness: SpMat,
    pub dirichlet_dofs: Vec<bool>,
    dual_solver: SpdSolver,
}

impl std::fmt::Debug for AssembledForms {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "AssembledForms({} nodes)", self.lumped_bulk.len())
    }
}

/// Gradients of the three barycentric functions and the element area.
fn p1_gradients(mesh: &Mesh, t: usize) -> ([[f64; 2]; 3], f64) {
    let tri = mesh.triangles[t];
    let p = [mesh.nodes[tri[0]], mesh.nodes[tri[1]], mesh.nodes[tri[2]]];
    let det = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]);
    let mut g = [[0.0; 2]; 3];
    for i in 0..3 {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        g[i] = [(p[j][1] - p[k][1]) / det, (p[k][0] - p[j][0]) / det];
    }
    (g, 0.5 * det)
}

/// Scalar stiffness with one coefficient per triangle.
pub fn stiffness_weighted(mesh: &Mesh, coeff: &[f64]) -> SpMat {
    let n = mesh.num_nodes();
    let mut t = TriMat::new((n, n));
    for (e, tri) in mesh.triangles.iter().enumerate() {
        let (g, area) = p1_gradients(mesh, e);
        for a in 0..3 {
            for b in 0..3 {
                let v = coeff[e] * area * (g[a][0] * g[b][0] + g[a][1] * g[b][1]);
                t.add_triplet(tri[a], tri[b], v);
            }
        }
    }
    t.to_csr()
}

fn mass_consistent(mesh: &Mesh) -> SpMat {
    let n = mesh.num_nodes();
    let mut t = TriMat::new((n, n));
    for (e, tri) in mesh.triangles.iter().enumerate() {
        let area = mesh.area(e);
        for a in 0..3 {
            for b in 0..3 {
                let v = if a == b { area / 6.0 } else { area / 12.0 };
                t.add_triplet(tri[a], tri[b], v);
            }
        }
    }
    t.to_csr()
}

/// Unconstrained vector form `∫ C ε(u) : ε(v)`.
fn elastic_form(mesh: &Mesh, lame: Lame) -> SpMat {
    let n = mesh.num_nodes();
    let d = lame.voigt();
    let mut t = TriMat::new((2 * n, 2 * n));
    for (e, tri) in mesh.triangles.iter().enumerate() {
        let (g, area) = p1_gradients(mesh, e);
        // Rows: e_xx, e_yy, 2e_xy; columns: local dofs (x0, y0, x1, y1, x2, y2).
        let mut bm = [[0.0; 6]; 3];
        for a in 0..3 {
            bm[0][2 * a] = g[a][0];
            bm[1][2 * a + 1] = g[a][1];
            bm[2][2 * a] = g[a][1];
            bm[2][2 * a + 1] = g[a][0];
        }
        for r in 0..6 {
            for c in 0..6 {
                let mut v = 0.0;
                for p in 0..3 {
                    for q in 0..3 {
                        v += bm[p][r] * d[p][q] * bm[q][c];
                    }
                }
                t.add_triplet(2 * tri[r / 2] + r % 2, 2 * tri[c / 2] + c % 2, area * v);
            }
        }
    }
    // Duplicate triplets are summed in an order that differs between (i, j)
    // and (j, i); averaging with the transpose restores exact symmetry,
    // which the fill-reducing ordering requires.
    let a = t.to_csr();
    lin_comb(0.5, &a, 0.5, &a.transpose_view().to_csr())
}

/// Zeroes rows and columns of constrained dofs and puts 1 on their diagonal.
pub fn constrain(a: &SpMat, fixed: &[bool]) -> SpMat {
    let mut t = TriMat::new(a.shape());
    for (i, row) in a.outer_iterator().enumerate() {
        for (j, &v) in row.iter() {
            if !fixed[i] && !fixed[j] {
                t.add_triplet(i, j, v);
            }
        }
    }
    for (i, &f) in fixed.iter().enumerate() {
        if f {
            t.add_triplet(i, i, 1.0);
        }
    }
    t.to_csr()
}

fn div_form(mesh: &Mesh, fixed: &[bool]) -> SpMat {
    let n = mesh.num_nodes();
    let mut t = TriMat::new((n, 2 * n));
    for (e, tri) in mesh.triangles.iter().enumerate() {
        let (g, area) = p1_gradients(mesh, e);
        for a in 0..3 {
            for b in 0..3 {
                for c in 0..2 {
                    let dof = 2 * tri[b] + c;
                    if !fixed[dof] {
                        t.add_triplet(tri[a], dof, area / 3.0 * g[b][c]);
                    }
                }
            }
        }
    }
    t.to_csr()
}

fn surface_forms(mesh: &Mesh) -> (SpMat, SpMat) {
    let s = &mesh.surface;
    let ns = s.len();
    let mut m = TriMat::new((ns, ns));
    let mut k = TriMat::new((ns, ns));
    for (e, &[a, b]) in s.elements.iter().enumerate() {
        let h = s.element_length(e);
        m.add_triplet(a, a, h / 3.0);
        m.add_triplet(b, b, h / 3.0);
        m.add_triplet(a, b, h / 6.0);
        m.add_triplet(b, a, h / 6.0);
        k.add_triplet(a, a, 1.0 / h);
        k.add_triplet(b, b, 1.0 / h);
        k.add_triplet(a, b, -1.0 / h);
        k.add_triplet(b, a, -1.0 / h);
    }
    (m.to_csr(), k.to_csr())
}

fn row_sums(a: &SpMat) -> Vec<f64> {
    a.outer_iterator().map(|r| r.data().iter().sum()).collect()
}

pub fn assemble(mesh: &Mesh, material: &MaterialModel) -> Result<AssembledForms> {
    if !material.elastic.is_positive_definite() || !material.viscous.is_positive_definite() {
        return Err(Error::Validation {
            hypothesis: crate::physics::H_TENSORS.into(),
            detail: "elastic or viscous tensor is not positive definite".into(),
        });
    }
    let n = mesh.num_nodes();
    let mut dirichlet_dofs = vec![false; 2 * n];
    for &node in &mesh.gamma_d {
        dirichlet_dofs[2 * node] = true;
        dirichlet_dofs[2 * node + 1] = true;
    }
    let mass_bulk = mass_consistent(mesh);
    let lumped_bulk = row_sums(&mass_bulk);
    let stiffness_bulk = stiffness_weighted(mesh, &vec![1.0; mesh.triangles.len()]);
    let elasticity_a = constrain(&elastic_form(mesh, material.elastic), &dirichlet_dofs);
    let viscosity_b = constrain(&elastic_form(mesh, material.viscous), &dirichlet_dofs);
    let div_coupling = div_form(mesh, &dirichlet_dofs);

    let ns = mesh.surface.len();
    let mut tr = TriMat::new((ns, n));
    for (k, &node) in mesh.surface.nodes.iter().enumerate() {
        tr.add_triplet(k, node, 1.0);
    }
    let trace_contact = tr.to_csr();
    let (mass_surface, surface_stiffness) = surface_forms(mesh);
    let lumped_surface = row_sums(&mass_surface);

    let dual_solver = SpdSolver::new(&lin_comb(1.0, &mass_bulk, 1.0, &stiffness_bulk))?;
    Ok(AssembledForms {
        mass_bulk,
        lumped_bulk,
        stiffness_bulk,
        elasticity_a,
        viscosity_b,
        div_coupling,
        trace_contact,
        mass_surface,
        lumped_surface,
        surface_stiffness,
        dirichlet_dofs,
        dual_solver,
    })
}

/// `sqrt(rᵀ (M + K)⁻¹ r)`, a discrete H¹(Ω)′ norm of a bulk dual vector.
pub fn dual_norm_surrogate(forms: &AssembledForms, r: &[f64]) -> f64 {
    let y = forms.dual_solver.solve(r);
    crate::linalg::dot(r, &y).max(0.0).sqrt()
}

/// Elastic energy helper `½ uᵀ A u` on interleaved dofs.
pub fn half_energy(a: &SpMat, u: &[f64]) -> f64 {
    0.5 * bilinear(a, u, u)
}
