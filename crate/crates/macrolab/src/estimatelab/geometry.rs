// SPDX-License-Identifier: Apache-2.0

//! Finite-volume view of a tetrahedral mesh: each tetrahedron is a cell
//! with four planar faces, either shared with a neighbour or on the wall.

use crate::ellipticfem::Mesh;
use crate::error::{MacrolabError, Result};
use std::collections::HashMap;

/// What lies across a cell face.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FaceLink {
    /// Interior face shared with another cell.
    Cell(usize),
    /// Boundary face; `reflect` is the unit normal used for specular reflection.
    Wall { face: usize, reflect: [f64; 3] },
}

/// One face of a cell with its outward geometric unit normal.
#[derive(Clone, Copy, Debug)]
pub struct CellFace {
    pub area: f64,
    pub normal: [f64; 3],
    pub link: FaceLink,
}

/// Cells, faces and volumes of the transport mesh.
#[derive(Clone, Debug)]
pub struct FvGeometry {
    pub faces: Vec<[CellFace; 4]>,
    pub volumes: Vec<f64>,
    pub centroids: Vec<[f64; 3]>,
    /// Cells containing each vertex, for cell-to-vertex averaging.
    pub vertex_cells: Vec<Vec<usize>>,
    pub total_volume: f64,
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn key(mut v: [usize; 3]) -> [usize; 3] {
    v.sort_unstable();
    v
}

impl FvGeometry {
    pub fn new(mesh: &Mesh) -> Result<FvGeometry> {
        let mut walls: HashMap<[usize; 3], usize> = HashMap::new();
        for (k, f) in mesh.boundary_faces.iter().enumerate() {
            walls.insert(key(f.verts), k);
        }
        let mut shared: HashMap<[usize; 3], Vec<usize>> = HashMap::new();
        for (t, tet) in mesh.tets.iter().enumerate() {
            for skip in 0..4 {
                let f = face_verts(tet, skip);
                shared.entry(key(f)).or_default().push(t);
            }
        }
        let mut faces = Vec::with_capacity(mesh.tets.len());
        let mut volumes = Vec::with_capacity(mesh.tets.len());
        let mut centroids = Vec::with_capacity(mesh.tets.len());
        let mut vertex_cells = vec![Vec::new(); mesh.vertices.len()];
        for (t, tet) in mesh.tets.iter().enumerate() {
            let p = mesh.tet_points(t);
            volumes.push(mesh.volume(t));
            centroids.push(mesh.centroid(t));
            for &v in tet {
                vertex_cells[v].push(t);
            }
            let mut out = Vec::with_capacity(4);
            for skip in 0..4 {
                let fv = face_verts(tet, skip);
                let [a, b, c] = fv.map(|v| mesh.vertices[v]);
                let mut n = cross(sub(b, a), sub(c, a));
                let len = dot(n, n).sqrt();
                if dot(n, sub(a, p[skip])) < 0.0 {
                    n = n.map(|x| -x);
                }
                let normal = n.map(|x| x / len);
                let k = key(fv);
                let link = match shared[&k].iter().find(|&&o| o != t) {
                    Some(&o) => FaceLink::Cell(o),
                    None => {
                        let face = *walls
                            .get(&k)
                            .ok_or_else(|| MacrolabError::Mesh(format!("unmatched face {k:?} of cell {t}")))?;
                        FaceLink::Wall { face, reflect: mesh.boundary_faces[face].normal }
                    }
                };
                out.push(CellFace { area: 0.5 * len, normal, link });
            }
            faces.push([out[0], out[1], out[2], out[3]]);
        }
        let total_volume = volumes.iter().sum();
        Ok(FvGeometry { faces, volumes, centroids, vertex_cells, total_volume })
    }

    pub fn cells(&self) -> usize {
        self.volumes.len()
    }

    /// Largest stable explicit step for transport at speed `vmax` with factor `scale`.
    ///
    /// For a closed cell `Σ_f (v·n_f)A_f = 0`, so the outflow `Σ_f (v·n_f)⁺A_f`
    /// is at most `|v|·Σ_f A_f / 2`.
    pub fn cfl_bound(&self, vmax: f64, scale: f64) -> f64 {
        self.faces
            .iter()
            .zip(&self.volumes)
            .map(|(fs, vol)| 2.0 * vol / (scale * vmax * fs.iter().map(|f| f.area).sum::<f64>()))
            .fold(f64::INFINITY, f64::min)
    }

    /// Volume-weighted average of cell values at each vertex.
    pub fn to_vertices<const D: usize>(&self, cell_values: &[[f64; D]]) -> Vec<[f64; D]> {
        self.vertex_cells
            .iter()
            .map(|cs| {
                let mut acc = [0.0; D];
                let mut w = 0.0;
                for &c in cs {
                    for d in 0..D {
                        acc[d] += self.volumes[c] * cell_values[c][d];
                    }
                    w += self.volumes[c];
                }
                acc.map(|x| x / w)
            })
            .collect()
    }
}

fn face_verts(tet: &[usize; 4], skip: usize) -> [usize; 3] {
    let mut f = [0; 3];
    let mut k = 0;
    for (i, &v) in tet.iter().enumerate() {
        if i != skip {
            f[k] = v;
            k += 1;
        }
    }
    f
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ellipticfem::{gen_mesh, Shape};

    #[test]
    fn cells_are_closed_and_faces_consistent() {
        let mesh = gen_mesh(Shape::Spheroid { a: 1.0, c: 1.5 }, 1).unwrap();
        let g = FvGeometry::new(&mesh).unwrap();
        let mut walls = 0;
        for (c, fs) in g.faces.iter().enumerate() {
            let mut s = [0.0; 3];
            for f in fs {
                for d in 0..3 {
                    s[d] += f.area * f.normal[d];
                }
                match f.link {
                    FaceLink::Cell(o) => {
                        let back = g.faces[o].iter().find(|h| h.link == FaceLink::Cell(c)).unwrap();
                        assert!((back.area - f.area).abs() < 1e-14);
                        assert!((dot(back.normal, f.normal) + 1.0).abs() < 1e-12);
                    }
                    FaceLink::Wall { reflect, .. } => {
                        walls += 1;
                        assert!(dot(reflect, f.normal) > 0.9);
                    }
                }
            }
            assert!(dot(s, s).sqrt() < 1e-14);
        }
        assert_eq!(walls, mesh.boundary_faces.len());
        assert!((g.total_volume - mesh.total_volume()).abs() < 1e-12);
    }
}
