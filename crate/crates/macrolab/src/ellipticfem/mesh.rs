// SPDX-License-Identifier: Apache-2.0

//! Structured tetrahedral meshes of balls, spheroids and triaxial ellipsoids,
//! plus the `msh3` ASCII exchange format.
//!
//! The reference cube `[−1, 1]³` is split into `n³` sub-cubes, each cut into
//! six Kuhn tetrahedra sharing the diagonal from its corner nearest the
//! origin to the farthest one (the split is mirrored per octant), and mapped
//! onto the unit ball by `q ↦ q·‖q‖∞/‖q‖₂`. Scaling by the semi-axes gives the ellipsoid.
//! Cube-boundary vertices land exactly on the surface.

use crate::error::{MacrolabError, Result};
use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

/// Domain shapes supported by the generator.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Shape {
    /// Unit ball.
    Ball,
    /// Spheroid with equatorial semi-axis `a` and polar semi-axis `c` (symmetry axis `x₃`).
    Spheroid { a: f64, c: f64 },
    /// Ellipsoid with semi-axes `a, b, c` along `x₁, x₂, x₃`.
    Ellipsoid { a: f64, b: f64, c: f64 },
}

impl Shape {
    /// Semi-axes `(a, b, c)`.
    pub fn axes(&self) -> [f64; 3] {
        match *self {
            Shape::Ball => [1.0, 1.0, 1.0],
            Shape::Spheroid { a, c } => [a, a, c],
            Shape::Ellipsoid { a, b, c } => [a, b, c],
        }
    }

    /// Parses `ball`, `spheroid` (1, 1.5), `ellipsoid` (1, 1.3, 1.7), or
    /// explicit forms `spheroid:a,c` and `ellipsoid:a,b,c`.
    pub fn parse(s: &str) -> Result<Shape> {
        let (name, args) = s.split_once(':').unwrap_or((s, ""));
        let nums: Vec<f64> = if args.is_empty() {
            Vec::new()
        } else {
            args.split(',')
                .map(|t| t.trim().parse::<f64>().map_err(|_| MacrolabError::Config(format!("bad shape argument `{t}`"))))
                .collect::<Result<_>>()?
        };
        let shape = match (name, nums.as_slice()) {
            ("ball", []) => Shape::Ball,
            ("spheroid", []) => Shape::Spheroid { a: 1.0, c: 1.5 },
            ("spheroid", [a, c]) => Shape::Spheroid { a: *a, c: *c },
            ("ellipsoid", []) => Shape::Ellipsoid { a: 1.0, b: 1.3, c: 1.7 },
            ("ellipsoid", [a, b, c]) => Shape::Ellipsoid { a: *a, b: *b, c: *c },
            _ => return Err(MacrolabError::Config(format!("unknown shape `{s}`"))),
        };
        shape.validate()?;
        Ok(shape)
    }

    fn validate(&self) -> Result<()> {
        if self.axes().iter().any(|&x| !(x.is_finite() && x > 0.0)) {
            return Err(MacrolabError::Mesh(format!("degenerate semi-axes {:?}", self.axes())));
        }
        Ok(())
    }

    /// Outward unit normal of the surface at a surface point `x`.
    pub fn surface_normal(&self, x: [f64; 3]) -> [f64; 3] {
        let ax = self.axes();
        normalize([x[0] / (ax[0] * ax[0]), x[1] / (ax[1] * ax[1]), x[2] / (ax[2] * ax[2])])
    }

    /// Radial projection of `x` onto the surface (in ball coordinates).
    pub fn project_to_surface(&self, x: [f64; 3]) -> [f64; 3] {
        let ax = self.axes();
        let y = normalize([x[0] / ax[0], x[1] / ax[1], x[2] / ax[2]]);
        [y[0] * ax[0], y[1] * ax[1], y[2] * ax[2]]
    }
}

/// A triangle of the boundary with its outward unit normal and parent tetrahedron.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryFace {
    /// Vertex indices, ordered counter-clockwise seen from outside.
    pub verts: [usize; 3],
    /// Outward unit normal of the exact surface at the projected face centroid.
    pub normal: [f64; 3],
    /// Index of the tetrahedron owning the face.
    pub tet: usize,
}

/// Tetrahedral mesh with boundary data.
#[derive(Clone, Debug)]
pub struct Mesh {
    pub vertices: Vec<[f64; 3]>,
    pub tets: Vec<[usize; 4]>,
    pub boundary_faces: Vec<BoundaryFace>,
    /// Unit outward normal at each boundary vertex, `None` in the interior.
    pub vertex_normals: Vec<Option<[f64; 3]>>,
    /// Reference-cube coordinates of each vertex for generated meshes.
    pub reference: Option<ReferenceGrid>,
    /// Generating shape, if known.
    pub shape: Option<Shape>,
}

/// Structured reference data used to transfer fields between levels.
#[derive(Clone, Debug)]
pub struct ReferenceGrid {
    /// Sub-cubes per side.
    pub n: usize,
    /// Position of each vertex in `[−1, 1]³`.
    pub coords: Vec<[f64; 3]>,
}

pub(crate) fn normalize(v: [f64; 3]) -> [f64; 3] {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}

pub(crate) fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub(crate) fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

pub(crate) fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Signed volume of a tetrahedron.
pub fn tet_volume(p: &[[f64; 3]; 4]) -> f64 {
    dot(sub(p[1], p[0]), cross(sub(p[2], p[0]), sub(p[3], p[0]))) / 6.0
}

fn ball_map(q: [f64; 3]) -> [f64; 3] {
    let inf = q.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let two = (q[0] * q[0] + q[1] * q[1] + q[2] * q[2]).sqrt();
    if two == 0.0 {
        return [0.0; 3];
    }
    let s = inf / two;
    [q[0] * s, q[1] * s, q[2] * s]
}

/// Sub-cubes per side for a refinement level.
pub fn cubes_per_side(level: usize) -> usize {
    3 << level
}

const KUHN: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

/// Generates the structured mesh of `shape` at refinement `level`
/// (`3·2^level` sub-cubes per side).
pub fn gen_mesh(shape: Shape, level: usize) -> Result<Mesh> {
    shape.validate()?;
    if level > 6 {
        return Err(MacrolabError::Mesh(format!("refinement level {level} is beyond desk scale")));
    }
    let n = cubes_per_side(level);
    let ax = shape.axes();
    let np = n + 1;
    let idx = |i: usize, j: usize, k: usize| (i * np + j) * np + k;
    let mut vertices = Vec::with_capacity(np * np * np);
    let mut coords = Vec::with_capacity(np * np * np);
    let mut vertex_normals = Vec::with_capacity(np * np * np);
    for i in 0..np {
        for j in 0..np {
            for k in 0..np {
                let q = [
                    -1.0 + 2.0 * i as f64 / n as f64,
                    -1.0 + 2.0 * j as f64 / n as f64,
                    -1.0 + 2.0 * k as f64 / n as f64,
                ];
                let on_bdry = [i, j, k].iter().any(|&t| t == 0 || t == n);
                let mut y = ball_map(q);
                if on_bdry {
                    y = normalize(y);
                }
                let x = [y[0] * ax[0], y[1] * ax[1], y[2] * ax[2]];
                vertices.push(x);
                coords.push(q);
                vertex_normals.push(on_bdry.then(|| shape.surface_normal(x)));
            }
        }
    }
    let mut tets = Vec::with_capacity(6 * n * n * n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                // Each path runs from the corner nearest the centre to the
                // farthest one, so every tetrahedron keeps an interior vertex.
                let start = [i, j, k].map(|t| if 2 * t + 1 < n { t + 1 } else { t });
                for perm in KUHN.iter() {
                    let mut c = start;
                    let mut t = [idx(c[0], c[1], c[2]), 0, 0, 0];
                    for (s, &axis) in perm.iter().enumerate() {
                        if c[axis] > [i, j, k][axis] {
                            c[axis] -= 1;
                        } else {
                            c[axis] += 1;
                        }
                        t[s + 1] = idx(c[0], c[1], c[2]);
                    }
                    let p = [vertices[t[0]], vertices[t[1]], vertices[t[2]], vertices[t[3]]];
                    if tet_volume(&p) < 0.0 {
                        t.swap(2, 3);
                    }
                    tets.push(t);
                }
            }
        }
    }
    let mut mesh = Mesh {
        vertices,
        tets,
        boundary_faces: Vec::new(),
        vertex_normals,
        reference: Some(ReferenceGrid { n, coords }),
        shape: Some(shape),
    };
    mesh.boundary_faces = mesh.extract_boundary(|c| shape.surface_normal(shape.project_to_surface(c)));
    mesh.check()?;
    Ok(mesh)
}

impl Mesh {
    /// Finds faces that belong to exactly one tetrahedron, orients them
    /// outward and attaches a normal computed by `normal_at(centroid)`.
    fn extract_boundary(&self, normal_at: impl Fn([f64; 3]) -> [f64; 3]) -> Vec<BoundaryFace> {
        let mut count: HashMap<[usize; 3], (usize, usize, [usize; 3])> = HashMap::new();
        for (t, tet) in self.tets.iter().enumerate() {
            for skip in 0..4 {
                let f: Vec<usize> = (0..4).filter(|&s| s != skip).map(|s| tet[s]).collect();
                let mut key = [f[0], f[1], f[2]];
                key.sort_unstable();
                let e = count.entry(key).or_insert((0, t, [f[0], f[1], f[2]]));
                e.0 += 1;
                if e.0 == 1 {
                    e.1 = t;
                    e.2 = [f[0], f[1], f[2]];
                }
            }
        }
        let mut faces: Vec<BoundaryFace> = count
            .into_iter()
            .filter(|(_, (c, _, _))| *c == 1)
            .map(|(_, (_, t, mut f))| {
                let tet = self.tets[t];
                let opposite = *tet.iter().find(|v| !f.contains(v)).expect("fourth vertex");
                let p = [self.vertices[f[0]], self.vertices[f[1]], self.vertices[f[2]]];
                let nrm = cross(sub(p[1], p[0]), sub(p[2], p[0]));
                if dot(nrm, sub(self.vertices[opposite], p[0])) > 0.0 {
                    f.swap(1, 2);
                }
                let c = centroid3(&[self.vertices[f[0]], self.vertices[f[1]], self.vertices[f[2]]]);
                BoundaryFace { verts: f, normal: normal_at(c), tet: t }
            })
            .collect();
        faces.sort_by_key(|f| (f.tet, f.verts));
        faces
    }

    /// Checks the structural invariants: positive volumes, unit normals,
    /// every boundary edge shared by exactly two boundary faces.
    pub fn check(&self) -> Result<()> {
        for (t, tet) in self.tets.iter().enumerate() {
            if tet.iter().any(|&v| v >= self.vertices.len()) {
                return Err(MacrolabError::Mesh(format!("tet {t} references a missing vertex")));
            }
            let vol = tet_volume(&self.tet_points(t));
            if !(vol > 0.0) {
                return Err(MacrolabError::Mesh(format!("tet {t} has non-positive volume {vol:e}")));
            }
        }
        let mut edges: HashMap<(usize, usize), i32> = HashMap::new();
        for (k, f) in self.boundary_faces.iter().enumerate() {
            let len = dot(f.normal, f.normal).sqrt();
            if (len - 1.0).abs() > 1e-12 {
                return Err(MacrolabError::Mesh(format!("boundary face {k} normal has length {len}")));
            }
            for e in 0..3 {
                let a = f.verts[e];
                let b = f.verts[(e + 1) % 3];
                *edges.entry((a.min(b), a.max(b))).or_insert(0) += 1;
            }
        }
        if let Some((e, c)) = edges.iter().find(|(_, &c)| c != 2) {
            return Err(MacrolabError::Mesh(format!("boundary edge {e:?} used {c} times; surface not watertight")));
        }
        Ok(())
    }

    /// Vertex coordinates of tetrahedron `t`.
    pub fn tet_points(&self, t: usize) -> [[f64; 3]; 4] {
        let tet = self.tets[t];
        [self.vertices[tet[0]], self.vertices[tet[1]], self.vertices[tet[2]], self.vertices[tet[3]]]
    }

    /// Volume of tetrahedron `t`.
    pub fn volume(&self, t: usize) -> f64 {
        tet_volume(&self.tet_points(t))
    }

    /// Centroid of tetrahedron `t`.
    pub fn centroid(&self, t: usize) -> [f64; 3] {
        let p = self.tet_points(t);
        let mut c = [0.0; 3];
        for q in p.iter() {
            for d in 0..3 {
                c[d] += 0.25 * q[d];
            }
        }
        c
    }

    /// Total volume.
    pub fn total_volume(&self) -> f64 {
        (0..self.tets.len()).map(|t| self.volume(t)).sum()
    }

    /// Area of boundary face `k`.
    pub fn face_area(&self, k: usize) -> f64 {
        let f = &self.boundary_faces[k];
        let p = [self.vertices[f.verts[0]], self.vertices[f.verts[1]], self.vertices[f.verts[2]]];
        let c = cross(sub(p[1], p[0]), sub(p[2], p[0]));
        0.5 * dot(c, c).sqrt()
    }

    /// Outward unit normal of the flat boundary triangle `k`.
    pub fn face_geometric_normal(&self, k: usize) -> [f64; 3] {
        let f = &self.boundary_faces[k];
        let p = [self.vertices[f.verts[0]], self.vertices[f.verts[1]], self.vertices[f.verts[2]]];
        normalize(cross(sub(p[1], p[0]), sub(p[2], p[0])))
    }

    /// Total boundary area.
    pub fn boundary_area(&self) -> f64 {
        (0..self.boundary_faces.len()).map(|k| self.face_area(k)).sum()
    }

    /// Indices of boundary vertices.
    pub fn boundary_vertices(&self) -> Vec<usize> {
        (0..self.vertices.len()).filter(|&v| self.vertex_normals[v].is_some()).collect()
    }

    /// Applies the rotation `r` (row-major 3×3) to every coordinate and normal.
    pub fn rotated(&self, r: [[f64; 3]; 3]) -> Mesh {
        let rot = |x: [f64; 3]| {
            [
                r[0][0] * x[0] + r[0][1] * x[1] + r[0][2] * x[2],
                r[1][0] * x[0] + r[1][1] * x[1] + r[1][2] * x[2],
                r[2][0] * x[0] + r[2][1] * x[1] + r[2][2] * x[2],
            ]
        };
        Mesh {
            vertices: self.vertices.iter().map(|&x| rot(x)).collect(),
            tets: self.tets.clone(),
            boundary_faces: self
                .boundary_faces
                .iter()
                .map(|f| BoundaryFace { verts: f.verts, normal: rot(f.normal), tet: f.tet })
                .collect(),
            vertex_normals: self.vertex_normals.iter().map(|n| n.map(rot)).collect(),
            reference: self.reference.clone(),
            shape: None,
        }
    }

    /// Serializes to the `msh3` format (zero-based indices).
    pub fn to_msh3(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "msh3 {} {} {}", self.vertices.len(), self.tets.len(), self.boundary_faces.len());
        for x in &self.vertices {
            let _ = writeln!(s, "v {:.17e} {:.17e} {:.17e}", x[0], x[1], x[2]);
        }
        for t in &self.tets {
            let _ = writeln!(s, "t {} {} {} {}", t[0], t[1], t[2], t[3]);
        }
        for f in &self.boundary_faces {
            let _ = writeln!(
                s,
                "b {} {} {} {:.17e} {:.17e} {:.17e}",
                f.verts[0], f.verts[1], f.verts[2], f.normal[0], f.normal[1], f.normal[2]
            );
        }
        s
    }

    /// Parses the `msh3` format. Vertex normals are the normalized average
    /// of the adjacent boundary-face normals.
    pub fn from_msh3(text: &str) -> Result<Mesh> {
        let bad = |line: usize, msg: &str| MacrolabError::Mesh(format!("msh3 line {}: {msg}", line + 1));
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (hl, header) = lines.next().ok_or_else(|| bad(0, "empty file"))?;
        let h: Vec<&str> = header.split_whitespace().collect();
        if h.len() != 4 || h[0] != "msh3" {
            return Err(bad(hl, "expected `msh3 <nv> <nt> <nb>`"));
        }
        let counts: Vec<usize> = h[1..]
            .iter()
            .map(|t| t.parse::<usize>().map_err(|_| bad(hl, "bad count")))
            .collect::<Result<_>>()?;
        let (nv, nt, nb) = (counts[0], counts[1], counts[2]);
        let mut vertices = Vec::with_capacity(nv);
        let mut tets = Vec::with_capacity(nt);
        let mut faces = Vec::with_capacity(nb);
        for (ln, line) in lines {
            let tok: Vec<&str> = line.split_whitespace().collect();
            let f = |i: usize| tok.get(i).and_then(|t| t.parse::<f64>().ok()).ok_or_else(|| bad(ln, "bad number"));
            let u = |i: usize| tok.get(i).and_then(|t| t.parse::<usize>().ok()).ok_or_else(|| bad(ln, "bad index"));
            match tok.first().copied() {
                Some("v") if tok.len() == 4 => vertices.push([f(1)?, f(2)?, f(3)?]),
                Some("t") if tok.len() == 5 => tets.push([u(1)?, u(2)?, u(3)?, u(4)?]),
                Some("b") if tok.len() == 7 => faces.push(([u(1)?, u(2)?, u(3)?], [f(4)?, f(5)?, f(6)?])),
                _ => return Err(bad(ln, "unrecognized record")),
            }
        }
        if vertices.len() != nv || tets.len() != nt || faces.len() != nb {
            return Err(MacrolabError::Mesh("record counts do not match the header".into()));
        }
        let mut mesh = Mesh {
            vertices,
            tets,
            boundary_faces: Vec::new(),
            vertex_normals: Vec::new(),
            reference: None,
            shape: None,
        };
        let normal_of: HashMap<[usize; 3], [f64; 3]> = faces
            .iter()
            .map(|(v, n)| {
                let mut k = *v;
                k.sort_unstable();
                (k, *n)
            })
            .collect();
        let mut extracted = mesh.extract_boundary(|_| [0.0, 0.0, 1.0]);
        for face in extracted.iter_mut() {
            let mut k = face.verts;
            k.sort_unstable();
            face.normal = *normal_of
                .get(&k)
                .ok_or_else(|| MacrolabError::Mesh(format!("boundary face {:?} missing from file", face.verts)))?;
        }
        if extracted.len() != nb {
            return Err(MacrolabError::Mesh("boundary records do not match the mesh boundary".into()));
        }
        mesh.boundary_faces = extracted;
        let mut acc = vec![[0.0f64; 3]; mesh.vertices.len()];
        let mut hit = vec![false; mesh.vertices.len()];
        for (k, f) in mesh.boundary_faces.iter().enumerate() {
            let a = mesh.face_area(k);
            for &v in &f.verts {
                hit[v] = true;
                for d in 0..3 {
                    acc[v][d] += a * f.normal[d];
                }
            }
        }
        mesh.vertex_normals = acc.into_iter().zip(hit).map(|(n, h)| h.then(|| normalize(n))).collect();
        mesh.check()?;
        Ok(mesh)
    }

    /// Reads a `msh3` file.
    pub fn read(path: &Path) -> Result<Mesh> {
        Mesh::from_msh3(&std::fs::read_to_string(path)?)
    }
}

fn centroid3(p: &[[f64; 3]; 3]) -> [f64; 3] {
    [(p[0][0] + p[1][0] + p[2][0]) / 3.0, (p[0][1] + p[1][1] + p[2][1]) / 3.0, (p[0][2] + p[1][2] + p[2][2]) / 3.0]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coarse_ball_area_near_sphere() {
        let m = gen_mesh(Shape::Ball, 0).unwrap();
        let area = m.boundary_area();
        let sphere = 4.0 * std::f64::consts::PI;
        assert!((area - sphere).abs() / sphere < 0.15, "area {area}");
    }

    #[test]
    fn volume_converges_to_ellipsoid_volume() {
        let shape = Shape::Ellipsoid { a: 1.0, b: 1.3, c: 1.7 };
        let exact = 4.0 / 3.0 * std::f64::consts::PI * 1.0 * 1.3 * 1.7;
        let e1 = (gen_mesh(shape, 1).unwrap().total_volume() - exact).abs();
        let e2 = (gen_mesh(shape, 2).unwrap().total_volume() - exact).abs();
        assert!(e2 < e1 / 3.0, "{e1} {e2}");
    }

    #[test]
    fn boundary_vertices_on_surface_with_unit_normals() {
        let shape = Shape::Spheroid { a: 1.0, c: 1.5 };
        let m = gen_mesh(shape, 1).unwrap();
        for v in m.boundary_vertices() {
            let x = m.vertices[v];
            let r = (x[0] * x[0] + x[1] * x[1]) / 1.0 + x[2] * x[2] / 2.25;
            assert!((r - 1.0).abs() < 1e-13);
            let n = m.vertex_normals[v].unwrap();
            assert!((dot(n, n) - 1.0).abs() < 1e-14);
        }
        for (k, f) in m.boundary_faces.iter().enumerate() {
            assert!(dot(f.normal, m.face_geometric_normal(k)) > 0.9);
        }
    }

    #[test]
    fn degenerate_axes_rejected() {
        assert!(gen_mesh(Shape::Spheroid { a: 0.0, c: 1.0 }, 0).is_err());
        assert!(gen_mesh(Shape::Ellipsoid { a: 1.0, b: -1.0, c: 1.0 }, 0).is_err());
    }

    #[test]
    fn msh3_round_trip() {
        let m = gen_mesh(Shape::Ball, 0).unwrap();
        let back = Mesh::from_msh3(&m.to_msh3()).unwrap();
        assert_eq!(back.vertices, m.vertices);
        assert_eq!(back.tets, m.tets);
        assert_eq!(back.boundary_faces.len(), m.boundary_faces.len());
        assert!(Mesh::from_msh3("msh3 1 0 0\nv 0 0\n").is_err());
    }

    #[test]
    fn shape_parsing() {
        assert_eq!(Shape::parse("ball").unwrap(), Shape::Ball);
        assert_eq!(Shape::parse("spheroid:2,3").unwrap(), Shape::Spheroid { a: 2.0, c: 3.0 });
        assert!(Shape::parse("torus").is_err());
        assert!(Shape::parse("ellipsoid:1,0,1").is_err());
    }
}
