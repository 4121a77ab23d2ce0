//! Tetrahedral meshes with tagged boundaries, plus the non-overlapping
//! partition machinery used by the domain-decomposed solver.
//!
//! Meshes are conforming (no hanging vertices); every boundary face of the
//! tet mesh carries a tag, either `GammaA` (antenna) or `GammaC` (perfect
//! conductor). Only flat faces are represented; curved boundaries are
//! approximated by their piecewise-flat triangulation.

pub mod dump;
pub mod gmsh;
pub mod partition;

pub use partition::{extract_submesh, Partition, PartitionRule, Submesh};

use std::collections::HashMap;

use crate::error::Error;
use crate::{Result, Vec3};

/// Boundary piece labels: Γ_A is the antenna, Γ_C the conducting remainder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum BoundaryTag {
    GammaA,
    GammaC,
}

/// A tagged boundary triangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundaryTri {
    pub vertices: [u32; 3],
    pub tag: BoundaryTag,
}

/// A conforming tetrahedral mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    /// Vertex coordinates (m).
    pub vertices: Vec<Vec3>,
    /// Tetrahedra as vertex ids, positively oriented after canonicalization.
    pub tets: Vec<[u32; 4]>,
    /// Tagged boundary triangles covering ∂Ω exactly once.
    pub boundary_tris: Vec<BoundaryTri>,
}

/// One face of the unit cube, used to designate the antenna.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CubeFace {
    XMin,
    XMax,
    YMin,
    YMax,
    ZMin,
    ZMax,
}

impl CubeFace {
    fn contains(&self, p: Vec3, tol: f64) -> bool {
        match self {
            CubeFace::XMin => p[0].abs() <= tol,
            CubeFace::XMax => (p[0] - 1.0).abs() <= tol,
            CubeFace::YMin => p[1].abs() <= tol,
            CubeFace::YMax => (p[1] - 1.0).abs() <= tol,
            CubeFace::ZMin => p[2].abs() <= tol,
            CubeFace::ZMax => (p[2] - 1.0).abs() <= tol,
        }
    }
}

/// A single violation found by [`Mesh::validate`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// Negative signed volume.
    InvertedTet { tet: usize, volume: f64 },
    /// Zero (or numerically zero) volume.
    DegenerateTet { tet: usize },
    /// Two vertices closer than 1e-12 times the mesh diameter.
    DuplicateVertices { a: u32, b: u32, distance: f64 },
    /// A face owned by exactly one tet that no boundary triangle covers.
    UncoveredBoundaryFace { face: [u32; 3] },
    /// A boundary triangle that is actually an interior face.
    InteriorFaceTagged { face: [u32; 3] },
    /// A boundary triangle matching no tet face at all.
    OrphanBoundaryTri { face: [u32; 3] },
    /// A face shared by more than two tets.
    NonConformingFace { face: [u32; 3], count: usize },
    /// The same boundary face is tagged more than once.
    DuplicateBoundaryTri { face: [u32; 3] },
}

/// Outcome of [`Mesh::validate`]; empty means the mesh is usable.
#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

fn sorted_face(a: u32, b: u32, c: u32) -> [u32; 3] {
    let mut f = [a, b, c];
    f.sort_unstable();
    f
}

impl Mesh {
    /// Builds a mesh without validation or reorientation. Use
    /// [`Mesh::validate`] to inspect it and [`Mesh::canonicalize`] to fix
    /// tet orientation.
    pub fn from_raw(
        vertices: Vec<Vec3>,
        tets: Vec<[u32; 4]>,
        boundary_tris: Vec<BoundaryTri>,
    ) -> Mesh {
        Mesh {
            vertices,
            tets,
            boundary_tris,
        }
    }

    /// Number of vertices.
    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    /// Signed volume of a tet (positive after canonicalization).
    pub fn tet_volume(&self, t: usize) -> f64 {
        let [a, b, c, d] = self.tets[t];
        let p = &self.vertices;
        let e1 = p[b as usize] - p[a as usize];
        let e2 = p[c as usize] - p[a as usize];
        let e3 = p[d as usize] - p[a as usize];
        e1.cross(&e2).dot(&e3) / 6.0
    }

    /// Total mesh volume.
    pub fn volume(&self) -> f64 {
        (0..self.tets.len()).map(|t| self.tet_volume(t)).sum()
    }

    /// Edge-vector Jacobian of a tet: columns (v1−v0, v2−v0, v3−v0).
    pub fn tet_jacobian(&self, t: usize) -> nalgebra::Matrix3<f64> {
        let [a, b, c, d] = self.tets[t];
        let p = &self.vertices;
        nalgebra::Matrix3::from_columns(&[
            p[b as usize] - p[a as usize],
            p[c as usize] - p[a as usize],
            p[d as usize] - p[a as usize],
        ])
    }

    /// Longest edge of a tet.
    pub fn tet_diameter(&self, t: usize) -> f64 {
        let vs = self.tets[t];
        let mut h: f64 = 0.0;
        for i in 0..4 {
            for j in (i + 1)..4 {
                h = h.max((self.vertices[vs[i] as usize] - self.vertices[vs[j] as usize]).norm());
            }
        }
        h
    }

    /// Largest element diameter h.
    pub fn max_h(&self) -> f64 {
        (0..self.tets.len())
            .map(|t| self.tet_diameter(t))
            .fold(0.0, f64::max)
    }

    /// Bounding-box diagonal.
    pub fn diameter(&self) -> f64 {
        if self.vertices.is_empty() {
            return 0.0;
        }
        let mut lo = self.vertices[0];
        let mut hi = self.vertices[0];
        for v in &self.vertices {
            for k in 0..3 {
                lo[k] = lo[k].min(v[k]);
                hi[k] = hi[k].max(v[k]);
            }
        }
        (hi - lo).norm()
    }

    /// Barycentric coordinates of x in tet t.
    pub fn barycentric(&self, t: usize, x: Vec3) -> [f64; 4] {
        let j = self.tet_jacobian(t);
        let v0 = self.vertices[self.tets[t][0] as usize];
        let rhs = x - v0;
        let lam = j.lu().solve(&rhs).expect("nondegenerate tet");
        [1.0 - lam[0] - lam[1] - lam[2], lam[0], lam[1], lam[2]]
    }

    /// Physical point of barycentric coordinates in tet t.
    pub fn point_of(&self, t: usize, lambda: [f64; 4]) -> Vec3 {
        let vs = self.tets[t];
        let mut x = Vec3::zeros();
        for k in 0..4 {
            x += lambda[k] * self.vertices[vs[k] as usize];
        }
        x
    }

    /// Finds a tet containing x (barycentric coordinates ≥ −1e-12).
    pub fn find_tet(&self, x: Vec3) -> Option<(usize, [f64; 4])> {
        for t in 0..self.tets.len() {
            let lam = self.barycentric(t, x);
            if lam.iter().all(|&l| l >= -1e-12) {
                return Some((t, lam));
            }
        }
        None
    }

    /// Map from sorted face triple to the tets owning it.
    pub fn face_map(&self) -> HashMap<[u32; 3], Vec<usize>> {
        let mut map: HashMap<[u32; 3], Vec<usize>> = HashMap::new();
        for (t, vs) in self.tets.iter().enumerate() {
            for f in tet_faces(*vs) {
                map.entry(sorted_face(f[0], f[1], f[2])).or_default().push(t);
            }
        }
        map
    }

    /// Area and unit normal of a triangle given by vertex ids, oriented by
    /// the right-hand rule on the listed order.
    pub fn tri_area_normal(&self, tri: [u32; 3]) -> (f64, Vec3) {
        let a = self.vertices[tri[0] as usize];
        let b = self.vertices[tri[1] as usize];
        let c = self.vertices[tri[2] as usize];
        let n = (b - a).cross(&(c - a));
        let area = 0.5 * n.norm();
        (area, n.normalize())
    }

    /// Reorders tet vertices so every signed volume is positive.
    pub fn canonicalize(&mut self) {
        for t in 0..self.tets.len() {
            if self.tet_volume(t) < 0.0 {
                self.tets[t].swap(2, 3);
            }
        }
    }

    /// Reorders every boundary triangle so its right-hand normal points out
    /// of the domain. Requires each boundary face to match exactly one tet
    /// face.
    pub fn orient_boundary_outward(&mut self) -> Result<()> {
        let faces = self.face_map();
        let tris = std::mem::take(&mut self.boundary_tris);
        for mut bt in tris {
            let key = sorted_face(bt.vertices[0], bt.vertices[1], bt.vertices[2]);
            let owners = faces
                .get(&key)
                .ok_or_else(|| Error::Structure(format!("boundary face {key:?} matches no tet")))?;
            if owners.len() != 1 {
                return Err(Error::Structure(format!(
                    "boundary face {key:?} owned by {} tets",
                    owners.len()
                )));
            }
            bt.vertices = outward_face(self, owners[0], bt.vertices);
            self.boundary_tris.push(bt);
        }
        Ok(())
    }

    /// Reports structural violations; an empty report means valid.
    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        for t in 0..self.tets.len() {
            let v = self.tet_volume(t);
            if v == 0.0 || v.abs() < 1e-300 {
                report.violations.push(Violation::DegenerateTet { tet: t });
            } else if v < 0.0 {
                report.violations.push(Violation::InvertedTet { tet: t, volume: v });
            }
        }

        // near-duplicate vertices: sweep over x-sorted order
        let tol = 1e-12 * self.diameter();
        if tol > 0.0 {
            let mut order: Vec<u32> = (0..self.vertices.len() as u32).collect();
            order.sort_by(|&a, &b| {
                self.vertices[a as usize][0]
                    .partial_cmp(&self.vertices[b as usize][0])
                    .unwrap()
            });
            for i in 0..order.len() {
                for j in (i + 1)..order.len() {
                    let (a, b) = (order[i], order[j]);
                    let dx = self.vertices[b as usize][0] - self.vertices[a as usize][0];
                    if dx > tol {
                        break;
                    }
                    let d = (self.vertices[b as usize] - self.vertices[a as usize]).norm();
                    if d <= tol {
                        report.violations.push(Violation::DuplicateVertices {
                            a: a.min(b),
                            b: a.max(b),
                            distance: d,
                        });
                    }
                }
            }
        }

        // face incidence: boundary coverage and conformity
        let faces = self.face_map();
        let mut tagged: HashMap<[u32; 3], usize> = HashMap::new();
        for bt in &self.boundary_tris {
            let f = sorted_face(bt.vertices[0], bt.vertices[1], bt.vertices[2]);
            *tagged.entry(f).or_insert(0) += 1;
        }
        let mut sorted_keys: Vec<_> = faces.keys().copied().collect();
        sorted_keys.sort_unstable();
        for f in sorted_keys {
            let owners = &faces[&f];
            let ntag = tagged.get(&f).copied().unwrap_or(0);
            match owners.len() {
                1 => {
                    if ntag == 0 {
                        report
                            .violations
                            .push(Violation::UncoveredBoundaryFace { face: f });
                    } else if ntag > 1 {
                        report
                            .violations
                            .push(Violation::DuplicateBoundaryTri { face: f });
                    }
                }
                2 => {
                    if ntag > 0 {
                        report
                            .violations
                            .push(Violation::InteriorFaceTagged { face: f });
                    }
                }
                n => {
                    report
                        .violations
                        .push(Violation::NonConformingFace { face: f, count: n });
                }
            }
        }
        let mut tag_keys: Vec<_> = tagged.keys().copied().collect();
        tag_keys.sort_unstable();
        for f in tag_keys {
            if !faces.contains_key(&f) {
                report
                    .violations
                    .push(Violation::OrphanBoundaryTri { face: f });
            }
        }
        report
    }

    /// Errors on the first structural violation.
    pub fn check(&self) -> Result<()> {
        let report = self.validate();
        match report.violations.first() {
            None => Ok(()),
            Some(v) => Err(Error::Structure(format!("{v:?}"))),
        }
    }

    /// Unit cube [0,1]³ meshed with n×n×n cells of six tetrahedra each
    /// (Kuhn split, conforming across cells). One cube face is tagged as
    /// the antenna Γ_A; the rest is Γ_C.
    pub fn unit_cube(n: usize, antenna: CubeFace) -> Mesh {
        assert!(n >= 1);
        let np = n + 1;
        let vid = |i: usize, j: usize, k: usize| -> u32 { (i + np * (j + np * k)) as u32 };
        let mut vertices = Vec::with_capacity(np * np * np);
        for k in 0..np {
            for j in 0..np {
                for i in 0..np {
                    vertices.push(Vec3::new(
                        i as f64 / n as f64,
                        j as f64 / n as f64,
                        k as f64 / n as f64,
                    ));
                }
            }
        }
        // Kuhn split: six tets per cell, all sharing the main diagonal 0-7.
        const KUHN: [[usize; 4]; 6] = [
            [0, 1, 3, 7],
            [0, 1, 5, 7],
            [0, 2, 3, 7],
            [0, 2, 6, 7],
            [0, 4, 5, 7],
            [0, 4, 6, 7],
        ];
        let mut tets = Vec::with_capacity(6 * n * n * n);
        for k in 0..n {
            for j in 0..n {
                for i in 0..n {
                    let corner = |bit: usize| -> u32 {
                        vid(i + (bit & 1), j + ((bit >> 1) & 1), k + ((bit >> 2) & 1))
                    };
                    for t in KUHN {
                        tets.push([corner(t[0]), corner(t[1]), corner(t[2]), corner(t[3])]);
                    }
                }
            }
        }
        let mut mesh = Mesh::from_raw(vertices, tets, Vec::new());
        mesh.canonicalize();

        let faces = mesh.face_map();
        let tol = 1e-12;
        let mut boundary = Vec::new();
        let mut keys: Vec<_> = faces
            .iter()
            .filter(|(_, owners)| owners.len() == 1)
            .map(|(f, _)| *f)
            .collect();
        keys.sort_unstable();
        for f in keys {
            let on_antenna = f
                .iter()
                .all(|&v| antenna.contains(mesh.vertices[v as usize], tol));
            let owner = faces[&f][0];
            boundary.push(BoundaryTri {
                vertices: outward_face(&mesh, owner, f),
                tag: if on_antenna {
                    BoundaryTag::GammaA
                } else {
                    BoundaryTag::GammaC
                },
            });
        }
        mesh.boundary_tris = boundary;
        mesh
    }

    /// Uniform 1:8 refinement: each tet splits into four corner tets and
    /// four tets from its interior octahedron (shortest diagonal). Boundary
    /// triangles split 1:4 and inherit their tag. Returns the refined mesh
    /// and the parent-tet index of every child.
    pub fn refine_uniform(&self) -> (Mesh, Vec<usize>) {
        let mut vertices = self.vertices.clone();
        let mut midpoint: HashMap<(u32, u32), u32> = HashMap::new();
        let mut mid = |a: u32, b: u32, vertices: &mut Vec<Vec3>| -> u32 {
            let key = (a.min(b), a.max(b));
            *midpoint.entry(key).or_insert_with(|| {
                let m = 0.5 * (vertices[a as usize] + vertices[b as usize]);
                vertices.push(m);
                (vertices.len() - 1) as u32
            })
        };

        let mut tets = Vec::with_capacity(8 * self.tets.len());
        let mut parent = Vec::with_capacity(8 * self.tets.len());
        for (t, &[v0, v1, v2, v3]) in self.tets.iter().enumerate() {
            let m01 = mid(v0, v1, &mut vertices);
            let m02 = mid(v0, v2, &mut vertices);
            let m03 = mid(v0, v3, &mut vertices);
            let m12 = mid(v1, v2, &mut vertices);
            let m13 = mid(v1, v3, &mut vertices);
            let m23 = mid(v2, v3, &mut vertices);
            // corner tets
            tets.push([v0, m01, m02, m03]);
            tets.push([v1, m01, m12, m13]);
            tets.push([v2, m02, m12, m23]);
            tets.push([v3, m03, m13, m23]);
            // octahedron: diagonals (m01,m23), (m02,m13), (m03,m12)
            let d = [(m01, m23), (m02, m13), (m03, m12)];
            let len = |(a, b): (u32, u32)| (vertices[a as usize] - vertices[b as usize]).norm_squared();
            let mut pick = 0;
            for c in 1..3 {
                if len(d[c]) < len(d[pick]) {
                    pick = c;
                }
            }
            let (da, db) = d[pick];
            // equatorial cycle around the chosen diagonal
            let cycle: [u32; 4] = match pick {
                0 => [m02, m03, m13, m12],
                1 => [m01, m03, m23, m12],
                _ => [m01, m02, m23, m13],
            };
            for i in 0..4 {
                tets.push([da, db, cycle[i], cycle[(i + 1) % 4]]);
            }
            parent.extend(std::iter::repeat(t).take(8));
        }

        let mut boundary = Vec::with_capacity(4 * self.boundary_tris.len());
        for bt in &self.boundary_tris {
            let [a, b, c] = bt.vertices;
            let mab = mid(a, b, &mut vertices);
            let mbc = mid(b, c, &mut vertices);
            let mca = mid(c, a, &mut vertices);
            for tri in [[a, mab, mca], [b, mbc, mab], [c, mca, mbc], [mab, mbc, mca]] {
                boundary.push(BoundaryTri {
                    vertices: tri,
                    tag: bt.tag,
                });
            }
        }

        let mut mesh = Mesh::from_raw(vertices, tets, boundary);
        mesh.canonicalize();
        (mesh, parent)
    }

    /// True when the mesh fills the unit cube (within tol) with its
    /// boundary on the six coordinate planes.
    pub fn is_unit_cube(&self, tol: f64) -> bool {
        if self.vertices.is_empty() {
            return false;
        }
        let inside = self.vertices.iter().all(|v| {
            (0..3).all(|k| v[k] >= -tol && v[k] <= 1.0 + tol)
        });
        inside && (self.volume() - 1.0).abs() <= tol.max(1e-9)
    }
}

/// The four faces of a tet, each ordered outward for a positively oriented
/// tet.
pub fn tet_faces([a, b, c, d]: [u32; 4]) -> [[u32; 3]; 4] {
    [[b, c, d], [a, d, c], [a, b, d], [a, c, b]]
}

/// Orders a tet's face so its right-hand normal points out of the tet.
pub fn outward_face(mesh: &Mesh, tet: usize, face: [u32; 3]) -> [u32; 3] {
    let p = &mesh.vertices;
    let vs = mesh.tets[tet];
    let other = vs
        .iter()
        .copied()
        .find(|v| !face.contains(v))
        .expect("face must belong to tet");
    let a = p[face[0] as usize];
    let n = (p[face[1] as usize] - a).cross(&(p[face[2] as usize] - a));
    if n.dot(&(p[other as usize] - a)) > 0.0 {
        [face[0], face[2], face[1]]
    } else {
        face
    }
}
