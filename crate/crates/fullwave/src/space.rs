//! Taylor–Hood nodal spaces: continuous P2 vector fields (three components
//! per node, nodes at vertices and edge midpoints) paired with continuous
//! P1 scalars on vertices.
//!
//! Degrees of freedom are ordered lexicographically: vector dof
//! `3·node + component`, nodes numbered vertices first then edges (edges
//! sorted by their vertex pair), scalar dof = vertex id. Boundary vector
//! nodes are classified from the tagged boundary triangles: nodes interior
//! to a flat piece get an area-weighted averaged normal and a tangential
//! frame; nodes where faces with independent normals meet are edge/corner
//! nodes.

use std::collections::HashMap;
use std::sync::Arc;

use crate::mesh::{BoundaryTag, Mesh};
use crate::Vec3;

/// Local edge order within a tet: nodes 4..9 of an element.
pub const TET_EDGES: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

/// Boundary classification of a vector node.
#[derive(Debug, Clone, PartialEq)]
pub enum NodeClass {
    Interior,
    /// Interior to one flat boundary piece: a single normal direction.
    Face { tag: BoundaryTag, normal: Vec3 },
    /// On a boundary edge or corner: several independent normal directions
    /// (each with the tag of its faces).
    EdgeCorner { clusters: Vec<(Vec3, BoundaryTag)> },
}

impl NodeClass {
    pub fn is_boundary(&self) -> bool {
        !matches!(self, NodeClass::Interior)
    }
}

/// Taylor–Hood space over a mesh.
#[derive(Debug, Clone)]
pub struct FeSpace {
    pub mesh: Arc<Mesh>,
    /// Unique mesh edges as sorted vertex pairs, lexicographically ordered.
    pub edges: Vec<(u32, u32)>,
    edge_index: HashMap<(u32, u32), u32>,
    /// Per-tet global node ids: 4 vertices then 6 edge nodes (TET_EDGES order).
    pub elem_nodes: Vec<[u32; 10]>,
    /// Classification of every node (vertices + edges).
    pub node_class: Vec<NodeClass>,
    /// Rotation to boundary-aligned coordinates for face nodes: rows
    /// (t₁, t₂, n). `None` for interior and edge/corner nodes.
    pub frames: Vec<Option<nalgebra::Matrix3<f64>>>,
}

impl FeSpace {
    pub fn new(mesh: Arc<Mesh>) -> FeSpace {
        // collect unique edges
        let mut pairs: Vec<(u32, u32)> = Vec::with_capacity(mesh.tets.len() * 6);
        for vs in &mesh.tets {
            for (i, j) in TET_EDGES {
                let (a, b) = (vs[i].min(vs[j]), vs[i].max(vs[j]));
                pairs.push((a, b));
            }
        }
        pairs.sort_unstable();
        pairs.dedup();
        let edge_index: HashMap<(u32, u32), u32> = pairs
            .iter()
            .enumerate()
            .map(|(i, &e)| (e, i as u32))
            .collect();

        let nv = mesh.n_vertices() as u32;
        let elem_nodes: Vec<[u32; 10]> = mesh
            .tets
            .iter()
            .map(|vs| {
                let mut nodes = [0u32; 10];
                nodes[..4].copy_from_slice(vs);
                for (k, (i, j)) in TET_EDGES.iter().enumerate() {
                    let key = (vs[*i].min(vs[*j]), vs[*i].max(vs[*j]));
                    nodes[4 + k] = nv + edge_index[&key];
                }
                nodes
            })
            .collect();

        let n_nodes = nv as usize + pairs.len();
        let (node_class, frames) = classify_nodes(&mesh, &edge_index, n_nodes);

        FeSpace {
            mesh,
            edges: pairs,
            edge_index,
            elem_nodes,
            node_class,
            frames,
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.mesh.n_vertices() + self.edges.len()
    }

    /// Dimension of the complex P2 vector space.
    pub fn n_vector_dofs(&self) -> usize {
        3 * self.n_nodes()
    }

    /// Dimension of the complex P1 scalar space.
    pub fn n_scalar_dofs(&self) -> usize {
        self.mesh.n_vertices()
    }

    /// Global edge id of a vertex pair, if that edge exists.
    pub fn edge_id(&self, a: u32, b: u32) -> Option<u32> {
        self.edge_index.get(&(a.min(b), a.max(b))).copied()
    }

    /// Global node id of an edge midpoint.
    pub fn edge_node(&self, a: u32, b: u32) -> Option<u32> {
        self.edge_id(a, b)
            .map(|e| self.mesh.n_vertices() as u32 + e)
    }

    /// Coordinates of a node (vertex or edge midpoint).
    pub fn node_position(&self, node: u32) -> Vec3 {
        let nv = self.mesh.n_vertices() as u32;
        if node < nv {
            self.mesh.vertices[node as usize]
        } else {
            let (a, b) = self.edges[(node - nv) as usize];
            0.5 * (self.mesh.vertices[a as usize] + self.mesh.vertices[b as usize])
        }
    }

    /// The six P2 nodes of a boundary triangle: its vertices then its edge
    /// midpoints ((0,1), (1,2), (2,0) order).
    pub fn tri_nodes(&self, tri: [u32; 3]) -> [u32; 6] {
        let e01 = self.edge_node(tri[0], tri[1]).expect("boundary edge");
        let e12 = self.edge_node(tri[1], tri[2]).expect("boundary edge");
        let e20 = self.edge_node(tri[2], tri[0]).expect("boundary edge");
        [tri[0], tri[1], tri[2], e01, e12, e20]
    }

    /// Scalar vertices lying on the boundary (any tag).
    pub fn boundary_vertices(&self) -> Vec<u32> {
        (0..self.mesh.n_vertices() as u32)
            .filter(|&v| self.node_class[v as usize].is_boundary())
            .collect()
    }
}

fn classify_nodes(
    mesh: &Mesh,
    edge_index: &HashMap<(u32, u32), u32>,
    n_nodes: usize,
) -> (Vec<NodeClass>, Vec<Option<nalgebra::Matrix3<f64>>>) {
    let nv = mesh.n_vertices() as u32;
    // accumulate area-weighted normals per node, clustered by direction
    let mut clusters: Vec<Vec<(Vec3, BoundaryTag)>> = vec![Vec::new(); n_nodes];

    for bt in &mesh.boundary_tris {
        let (area, normal) = mesh.tri_area_normal(bt.vertices);
        let mut nodes = [0u32; 6];
        nodes[..3].copy_from_slice(&bt.vertices);
        for (k, (i, j)) in [(0usize, 1usize), (1, 2), (2, 0)].iter().enumerate() {
            let key = (
                bt.vertices[*i].min(bt.vertices[*j]),
                bt.vertices[*i].max(bt.vertices[*j]),
            );
            nodes[3 + k] = nv + edge_index[&key];
        }
        for &node in &nodes {
            let list = &mut clusters[node as usize];
            let mut found = false;
            for (dir, tag) in list.iter_mut() {
                if dir.normalize().dot(&normal) > 1.0 - 1e-8 {
                    *dir += area * normal;
                    if bt.tag == BoundaryTag::GammaA {
                        *tag = BoundaryTag::GammaA;
                    }
                    found = true;
                    break;
                }
            }
            if !found {
                list.push((area * normal, bt.tag));
            }
        }
    }

    let mut classes = Vec::with_capacity(n_nodes);
    let mut frames = Vec::with_capacity(n_nodes);
    for list in clusters {
        match list.len() {
            0 => {
                classes.push(NodeClass::Interior);
                frames.push(None);
            }
            1 => {
                let normal = list[0].0.normalize();
                let (t1, t2) = crate::plasma::orthonormal_complement(normal);
                let rot = nalgebra::Matrix3::from_rows(&[
                    t1.transpose(),
                    t2.transpose(),
                    normal.transpose(),
                ]);
                classes.push(NodeClass::Face {
                    tag: list[0].1,
                    normal,
                });
                frames.push(Some(rot));
            }
            _ => {
                classes.push(NodeClass::EdgeCorner {
                    clusters: list
                        .iter()
                        .map(|(n, tag)| (n.normalize(), *tag))
                        .collect(),
                });
                frames.push(None);
            }
        }
    }
    (classes, frames)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{BoundaryTri, CubeFace};
    use std::collections::HashSet;

    fn single_tet() -> Mesh {
        let vertices = vec![
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
            Vec3::new(0.0, 0.0, 1.0),
        ];
        let boundary = vec![
            BoundaryTri { vertices: [0, 1, 2], tag: BoundaryTag::GammaC },
            BoundaryTri { vertices: [0, 1, 3], tag: BoundaryTag::GammaC },
            BoundaryTri { vertices: [0, 2, 3], tag: BoundaryTag::GammaC },
            BoundaryTri { vertices: [1, 2, 3], tag: BoundaryTag::GammaC },
        ];
        let mut m = Mesh::from_raw(vertices, vec![[0, 1, 2, 3]], boundary);
        m.canonicalize();
        m.orient_boundary_outward().unwrap();
        m
    }

    #[test]
    fn single_tet_dimensions() {
        let sp = FeSpace::new(Arc::new(single_tet()));
        assert_eq!(sp.n_vector_dofs(), 30); // 3·(4 vertices + 6 edges)
        assert_eq!(sp.n_scalar_dofs(), 4);
        assert_eq!(sp.edges.len(), 6);
    }

    #[test]
    fn kuhn_cube_edge_count_oracle() {
        let m = Mesh::unit_cube(1, CubeFace::XMin);
        // independent edge extraction: pairwise vertex sets per tet
        let mut oracle: HashSet<(u32, u32)> = HashSet::new();
        for t in &m.tets {
            for i in 0..4 {
                for j in (i + 1)..4 {
                    oracle.insert((t[i].min(t[j]), t[i].max(t[j])));
                }
            }
        }
        let sp = FeSpace::new(Arc::new(m));
        assert_eq!(sp.edges.len(), oracle.len());
        assert_eq!(sp.edges.len(), 19); // 12 cube + 6 face diagonals + 1 body
        assert_eq!(sp.n_scalar_dofs(), 8);
        assert_eq!(sp.n_vector_dofs(), 3 * (8 + 19));
    }

    #[test]
    fn vertex_reordering_preserves_dimensions() {
        let m = Mesh::unit_cube(1, CubeFace::XMin);
        let n = m.n_vertices() as u32;
        // reverse vertex ids
        let perm: Vec<u32> = (0..n).rev().collect();
        let vertices: Vec<Vec3> = (0..n).map(|i| m.vertices[perm[i as usize] as usize]).collect();
        let inv: Vec<u32> = {
            let mut inv = vec![0u32; n as usize];
            for (new, &old) in perm.iter().enumerate() {
                inv[old as usize] = new as u32;
            }
            inv
        };
        let tets = m
            .tets
            .iter()
            .map(|t| [inv[t[0] as usize], inv[t[1] as usize], inv[t[2] as usize], inv[t[3] as usize]])
            .collect();
        let boundary = m
            .boundary_tris
            .iter()
            .map(|b| BoundaryTri {
                vertices: [
                    inv[b.vertices[0] as usize],
                    inv[b.vertices[1] as usize],
                    inv[b.vertices[2] as usize],
                ],
                tag: b.tag,
            })
            .collect();
        let mut m2 = Mesh::from_raw(vertices, tets, boundary);
        m2.canonicalize();
        let sp1 = FeSpace::new(Arc::new(m));
        let sp2 = FeSpace::new(Arc::new(m2));
        assert_eq!(sp1.n_vector_dofs(), sp2.n_vector_dofs());
        assert_eq!(sp1.n_scalar_dofs(), sp2.n_scalar_dofs());
    }

    #[test]
    fn cube_boundary_classification_matches_geometry() {
        let m = Mesh::unit_cube(2, CubeFace::XMin);
        let sp = FeSpace::new(Arc::new(m));
        for node in 0..sp.n_nodes() as u32 {
            let p = sp.node_position(node);
            let on_planes = (0..3)
                .flat_map(|k| [(k, 0.0), (k, 1.0)])
                .filter(|(k, v)| (p[*k] - v).abs() < 1e-12)
                .count();
            match (&sp.node_class[node as usize], on_planes) {
                (NodeClass::Interior, 0) => {}
                (NodeClass::Face { normal, tag }, 1) => {
                    // normal must be a coordinate direction on the cube
                    let mx = normal.amax();
                    assert!((mx - 1.0).abs() < 1e-12);
                    if p[0].abs() < 1e-12 {
                        assert_eq!(*tag, BoundaryTag::GammaA);
                    } else {
                        assert_eq!(*tag, BoundaryTag::GammaC);
                    }
                }
                (NodeClass::EdgeCorner { clusters }, k) if k >= 2 => {
                    assert_eq!(clusters.len(), k);
                }
                (class, k) => panic!("node {node} at {p:?}: class {class:?} vs {k} planes"),
            }
        }
    }

    #[test]
    fn frames_are_orthonormal() {
        let m = Mesh::unit_cube(2, CubeFace::ZMax);
        let sp = FeSpace::new(Arc::new(m));
        for (node, fr) in sp.frames.iter().enumerate() {
            if let Some(r) = fr {
                let should_be_id = r * r.transpose();
                assert!((should_be_id - nalgebra::Matrix3::identity()).norm() < 1e-12);
                // third row is the stored normal
                if let NodeClass::Face { normal, .. } = &sp.node_class[node] {
                    assert!((r.row(2).transpose() - normal).norm() < 1e-12);
                }
            }
        }
    }
}
