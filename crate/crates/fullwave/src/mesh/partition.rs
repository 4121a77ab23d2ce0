//! Non-overlapping partitions of a tet mesh and the interface skeleton
//! Σ = ∪ Σ_{i,j} between subdomains.
//!
//! Subdomains are face-connected sets of tets; each interface triangle is
//! shared by exactly two tets in different subdomains. On Σ_{i,j} (i > j)
//! the stored orientation makes the normal point from the larger-indexed
//! subdomain into the smaller, matching the jump sign
//! `[v]_{Σ_{i,j}} = v_i − v_j`.

use std::collections::{BTreeMap, HashMap};

use crate::error::Error;
use crate::mesh::{outward_face, BoundaryTri, Mesh};
use crate::Result;

/// How to assign tets to subdomains.
#[derive(Debug, Clone, PartialEq)]
pub enum PartitionRule {
    /// Split by tet centroid along a coordinate axis at the given cut
    /// values (sorted ascending): n cuts produce n+1 subdomains.
    AxisSplit { axis: usize, cuts: Vec<f64> },
    /// Explicit subdomain id per tet (0-based).
    Explicit(Vec<usize>),
}

/// One triangle of an interface Σ_{i,j}.
#[derive(Debug, Clone, Copy)]
pub struct InterfaceFace {
    /// Vertex ids ordered so the right-hand normal points from subdomain i
    /// (the larger index) into subdomain j.
    pub tri: [u32; 3],
    /// Owning tet on the larger-indexed side.
    pub tet_hi: usize,
    /// Owning tet on the smaller-indexed side.
    pub tet_lo: usize,
}

/// A non-overlapping partition of the mesh.
#[derive(Debug, Clone)]
pub struct Partition {
    pub n_subdomains: usize,
    /// Subdomain id (0-based) of every tet.
    pub subdomain_of: Vec<usize>,
    /// Interfaces keyed by (i, j) with i > j.
    pub interfaces: BTreeMap<(usize, usize), Vec<InterfaceFace>>,
    /// Exterior boundary triangles (indices into `mesh.boundary_tris`) per
    /// subdomain; may be empty for interior subdomains.
    pub exterior_of: Vec<Vec<usize>>,
}

impl Partition {
    /// Builds and validates a partition.
    pub fn build(mesh: &Mesh, rule: &PartitionRule) -> Result<Partition> {
        let subdomain_of: Vec<usize> = match rule {
            PartitionRule::AxisSplit { axis, cuts } => {
                if *axis > 2 {
                    return Err(Error::Structure(format!("axis {axis} out of range")));
                }
                if cuts.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::Structure("cut values must be strictly increasing".into()));
                }
                (0..mesh.tets.len())
                    .map(|t| {
                        let c = mesh.point_of(t, [0.25; 4]);
                        cuts.iter().position(|&cut| c[*axis] < cut).unwrap_or(cuts.len())
                    })
                    .collect()
            }
            PartitionRule::Explicit(ids) => {
                if ids.len() != mesh.tets.len() {
                    return Err(Error::Structure(format!(
                        "explicit rule assigns {} tets, mesh has {}",
                        ids.len(),
                        mesh.tets.len()
                    )));
                }
                ids.clone()
            }
        };

        let n_subdomains = subdomain_of.iter().copied().max().map_or(0, |m| m + 1);
        if n_subdomains == 0 {
            return Err(Error::Structure("empty mesh".into()));
        }
        let mut count = vec![0usize; n_subdomains];
        for &s in &subdomain_of {
            count[s] += 1;
        }
        if let Some(empty) = count.iter().position(|&c| c == 0) {
            return Err(Error::Structure(format!("subdomain {empty} is empty")));
        }

        // face-adjacency between tets
        let faces = mesh.face_map();
        let mut neighbor: Vec<Vec<usize>> = vec![Vec::new(); mesh.tets.len()];
        for owners in faces.values() {
            if owners.len() == 2 {
                neighbor[owners[0]].push(owners[1]);
                neighbor[owners[1]].push(owners[0]);
            }
        }

        // each subdomain must be face-connected
        let mut seen = vec![false; mesh.tets.len()];
        for s in 0..n_subdomains {
            let seed = subdomain_of.iter().position(|&x| x == s).unwrap();
            let mut stack = vec![seed];
            seen[seed] = true;
            let mut reached = 1usize;
            while let Some(t) = stack.pop() {
                for &u in &neighbor[t] {
                    if !seen[u] && subdomain_of[u] == s {
                        seen[u] = true;
                        reached += 1;
                        stack.push(u);
                    }
                }
            }
            if reached != count[s] {
                return Err(Error::Structure(format!(
                    "subdomain {s} is not face-connected ({reached} of {} tets reachable)",
                    count[s]
                )));
            }
        }

        // interface faces, oriented from the larger-indexed subdomain
        let mut interfaces: BTreeMap<(usize, usize), Vec<InterfaceFace>> = BTreeMap::new();
        let mut keys: Vec<_> = faces.keys().copied().collect();
        keys.sort_unstable();
        for f in keys {
            let owners = &faces[&f];
            if owners.len() != 2 {
                continue;
            }
            let (ta, tb) = (owners[0], owners[1]);
            let (sa, sb) = (subdomain_of[ta], subdomain_of[tb]);
            if sa == sb {
                continue;
            }
            let (tet_hi, tet_lo, hi, lo) = if sa > sb {
                (ta, tb, sa, sb)
            } else {
                (tb, ta, sb, sa)
            };
            let tri = outward_face(mesh, tet_hi, f);
            interfaces
                .entry((hi, lo))
                .or_default()
                .push(InterfaceFace { tri, tet_hi, tet_lo });
        }

        // exterior boundary triangles per subdomain
        let mut owner_of_face: HashMap<[u32; 3], usize> = HashMap::new();
        for (f, owners) in &faces {
            if owners.len() == 1 {
                owner_of_face.insert(*f, owners[0]);
            }
        }
        let mut exterior_of = vec![Vec::new(); n_subdomains];
        for (b, bt) in mesh.boundary_tris.iter().enumerate() {
            let mut key = bt.vertices;
            key.sort_unstable();
            if let Some(&t) = owner_of_face.get(&key) {
                exterior_of[subdomain_of[t]].push(b);
            }
        }

        Ok(Partition {
            n_subdomains,
            subdomain_of,
            interfaces,
            exterior_of,
        })
    }

    /// All interface faces, over all subdomain pairs.
    pub fn interface_faces(&self) -> impl Iterator<Item = (&(usize, usize), &InterfaceFace)> {
        self.interfaces
            .iter()
            .flat_map(|(k, v)| v.iter().map(move |f| (k, f)))
    }
}

/// A subdomain mesh extracted from a partition, with maps back to the
/// global mesh. Interface faces carry no boundary tag (they receive
/// multiplier constraints, not boundary conditions).
#[derive(Debug, Clone)]
pub struct Submesh {
    pub mesh: Mesh,
    /// Global vertex id of each local vertex.
    pub global_vertex: Vec<u32>,
    /// Global tet id of each local tet.
    pub global_tet: Vec<usize>,
    /// True when the submesh is the whole mesh with identity maps.
    pub is_whole: bool,
}

/// Extracts subdomain `sub` of the partition. With a single subdomain the
/// original mesh is reused unchanged so a decomposed solve degenerates to
/// the monodomain one bit-for-bit.
pub fn extract_submesh(mesh: &Mesh, partition: &Partition, sub: usize) -> Submesh {
    if partition.n_subdomains == 1 {
        return Submesh {
            mesh: mesh.clone(),
            global_vertex: (0..mesh.vertices.len() as u32).collect(),
            global_tet: (0..mesh.tets.len()).collect(),
            is_whole: true,
        };
    }

    let mut local_of: HashMap<u32, u32> = HashMap::new();
    let mut global_vertex = Vec::new();
    let mut global_tet = Vec::new();
    let mut tets = Vec::new();
    for (t, vs) in mesh.tets.iter().enumerate() {
        if partition.subdomain_of[t] != sub {
            continue;
        }
        let mut local = [0u32; 4];
        for (k, &v) in vs.iter().enumerate() {
            let next = local_of.len() as u32;
            let id = *local_of.entry(v).or_insert_with(|| {
                global_vertex.push(v);
                next
            });
            local[k] = id;
        }
        tets.push(local);
        global_tet.push(t);
    }
    let vertices = global_vertex
        .iter()
        .map(|&v| mesh.vertices[v as usize])
        .collect();
    let boundary_tris = partition.exterior_of[sub]
        .iter()
        .map(|&b| {
            let bt = mesh.boundary_tris[b];
            BoundaryTri {
                vertices: [
                    local_of[&bt.vertices[0]],
                    local_of[&bt.vertices[1]],
                    local_of[&bt.vertices[2]],
                ],
                tag: bt.tag,
            }
        })
        .collect();
    Submesh {
        mesh: Mesh::from_raw(vertices, tets, boundary_tris),
        global_vertex,
        global_tet,
        is_whole: false,
    }
}

/// Verifies the face-incidence invariants of a partition against an
/// exhaustive scan (test/diagnostic helper).
pub fn exhaustive_interface_check(mesh: &Mesh, partition: &Partition) -> Result<()> {
    let faces = mesh.face_map();
    let mut expected = 0usize;
    for owners in faces.values() {
        if owners.len() == 2 && partition.subdomain_of[owners[0]] != partition.subdomain_of[owners[1]]
        {
            expected += 1;
        }
    }
    let got: usize = partition.interfaces.values().map(|v| v.len()).sum();
    if expected != got {
        return Err(Error::Structure(format!(
            "interface scan mismatch: {got} stored vs {expected} expected"
        )));
    }
    // pairwise disjoint by construction (each face keyed once); verify the
    // orientation convention: normal points from hi to lo
    for ((_hi, _lo), list) in &partition.interfaces {
        for f in list {
            let (_, n) = mesh.tri_area_normal(f.tri);
            let c_hi = mesh.point_of(f.tet_hi, [0.25; 4]);
            let c_lo = mesh.point_of(f.tet_lo, [0.25; 4]);
            if n.dot(&(c_lo - c_hi)) <= 0.0 {
                return Err(Error::Structure("interface normal not oriented hi→lo".into()));
            }
        }
    }
    Ok(())
}
