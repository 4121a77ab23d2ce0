//! Reader for Gmsh MSH 2.2 ASCII files.
//!
//! Supported sections: `$MeshFormat`, `$Nodes`, `$Elements`. Element types:
//! 4 (tetrahedron), 2 (boundary triangle, tagged), 15 (point, ignored).
//! Physical tags of triangles are mapped to Γ_A/Γ_C through [`TagMap`].

use std::collections::HashMap;

use crate::error::Error;
use crate::mesh::{BoundaryTag, BoundaryTri, Mesh};
use crate::{Result, Vec3};

/// Physical-tag → boundary-tag mapping for triangle elements.
#[derive(Debug, Clone, Default, serde::Serialize, serde::Deserialize)]
pub struct TagMap {
    pub gamma_a: Vec<i64>,
    pub gamma_c: Vec<i64>,
}

impl TagMap {
    fn classify(&self, tag: i64) -> Option<BoundaryTag> {
        if self.gamma_a.contains(&tag) {
            Some(BoundaryTag::GammaA)
        } else if self.gamma_c.contains(&tag) {
            Some(BoundaryTag::GammaC)
        } else {
            None
        }
    }
}

fn err(line: usize, message: impl Into<String>) -> Error {
    Error::MeshParse {
        line,
        message: message.into(),
    }
}


struct Cursor<'a> {
    lines: &'a [&'a str],
    pos: &'a mut usize,
}

impl<'a> Cursor<'a> {
    fn next_line(&mut self) -> Result<(usize, &'a str)> {
        if *self.pos >= self.lines.len() {
            return Err(err(0, "unexpected end of file"));
        }
        let i = *self.pos;
        *self.pos += 1;
        Ok((i + 1, self.lines[i].trim()))
    }

    fn peek(&self) -> Option<(usize, &'a str)> {
        if *self.pos >= self.lines.len() {
            None
        } else {
            Some((*self.pos, self.lines[*self.pos]))
        }
    }
}

/// Parses an MSH 2.2 ASCII mesh. Vertex ids are re-indexed contiguously
/// from 0; tets are canonically oriented; the result is structurally
/// validated.
pub fn parse_gmsh(bytes: &[u8], tags: &TagMap) -> Result<Mesh> {
    let text = std::str::from_utf8(bytes).map_err(|e| err(0, format!("not UTF-8: {e}")))?;
    let all: Vec<&str> = text.lines().collect();
    let mut cursor = 0usize;
    let mut lines = Cursor {
        lines: &all,
        pos: &mut cursor,
    };

    // header
    let (l, tok) = lines.next_line()?;
    if tok != "$MeshFormat" {
        return Err(err(l, format!("expected $MeshFormat, got `{tok}`")));
    }
    let (l, fmt) = lines.next_line()?;
    let mut parts = fmt.split_whitespace();
    let version = parts.next().ok_or_else(|| err(l, "missing format version"))?;
    if !version.starts_with("2.2") {
        return Err(err(l, format!("unsupported MSH version `{version}` (need 2.2)")));
    }
    let file_type = parts.next().ok_or_else(|| err(l, "missing file-type field"))?;
    if file_type != "0" {
        return Err(err(l, "binary MSH files are not supported"));
    }
    let (l, tok) = lines.next_line()?;
    if tok != "$EndMeshFormat" {
        return Err(err(l, format!("expected $EndMeshFormat, got `{tok}`")));
    }

    let mut vertices: Vec<Vec3> = Vec::new();
    let mut id_map: HashMap<i64, u32> = HashMap::new();
    let mut tets: Vec<[u32; 4]> = Vec::new();
    let mut boundary: Vec<BoundaryTri> = Vec::new();
    let mut elements_line = 0usize;

    while let Some((i, raw)) = lines.peek() {
        let section = raw.trim();
        let line_no = i + 1;
        let _ = lines.next_line();
        match section {
            "$Nodes" => {
                let (l, count) = lines.next_line()?;
                let n: usize = count
                    .parse()
                    .map_err(|_| err(l, format!("bad node count `{count}`")))?;
                for _ in 0..n {
                    let (l, node) = lines.next_line()?;
                    let mut it = node.split_whitespace();
                    let id: i64 = it
                        .next()
                        .and_then(|s| s.parse().ok())
                        .ok_or_else(|| err(l, "bad node id"))?;
                    let mut coords = [0.0f64; 3];
                    for c in &mut coords {
                        *c = it
                            .next()
                            .and_then(|s| s.parse().ok())
                            .ok_or_else(|| err(l, "bad node coordinate"))?;
                    }
                    if id_map.insert(id, vertices.len() as u32).is_some() {
                        return Err(err(l, format!("duplicate node id {id}")));
                    }
                    vertices.push(Vec3::new(coords[0], coords[1], coords[2]));
                }
                let (l, tok) = lines.next_line()?;
                if tok != "$EndNodes" {
                    return Err(err(l, format!("expected $EndNodes, got `{tok}`")));
                }
            }
            "$Elements" => {
                elements_line = line_no;
                let (l, count) = lines.next_line()?;
                let n: usize = count
                    .parse()
                    .map_err(|_| err(l, format!("bad element count `{count}`")))?;
                for _ in 0..n {
                    let (l, elem) = lines.next_line()?;
                    let fields: Vec<i64> = elem
                        .split_whitespace()
                        .map(|s| s.parse::<i64>())
                        .collect::<std::result::Result<_, _>>()
                        .map_err(|_| err(l, "non-integer element field"))?;
                    if fields.len() < 3 {
                        return Err(err(l, "truncated element record"));
                    }
                    let etype = fields[1];
                    let ntags = fields[2] as usize;
                    let nodes = &fields[3 + ntags..];
                    let vertex = |id: i64| -> Result<u32> {
                        id_map
                            .get(&id)
                            .copied()
                            .ok_or_else(|| err(l, format!("element references unknown node {id}")))
                    };
                    match etype {
                        15 => {} // point elements carry no geometry we need
                        2 => {
                            if nodes.len() != 3 {
                                return Err(err(l, "triangle needs 3 nodes"));
                            }
                            let phys = if ntags >= 1 {
                                fields[3]
                            } else {
                                return Err(err(l, "boundary triangle without physical tag"));
                            };
                            let tag = tags.classify(phys).ok_or_else(|| {
                                err(
                                    l,
                                    format!(
                                        "physical tag {phys} mapped to neither GammaA nor GammaC"
                                    ),
                                )
                            })?;
                            boundary.push(BoundaryTri {
                                vertices: [vertex(nodes[0])?, vertex(nodes[1])?, vertex(nodes[2])?],
                                tag,
                            });
                        }
                        4 => {
                            if nodes.len() != 4 {
                                return Err(err(l, "tetrahedron needs 4 nodes"));
                            }
                            tets.push([
                                vertex(nodes[0])?,
                                vertex(nodes[1])?,
                                vertex(nodes[2])?,
                                vertex(nodes[3])?,
                            ]);
                        }
                        other => {
                            return Err(err(l, format!("unsupported element type {other}")));
                        }
                    }
                }
                let (l, tok) = lines.next_line()?;
                if tok != "$EndElements" {
                    return Err(err(l, format!("expected $EndElements, got `{tok}`")));
                }
            }
            s if s.starts_with('$') && !s.starts_with("$End") => {
                // skip unknown sections (e.g. $PhysicalNames)
                let end = format!("$End{}", &s[1..]);
                loop {
                    let (_, tok) = lines.next_line()?;
                    if tok == end {
                        break;
                    }
                }
            }
            "" => {}
            s => return Err(err(line_no, format!("unexpected content `{s}`"))),
        }
    }

    if tets.is_empty() {
        return Err(err(elements_line, "no tetrahedra in file"));
    }
    let mut mesh = Mesh::from_raw(vertices, tets, boundary);
    mesh.canonicalize();
    if let Err(Error::Structure(msg)) = mesh.check() {
        return Err(err(elements_line, format!("invalid mesh: {msg}")));
    }
    if let Err(Error::Structure(msg)) = mesh.orient_boundary_outward() {
        return Err(err(elements_line, format!("invalid mesh: {msg}")));
    }
    Ok(mesh)
}
