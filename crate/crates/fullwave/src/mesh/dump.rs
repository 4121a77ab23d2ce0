//! Plain-text mesh dump format for fixtures and debugging.
//!
//! ```text
//! meshdump 1
//! vertices <N>
//! <x> <y> <z>          (N lines, shortest round-trip float formatting)
//! tets <M>
//! <v0> <v1> <v2> <v3>  (M lines)
//! boundary <K>
//! <a> <b> <c> <A|C>    (K lines)
//! ```
//!
//! Coordinates are written with Rust's shortest round-trip formatting, so
//! re-parsing a dump reproduces every vertex bit-exactly.

use std::fmt::Write as _;

use crate::error::Error;
use crate::mesh::{BoundaryTag, BoundaryTri, Mesh};
use crate::{Result, Vec3};

/// Serializes a mesh to the dump format.
pub fn write_dump(mesh: &Mesh) -> String {
    let mut out = String::new();
    writeln!(out, "meshdump 1").unwrap();
    writeln!(out, "vertices {}", mesh.vertices.len()).unwrap();
    for v in &mesh.vertices {
        writeln!(out, "{} {} {}", v[0], v[1], v[2]).unwrap();
    }
    writeln!(out, "tets {}", mesh.tets.len()).unwrap();
    for t in &mesh.tets {
        writeln!(out, "{} {} {} {}", t[0], t[1], t[2], t[3]).unwrap();
    }
    writeln!(out, "boundary {}", mesh.boundary_tris.len()).unwrap();
    for b in &mesh.boundary_tris {
        let tag = match b.tag {
            BoundaryTag::GammaA => "A",
            BoundaryTag::GammaC => "C",
        };
        writeln!(out, "{} {} {} {}", b.vertices[0], b.vertices[1], b.vertices[2], tag).unwrap();
    }
    out
}

fn err(line: usize, msg: impl Into<String>) -> Error {
    Error::MeshParse {
        line,
        message: msg.into(),
    }
}

/// Parses the dump format back into a mesh (no structural validation).
pub fn read_dump(text: &str) -> Result<Mesh> {
    let mut lines = text.lines().enumerate();
    let mut next = || -> Result<(usize, &str)> {
        lines
            .next()
            .map(|(i, l)| (i + 1, l.trim()))
            .ok_or_else(|| err(0, "unexpected end of dump"))
    };

    let (l, header) = next()?;
    if header != "meshdump 1" {
        return Err(err(l, format!("bad header `{header}`")));
    }

    let expect_count = |line: usize, text: &str, key: &str| -> Result<usize> {
        let mut it = text.split_whitespace();
        if it.next() != Some(key) {
            return Err(err(line, format!("expected `{key} <count>`")));
        }
        it.next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| err(line, format!("bad {key} count")))
    };

    let (l, s) = next()?;
    let nv = expect_count(l, s, "vertices")?;
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (l, s) = next()?;
        let mut it = s.split_whitespace();
        let mut c = [0.0f64; 3];
        for v in &mut c {
            *v = it
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| err(l, "bad coordinate"))?;
        }
        vertices.push(Vec3::new(c[0], c[1], c[2]));
    }

    let (l, s) = next()?;
    let nt = expect_count(l, s, "tets")?;
    let mut tets = Vec::with_capacity(nt);
    for _ in 0..nt {
        let (l, s) = next()?;
        let mut it = s.split_whitespace();
        let mut t = [0u32; 4];
        for v in &mut t {
            *v = it
                .next()
                .and_then(|x| x.parse().ok())
                .ok_or_else(|| err(l, "bad tet vertex id"))?;
        }
        tets.push(t);
    }

    let (l, s) = next()?;
    let nb = expect_count(l, s, "boundary")?;
    let mut boundary = Vec::with_capacity(nb);
    for _ in 0..nb {
        let (l, s) = next()?;
        let mut it = s.split_whitespace();
        let mut f = [0u32; 3];
        for v in &mut f {
            *v = it
                .next()
                .and_then(|x| x.parse().ok())
                .ok_or_else(|| err(l, "bad boundary vertex id"))?;
        }
        let tag = match it.next() {
            Some("A") => BoundaryTag::GammaA,
            Some("C") => BoundaryTag::GammaC,
            other => return Err(err(l, format!("bad boundary tag {other:?}"))),
        };
        boundary.push(BoundaryTri { vertices: f, tag });
    }

    Ok(Mesh::from_raw(vertices, tets, boundary))
}
