//! Plain-text mesh format.
//!
//! ```text
//! dim nv nc
//! x [y]            (nv lines)
//! v0 .. vd         (nc lines, 0-based)
//! v0 [v1] tag      (one line per boundary facet, until end of file)
//! ```

use std::io::{BufRead, Write};

use super::Mesh;
use crate::error::{Error, Result};

pub fn read_mesh<const D: usize>(reader: impl BufRead) -> Result<Mesh<D>> {
    let mut lines = reader
        .lines()
        .enumerate()
        .map(|(n, l)| (n + 1, l))
        .filter(|(_, l)| l.as_ref().map(|s| !s.trim().is_empty() && !s.starts_with('#')).unwrap_or(true));

    let mut next = |what: &str| -> Result<(usize, Vec<String>)> {
        match lines.next() {
            Some((n, l)) => Ok((n, l?.split_whitespace().map(str::to_owned).collect())),
            None => Err(Error::MeshFormat {
                line: 0,
                msg: format!("unexpected end of file while reading {what}"),
            }),
        }
    };
    let (n, head) = next("header")?;
    let header: Vec<usize> = parse_all(n, &head)?;
    if header.len() != 3 {
        return Err(Error::MeshFormat { line: n, msg: "header must be 'dim nv nc'".into() });
    }
    if header[0] != D {
        return Err(Error::MeshFormat {
            line: n,
            msg: format!("mesh dimension {} but {D} was requested", header[0]),
        });
    }
    let (nv, nc) = (header[1], header[2]);
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (n, tok) = next("vertices")?;
        let x: Vec<f64> = parse_all(n, &tok)?;
        if x.len() != D {
            return Err(Error::MeshFormat { line: n, msg: format!("expected {D} coordinates") });
        }
        vertices.push(std::array::from_fn(|k| x[k]));
    }
    let mut cells = Vec::with_capacity(nc * (D + 1));
    for _ in 0..nc {
        let (n, tok) = next("cells")?;
        let c: Vec<usize> = parse_all(n, &tok)?;
        if c.len() != D + 1 {
            return Err(Error::MeshFormat { line: n, msg: format!("expected {} vertex indices", D + 1) });
        }
        cells.extend(c);
    }
    let mut facets = Vec::new();
    let mut tags = Vec::new();
    for (n, line) in lines {
        let tok: Vec<String> = line?.split_whitespace().map(str::to_owned).collect();
        let f: Vec<usize> = parse_all(n, &tok)?;
        if f.len() != D + 1 {
            return Err(Error::MeshFormat { line: n, msg: format!("expected {D} vertex indices and a tag") });
        }
        facets.extend(&f[..D]);
        tags.push(f[D] as u32);
    }
    Mesh::new(vertices, cells, facets, tags)
}

pub fn write_mesh<const D: usize>(mesh: &Mesh<D>, mut w: impl Write) -> Result<()> {
    writeln!(w, "{D} {} {}", mesh.num_vertices(), mesh.num_cells())?;
    for v in mesh.vertices() {
        let s: Vec<String> = v.iter().map(|x| format!("{x:?}")).collect();
        writeln!(w, "{}", s.join(" "))?;
    }
    for c in 0..mesh.num_cells() {
        let s: Vec<String> = mesh.cell(c).iter().map(usize::to_string).collect();
        writeln!(w, "{}", s.join(" "))?;
    }
    for f in 0..mesh.num_facets() {
        let s: Vec<String> = mesh.facet(f).iter().map(usize::to_string).collect();
        writeln!(w, "{} {}", s.join(" "), mesh.facet_tag(f))?;
    }
    Ok(())
}

fn parse_all<T: std::str::FromStr>(line: usize, tok: &[String]) -> Result<Vec<T>> {
    tok.iter()
        .map(|t| {
            t.parse().map_err(|_| Error::MeshFormat {
                line,
                msg: format!("cannot parse '{t}'"),
            })
        })
        .collect()
}
