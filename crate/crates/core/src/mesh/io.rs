//! Plain-text mesh format.
//!
//! ```text
//! tetmesh 1
//! vertices <n>
//! x y z            (n lines)
//! tets <m>
//! i j k l          (m lines, zero-based)
//! boundary <k>
//! i j l D|N        (k lines)
//! ```
//!
//! Tokens are whitespace separated; everything after `#` is a comment.

use std::io::{BufRead, Write};
use std::path::Path;

use super::{BoundaryTag, Mesh};
use crate::error::{Error, MeshError, Result};
use crate::piola::Point;

struct Lines<R> {
    inner: R,
    line: usize,
}

impl<R: BufRead> Lines<R> {
    /// Next non-empty line, split into tokens.
    fn next(&mut self) -> Result<Option<(usize, Vec<String>)>> {
        let mut buf = String::new();
        loop {
            buf.clear();
            if self.inner.read_line(&mut buf)? == 0 {
                return Ok(None);
            }
            self.line += 1;
            let content = buf.split('#').next().unwrap_or("");
            let tokens: Vec<String> = content.split_whitespace().map(str::to_owned).collect();
            if !tokens.is_empty() {
                return Ok(Some((self.line, tokens)));
            }
        }
    }

    fn expect(&mut self, what: &str) -> Result<(usize, Vec<String>)> {
        self.next()?.ok_or_else(|| {
            parse_error(self.line + 1, format!("unexpected end of file, expected {what}"))
        })
    }

    fn section(&mut self, name: &str) -> Result<usize> {
        let (line, tokens) = self.expect(name)?;
        if tokens.len() != 2 || tokens[0] != name {
            return Err(parse_error(line, format!("expected `{name} <count>`")));
        }
        tokens[1]
            .parse()
            .map_err(|_| parse_error(line, format!("invalid count `{}`", tokens[1])))
    }
}

fn parse_error(line: usize, message: String) -> Error {
    MeshError::Parse { line, message }.into()
}

fn parse_all<T: std::str::FromStr>(line: usize, tokens: &[String], n: usize) -> Result<Vec<T>> {
    if tokens.len() != n {
        return Err(parse_error(line, format!("expected {n} values, found {}", tokens.len())));
    }
    tokens
        .iter()
        .map(|t| t.parse().map_err(|_| parse_error(line, format!("invalid value `{t}`"))))
        .collect()
}

pub fn read_mesh(reader: impl BufRead) -> Result<Mesh> {
    let mut lines = Lines { inner: reader, line: 0 };
    let (line, header) = lines.expect("header")?;
    if header != ["tetmesh", "1"] {
        return Err(parse_error(line, "expected header `tetmesh 1`".into()));
    }
    let nv = lines.section("vertices")?;
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (line, tokens) = lines.expect("vertex coordinates")?;
        let x: Vec<f64> = parse_all(line, &tokens, 3)?;
        vertices.push(Point::new(x[0], x[1], x[2]));
    }
    let nt = lines.section("tets")?;
    let mut tets = Vec::with_capacity(nt);
    for _ in 0..nt {
        let (line, tokens) = lines.expect("tetrahedron")?;
        let t: Vec<usize> = parse_all(line, &tokens, 4)?;
        tets.push([t[0], t[1], t[2], t[3]]);
    }
    let nb = lines.section("boundary")?;
    let mut tags = Vec::with_capacity(nb);
    for _ in 0..nb {
        let (line, tokens) = lines.expect("boundary face")?;
        if tokens.len() != 4 {
            return Err(parse_error(line, "expected `i j l D|N`".into()));
        }
        let f: Vec<usize> = parse_all(line, &tokens[..3], 3)?;
        let tag = match tokens[3].as_str() {
            "D" => BoundaryTag::Dirichlet,
            "N" => BoundaryTag::Neumann,
            other => return Err(parse_error(line, format!("unknown boundary tag `{other}`"))),
        };
        tags.push(([f[0], f[1], f[2]], tag));
    }
    if let Some((line, _)) = lines.next()? {
        return Err(parse_error(line, "trailing content after boundary section".into()));
    }
    Ok(Mesh::new(vertices, tets, &tags)?)
}

pub fn read_mesh_file(path: impl AsRef<Path>) -> Result<Mesh> {
    let file = std::fs::File::open(path)?;
    read_mesh(std::io::BufReader::new(file))
}

pub fn write_mesh(mesh: &Mesh, mut out: impl Write) -> Result<()> {
    writeln!(out, "tetmesh 1")?;
    writeln!(out, "vertices {}", mesh.num_vertices())?;
    for x in mesh.vertices() {
        writeln!(out, "{:.17e} {:.17e} {:.17e}", x[0], x[1], x[2])?;
    }
    writeln!(out, "tets {}", mesh.num_tets())?;
    for t in mesh.input_tets() {
        writeln!(out, "{} {} {} {}", t[0], t[1], t[2], t[3])?;
    }
    let tags = mesh.boundary_tags();
    writeln!(out, "boundary {}", tags.len())?;
    for (f, tag) in tags {
        let c = match tag {
            BoundaryTag::Dirichlet => 'D',
            BoundaryTag::Neumann => 'N',
        };
        writeln!(out, "{} {} {} {c}", f[0], f[1], f[2])?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const ONE_TET: &str = "tetmesh 1\n# reference\nvertices 4\n0 0 0\n1 0 0\n0 1 0\n0 0 1\n\
        tets 1\n0 1 2 3\nboundary 4\n1 2 3 D\n0 2 3 N # side\n0 1 3 D\n0 1 2 D\n";

    #[test]
    fn round_trip() {
        let m = read_mesh(ONE_TET.as_bytes()).unwrap();
        assert_eq!(m.num_tets(), 1);
        let mut buf = Vec::new();
        write_mesh(&m, &mut buf).unwrap();
        let m2 = read_mesh(buf.as_slice()).unwrap();
        assert_eq!(m2.boundary_tags(), m.boundary_tags());
    }

    #[test]
    fn reports_line_numbers() {
        let bad = ONE_TET.replace("0 1 3 D", "0 1 3 X");
        match read_mesh(bad.as_bytes()) {
            Err(Error::Mesh(MeshError::Parse { line, .. })) => assert_eq!(line, 13),
            other => panic!("unexpected {other:?}"),
        }
        let bad = ONE_TET.replace("0 1 0", "0 one 0");
        match read_mesh(bad.as_bytes()) {
            Err(Error::Mesh(MeshError::Parse { line, .. })) => assert_eq!(line, 6),
            other => panic!("unexpected {other:?}"),
        }
    }
}
