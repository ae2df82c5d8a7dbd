//! Line-oriented text format:
//!
//! ```text
//! SMESH v1 EMB 3        # or: SMESH v1 PARAM 0
//! V <count>
//! x y z                 # PARAM: t θ λ
//! F <count>
//! a b c
//! B <loop-count>
//! i j k ...             # one loop per line
//! ```
//!
//! Indices are 0-based; `#` starts a comment.

use std::fmt::Write as _;
use std::path::Path;

use super::{Geometry, SurfaceMesh};
use crate::error::{Error, Result};

pub fn save(mesh: &SurfaceMesh, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, write_to(mesh)).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load(path: impl AsRef<Path>) -> Result<SurfaceMesh> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse(&text)
}

pub fn write_to(mesh: &SurfaceMesh) -> String {
    let mut s = String::new();
    match mesh.geometry() {
        Geometry::Embedding { dim, coords } => {
            writeln!(s, "SMESH v1 EMB {dim}").unwrap();
            writeln!(s, "V {}", coords.len() / dim).unwrap();
            for p in coords.chunks(*dim) {
                let line: Vec<String> = p.iter().map(|x| x.to_string()).collect();
                writeln!(s, "{}", line.join(" ")).unwrap();
            }
        }
        Geometry::ParamFlat { params, factor } => {
            writeln!(s, "SMESH v1 PARAM 0").unwrap();
            writeln!(s, "V {}", params.len()).unwrap();
            for (p, l) in params.iter().zip(factor) {
                writeln!(s, "{} {} {}", p[0], p[1], l).unwrap();
            }
        }
    }
    writeln!(s, "F {}", mesh.triangles().len()).unwrap();
    for t in mesh.triangles() {
        writeln!(s, "{} {} {}", t[0], t[1], t[2]).unwrap();
    }
    writeln!(s, "B {}", mesh.boundary_loops().len()).unwrap();
    for l in mesh.boundary_loops() {
        let line: Vec<String> = l.iter().map(|v| v.to_string()).collect();
        writeln!(s, "{}", line.join(" ")).unwrap();
    }
    s
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    /// Next non-empty line with comments stripped, as `(line_no, tokens)`.
    fn next_tokens(&mut self) -> Result<(usize, Vec<&'a str>)> {
        for (i, raw) in self.inner.by_ref() {
            self.last = i + 1;
            let content = raw.split('#').next().unwrap_or("");
            let tokens: Vec<&str> = content.split_whitespace().collect();
            if !tokens.is_empty() {
                return Ok((i + 1, tokens));
            }
        }
        Err(Error::Parse {
            line: self.last + 1,
            message: "unexpected end of file".into(),
        })
    }

    fn section(&mut self, tag: &str) -> Result<usize> {
        let (line, tok) = self.next_tokens()?;
        if tok.len() != 2 || tok[0] != tag {
            return Err(Error::Parse {
                line,
                message: format!("expected `{tag} <count>`"),
            });
        }
        parse_num(tok[1], line)
    }
}

fn parse_num<T: std::str::FromStr>(tok: &str, line: usize) -> Result<T> {
    tok.parse().map_err(|_| Error::Parse {
        line,
        message: format!("cannot parse `{tok}`"),
    })
}

pub fn parse(text: &str) -> Result<SurfaceMesh> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
        last: 0,
    };
    let (line, header) = lines.next_tokens()?;
    if header.len() != 4 || header[0] != "SMESH" || header[1] != "v1" {
        return Err(Error::Parse {
            line,
            message: "expected header `SMESH v1 <EMB|PARAM> <dim>`".into(),
        });
    }
    let kind = header[2];
    let dim: usize = parse_num(header[3], line)?;
    let per_vertex = match kind {
        "EMB" if dim >= 2 => dim,
        "EMB" => {
            return Err(Error::Parse {
                line,
                message: format!("embedding dimension must be at least 2, got {dim}"),
            })
        }
        "PARAM" => 3,
        other => {
            return Err(Error::Parse {
                line,
                message: format!("unknown geometry kind `{other}`"),
            })
        }
    };

    let nv = lines.section("V")?;
    let mut values = Vec::with_capacity(nv * per_vertex);
    for _ in 0..nv {
        let (line, tok) = lines.next_tokens()?;
        if tok.len() != per_vertex {
            return Err(Error::Parse {
                line,
                message: format!("expected {per_vertex} values per vertex, found {}", tok.len()),
            });
        }
        for t in tok {
            values.push(parse_num::<f64>(t, line)?);
        }
    }

    let nf = lines.section("F")?;
    let mut triangles = Vec::with_capacity(nf);
    for _ in 0..nf {
        let (line, tok) = lines.next_tokens()?;
        if tok.len() != 3 {
            return Err(Error::Parse {
                line,
                message: "expected three vertex indices".into(),
            });
        }
        let mut t = [0usize; 3];
        for (k, s) in tok.iter().enumerate() {
            t[k] = parse_num(s, line)?;
            if t[k] >= nv {
                return Err(Error::Parse {
                    line,
                    message: format!("vertex index {} out of range (V = {nv})", t[k]),
                });
            }
        }
        triangles.push(t);
    }

    let nb = lines.section("B")?;
    let mut loops = Vec::with_capacity(nb);
    for _ in 0..nb {
        let (line, tok) = lines.next_tokens()?;
        let mut l = Vec::with_capacity(tok.len());
        for s in tok {
            let v: usize = parse_num(s, line)?;
            if v >= nv {
                return Err(Error::Parse {
                    line,
                    message: format!("vertex index {v} out of range (V = {nv})"),
                });
            }
            l.push(v);
        }
        loops.push(l);
    }

    let geometry = if kind == "EMB" {
        Geometry::Embedding { dim, coords: values }
    } else {
        let params = values.chunks(3).map(|c| [c[0], c[1]]).collect();
        let factor = values.chunks(3).map(|c| c[2]).collect();
        Geometry::ParamFlat { params, factor }
    };
    SurfaceMesh::with_loops(geometry, triangles, loops)
}
