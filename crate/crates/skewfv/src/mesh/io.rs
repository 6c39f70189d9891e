//! Plain-text mesh format.
//!
//! ```text
//! VERTICES <n>
//! <index> <x> <y>
//! FACES <m>
//! <v0> <v1> <owner> <neighbour|-1>
//! PATCHES <p>
//! <name>: <face> <face> ...
//! ```
//!
//! Coordinates are written with 17 significant digits so a write/read cycle
//! reproduces every `f64` bit-exactly.

use super::{Face, Mesh, Patch};
use crate::error::{Error, Result};
use crate::geom::Vec2;
use std::fmt::Write as _;

pub fn write_mesh(mesh: &Mesh) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "VERTICES {}", mesh.vertices().len());
    for (i, v) in mesh.vertices().iter().enumerate() {
        let _ = writeln!(out, "{i} {:.16e} {:.16e}", v.x, v.y);
    }
    let _ = writeln!(out, "FACES {}", mesh.n_faces());
    for f in mesh.faces() {
        let nei = f.neighbour.map_or(-1_i64, |n| n as i64);
        let _ = writeln!(out, "{} {} {} {}", f.v0, f.v1, f.owner, nei);
    }
    let _ = writeln!(out, "PATCHES {}", mesh.patches().len());
    for p in mesh.patches() {
        let _ = write!(out, "{}:", p.name);
        for &f in &p.faces {
            let _ = write!(out, " {f}");
        }
        let _ = writeln!(out);
    }
    out
}

pub fn read_mesh(text: &str) -> Result<Mesh> {
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
        .collect();
    let mut pos = 0usize;

    let vcount = section_header(&lines, &mut pos, "VERTICES")?;
    let mut vertices = Vec::new();
    for k in 0..vcount {
        let (ln, line) = next_line(&lines, &mut pos, "vertex")?;
        let mut it = line.split_whitespace();
        let idx: usize = parse_tok(&mut it, ln, "vertex index")?;
        if idx != k {
            return Err(Error::Parse {
                line: ln,
                msg: format!("vertex index {idx}, expected {k}"),
            });
        }
        let x: f64 = parse_tok(&mut it, ln, "x coordinate")?;
        let y: f64 = parse_tok(&mut it, ln, "y coordinate")?;
        if !x.is_finite() || !y.is_finite() {
            return Err(Error::Parse { line: ln, msg: "non-finite coordinate".into() });
        }
        expect_end(&mut it, ln)?;
        vertices.push(Vec2::new(x, y));
    }

    let fcount = section_header(&lines, &mut pos, "FACES")?;
    let mut faces = Vec::new();
    for _ in 0..fcount {
        let (ln, line) = next_line(&lines, &mut pos, "face")?;
        let mut it = line.split_whitespace();
        let v0: usize = parse_tok(&mut it, ln, "v0")?;
        let v1: usize = parse_tok(&mut it, ln, "v1")?;
        let owner: usize = parse_tok(&mut it, ln, "owner")?;
        let nei: i64 = parse_tok(&mut it, ln, "neighbour")?;
        expect_end(&mut it, ln)?;
        let neighbour = match nei {
            -1 => None,
            n if n >= 0 => Some(n as usize),
            _ => {
                return Err(Error::Parse { line: ln, msg: format!("bad neighbour {nei}") });
            }
        };
        faces.push(Face { v0, v1, owner, neighbour });
    }

    let pcount = section_header(&lines, &mut pos, "PATCHES")?;
    let mut patches = Vec::new();
    for _ in 0..pcount {
        let (ln, line) = next_line(&lines, &mut pos, "patch")?;
        let (name, rest) = line.split_once(':').ok_or(Error::Parse {
            line: ln,
            msg: "patch line needs 'name: faces...'".into(),
        })?;
        let mut pf = Vec::new();
        for tok in rest.split_whitespace() {
            let f: usize = tok.parse().map_err(|_| Error::Parse {
                line: ln,
                msg: format!("bad face index {tok:?}"),
            })?;
            pf.push(f);
        }
        patches.push(Patch { name: name.trim().to_string(), faces: pf });
    }
    if pos != lines.len() {
        return Err(Error::Parse {
            line: lines[pos].0,
            msg: "trailing content after PATCHES section".into(),
        });
    }

    Mesh::new(vertices, faces, patches)
}

fn section_header(lines: &[(usize, &str)], pos: &mut usize, name: &str) -> Result<usize> {
    let (ln, line) = next_line(lines, pos, name)?;
    let mut it = line.split_whitespace();
    match it.next() {
        Some(tok) if tok == name => {}
        other => {
            return Err(Error::Parse {
                line: ln,
                msg: format!("expected {name} header, found {other:?}"),
            })
        }
    }
    let count: usize = parse_tok(&mut it, ln, "count")?;
    expect_end(&mut it, ln)?;
    // A count can never exceed the number of remaining lines; this bounds
    // allocations when parsing hostile input.
    if count > lines.len() - *pos {
        return Err(Error::Parse {
            line: ln,
            msg: format!("{name} count {count} exceeds remaining input"),
        });
    }
    Ok(count)
}

fn next_line<'a>(
    lines: &[(usize, &'a str)],
    pos: &mut usize,
    what: &str,
) -> Result<(usize, &'a str)> {
    let &(ln, line) = lines.get(*pos).ok_or(Error::Parse {
        line: lines.last().map_or(0, |l| l.0),
        msg: format!("unexpected end of input, wanted {what}"),
    })?;
    *pos += 1;
    Ok((ln, line))
}

fn parse_tok<'a, T: std::str::FromStr>(
    it: &mut impl Iterator<Item = &'a str>,
    line: usize,
    what: &str,
) -> Result<T> {
    let tok = it.next().ok_or(Error::Parse { line, msg: format!("missing {what}") })?;
    tok.parse().map_err(|_| Error::Parse { line, msg: format!("bad {what}: {tok:?}") })
}

fn expect_end<'a>(it: &mut impl Iterator<Item = &'a str>, line: usize) -> Result<()> {
    match it.next() {
        None => Ok(()),
        Some(tok) => Err(Error::Parse { line, msg: format!("unexpected token {tok:?}") }),
    }
}
