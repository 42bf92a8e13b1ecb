//! Legacy-VTK (ASCII) unstructured grid reader and writer.

use std::fmt::Write as _;

use super::patches::PatchRules;
use super::{CellKind, CellSet, Mesh, MeshError};
use crate::num::Scalar;

/// Mesh plus the `CELL_DATA` scalar arrays found in the file.
#[derive(Clone, Debug)]
pub struct VtkGrid<T: Scalar> {
    pub mesh: Mesh<T>,
    pub cell_data: Vec<(String, Vec<T>)>,
}

struct Tokens<'a> {
    toks: Vec<(usize, &'a str)>,
    pos: usize,
    last_line: usize,
}

impl<'a> Tokens<'a> {
    fn next(&mut self) -> Result<(usize, &'a str), MeshError> {
        match self.toks.get(self.pos) {
            Some(&t) => {
                self.pos += 1;
                Ok(t)
            }
            None => Err(MeshError::Parse { line: self.last_line, msg: "unexpected end of file".into() }),
        }
    }

    fn peek(&self) -> Option<(usize, &'a str)> {
        self.toks.get(self.pos).copied()
    }

    fn parse<V: std::str::FromStr>(&mut self, what: &str) -> Result<V, MeshError> {
        let (line, tok) = self.next()?;
        tok.parse()
            .map_err(|_| MeshError::Parse { line, msg: format!("expected {what}, got '{tok}'") })
    }

    fn expect(&mut self, word: &str) -> Result<usize, MeshError> {
        let (line, tok) = self.next()?;
        if tok.eq_ignore_ascii_case(word) {
            Ok(line)
        } else {
            Err(MeshError::Parse { line, msg: format!("expected '{word}', got '{tok}'") })
        }
    }
}

fn perr(line: usize, msg: impl Into<String>) -> MeshError {
    MeshError::Parse { line, msg: msg.into() }
}

/// Reads an ASCII legacy-VTK unstructured grid. All boundary faces go to a
/// single patch named `boundary`.
pub fn read_vtk_legacy<T: Scalar>(text: &str) -> Result<VtkGrid<T>, MeshError> {
    read_vtk_legacy_with_patches(text, &PatchRules::default())
}

/// Like [`read_vtk_legacy`], assigning boundary faces with `rules`.
pub fn read_vtk_legacy_with_patches<T: Scalar>(
    text: &str,
    rules: &PatchRules,
) -> Result<VtkGrid<T>, MeshError> {
    let lines: Vec<&str> = text.lines().collect();
    if lines.len() < 4 {
        return Err(perr(lines.len().max(1), "truncated header"));
    }
    if !lines[0].trim_start().starts_with("# vtk DataFile Version") {
        return Err(perr(1, "missing '# vtk DataFile Version' line"));
    }
    if !lines[2].trim().eq_ignore_ascii_case("ASCII") {
        return Err(perr(3, format!("only ASCII files are supported, got '{}'", lines[2].trim())));
    }
    let mut toks = Tokens { toks: Vec::new(), pos: 0, last_line: lines.len() };
    for (i, line) in lines.iter().enumerate().skip(3) {
        for t in line.split_whitespace() {
            toks.toks.push((i + 1, t));
        }
    }
    toks.expect("DATASET")?;
    let (line, kind) = toks.next()?;
    if !kind.eq_ignore_ascii_case("UNSTRUCTURED_GRID") {
        return Err(perr(line, format!("unsupported dataset '{kind}'")));
    }

    let mut points: Option<Vec<[T; 3]>> = None;
    let mut cells: Option<(usize, Vec<usize>, Vec<usize>)> = None;
    let mut types: Option<Vec<CellKind>> = None;
    let mut cell_data = Vec::new();

    while let Some((line, word)) = toks.peek() {
        toks.pos += 1;
        match word.to_ascii_uppercase().as_str() {
            "POINTS" => {
                let n: usize = toks.parse("point count")?;
                let (tl, ty) = toks.next()?;
                if !matches!(ty.to_ascii_lowercase().as_str(), "float" | "double") {
                    return Err(perr(tl, format!("unsupported point type '{ty}'")));
                }
                let mut pts = Vec::with_capacity(n);
                for _ in 0..n {
                    let x: f64 = toks.parse("coordinate")?;
                    let y: f64 = toks.parse("coordinate")?;
                    let z: f64 = toks.parse("coordinate")?;
                    pts.push([T::of(x), T::of(y), T::of(z)]);
                }
                points = Some(pts);
            }
            "CELLS" => {
                let n: usize = toks.parse("cell count")?;
                let size: usize = toks.parse("cell list size")?;
                let mut ptr = vec![0];
                let mut nodes = Vec::with_capacity(size.saturating_sub(n));
                let mut consumed = 0;
                for _ in 0..n {
                    let k: usize = toks.parse("node count")?;
                    for _ in 0..k {
                        nodes.push(toks.parse("node index")?);
                    }
                    ptr.push(nodes.len());
                    consumed += k + 1;
                }
                if consumed != size {
                    return Err(perr(line, format!("CELLS declares size {size} but lists {consumed}")));
                }
                cells = Some((n, ptr, nodes));
            }
            "CELL_TYPES" => {
                let n: usize = toks.parse("cell type count")?;
                let mut ts = Vec::with_capacity(n);
                for _ in 0..n {
                    let code: u32 = toks.parse("cell type")?;
                    ts.push(CellKind::from_vtk(code)?);
                }
                types = Some(ts);
            }
            "CELL_DATA" | "POINT_DATA" => {
                let is_cell = word.eq_ignore_ascii_case("CELL_DATA");
                let n: usize = toks.parse("data count")?;
                while let Some((_, w)) = toks.peek() {
                    if !w.eq_ignore_ascii_case("SCALARS") {
                        break;
                    }
                    toks.pos += 1;
                    let (_, name) = toks.next()?;
                    toks.next()?; // data type
                    let mut ncomp = 1usize;
                    if let Some((_, w)) = toks.peek() {
                        if let Ok(k) = w.parse::<usize>() {
                            ncomp = k;
                            toks.pos += 1;
                        }
                    }
                    toks.expect("LOOKUP_TABLE")?;
                    toks.next()?;
                    let mut vals = Vec::with_capacity(n * ncomp);
                    for _ in 0..n * ncomp {
                        let v: f64 = toks.parse("scalar value")?;
                        vals.push(T::of(v));
                    }
                    if is_cell && ncomp == 1 {
                        cell_data.push((name.to_string(), vals));
                    }
                }
            }
            other => return Err(perr(line, format!("unsupported section '{other}'"))),
        }
    }

    let points = points.ok_or_else(|| perr(toks.last_line, "missing POINTS section"))?;
    let (n, ptr, nodes) = cells.ok_or_else(|| perr(toks.last_line, "missing CELLS section"))?;
    let kinds = types.ok_or_else(|| perr(toks.last_line, "missing CELL_TYPES section"))?;
    if kinds.len() != n {
        return Err(perr(
            toks.last_line,
            format!("CELL_TYPES lists {} cells, CELLS lists {n}", kinds.len()),
        ));
    }
    for (name, vals) in &cell_data {
        if vals.len() != n {
            return Err(perr(toks.last_line, format!("CELL_DATA '{name}' has {} values for {n} cells", vals.len())));
        }
    }
    let set = CellSet { points, kinds, node_ptr: ptr, nodes };
    let names = rules.patch_names();
    let mesh = Mesh::from_cells(set, &names, |_, c| rules.assign(&names, c))?;
    Ok(VtkGrid { mesh, cell_data })
}

/// Writes `mesh` as an ASCII legacy-VTK unstructured grid, with optional
/// per-cell scalar arrays. Reals are printed with 17 significant digits.
pub fn write_vtk<T: Scalar>(mesh: &Mesh<T>, title: &str, cell_data: &[(&str, &[T])]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# vtk DataFile Version 3.0");
    let _ = writeln!(out, "{}", title.lines().next().unwrap_or(""));
    let _ = writeln!(out, "ASCII");
    let _ = writeln!(out, "DATASET UNSTRUCTURED_GRID");
    let _ = writeln!(out, "POINTS {} double", mesh.points().len());
    for p in mesh.points() {
        let _ = writeln!(
            out,
            "{:.16e} {:.16e} {:.16e}",
            p[0].to_f64_lossy(),
            p[1].to_f64_lossy(),
            p[2].to_f64_lossy()
        );
    }
    let n = mesh.n_cells();
    let size: usize = (0..n).map(|c| mesh.cell_nodes(c).len() + 1).sum();
    let _ = writeln!(out, "CELLS {n} {size}");
    for c in 0..n {
        let nodes = mesh.cell_nodes(c);
        let _ = write!(out, "{}", nodes.len());
        for id in nodes {
            let _ = write!(out, " {id}");
        }
        out.push('\n');
    }
    let _ = writeln!(out, "CELL_TYPES {n}");
    for c in 0..n {
        let _ = writeln!(out, "{}", mesh.cell_kind(c).vtk_code());
    }
    if !cell_data.is_empty() {
        let _ = writeln!(out, "CELL_DATA {n}");
        for (name, vals) in cell_data {
            assert_eq!(vals.len(), n, "cell data '{name}' has wrong length");
            let _ = writeln!(out, "SCALARS {name} double 1");
            let _ = writeln!(out, "LOOKUP_TABLE default");
            for v in vals.iter() {
                let _ = writeln!(out, "{:.16e}", v.to_f64_lossy());
            }
        }
    }
    out
}
