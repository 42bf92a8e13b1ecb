use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use gwflow_core::driver::build_mesh;
use gwflow_core::mesh::PatchRules;
use gwflow_core::mesh::vtk::{read_vtk_legacy_with_patches, write_vtk};
use gwflow_core::Mesh64;

use crate::run::load_case;

/// "N cells, [I interior face(s), ]B boundary faces" plus one line per patch.
pub fn summary(mesh: &Mesh64) -> String {
    let mut s = format!("{} cells, ", mesh.n_cells());
    match mesh.n_interior_faces() {
        0 => {}
        1 => s.push_str("1 interior face, "),
        n => write!(s, "{n} interior faces, ").unwrap(),
    }
    write!(s, "{} boundary faces", mesh.n_boundary_faces()).unwrap();
    for p in mesh.patches() {
        write!(s, "\n  patch {}: {} faces", p.name, p.len).unwrap();
    }
    s
}

/// Boundary face to patch table, one `face,patch,cx,cy,cz` row per face.
pub fn patch_assignment(mesh: &Mesh64) -> String {
    let mut s = String::from("face,patch,cx,cy,cz\n");
    let centroids = mesh.face_centroids();
    for p in mesh.patches() {
        for f in p.faces() {
            let c = centroids[f];
            writeln!(s, "{f},{},{:e},{:e},{:e}", p.name, c[0], c[1], c[2]).unwrap();
        }
    }
    s
}

pub struct Converted {
    pub mesh: Mesh64,
    pub summary: String,
    pub vtk: PathBuf,
    pub patches: PathBuf,
}

/// Reads a legacy VTK file, assigns boundary patches from the optional
/// sidecar and writes the canonical VTK plus `<out stem>.patches.csv`.
pub fn convert_vtk(input: &Path, sidecar: Option<&Path>, out: &Path) -> Result<Converted> {
    let text = fs::read_to_string(input).with_context(|| format!("cannot read {}", input.display()))?;
    let rules = match sidecar {
        Some(p) => PatchRules::parse(&fs::read_to_string(p).with_context(|| format!("cannot read {}", p.display()))?)
            .with_context(|| format!("in {}", p.display()))?,
        None => PatchRules::default(),
    };
    let grid = read_vtk_legacy_with_patches::<f64>(&text, &rules).with_context(|| format!("in {}", input.display()))?;
    let mesh = grid.mesh;
    let data: Vec<(&str, &[f64])> = grid.cell_data.iter().map(|(n, v)| (n.as_str(), v.as_slice())).collect();
    fs::write(out, write_vtk(&mesh, "converted by gwflow", &data))
        .with_context(|| format!("cannot write {}", out.display()))?;
    let patches = out.with_extension("patches.csv");
    fs::write(&patches, patch_assignment(&mesh)).with_context(|| format!("cannot write {}", patches.display()))?;
    Ok(Converted { summary: summary(&mesh), mesh, vtk: out.to_path_buf(), patches })
}

/// Mesh of a case file, or of a bare `.vtk` file with its boundary in one patch.
pub fn mesh_info(path: &Path, overrides: &[String]) -> Result<String> {
    let mesh: Mesh64 = if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("vtk")) {
        let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        read_vtk_legacy_with_patches(&text, &PatchRules::default())?.mesh
    } else {
        let cfg = load_case(path, overrides)?;
        build_mesh(&cfg.mesh, path.parent().unwrap_or(Path::new(".")))?
    };
    let mut s = summary(&mesh);
    write!(s, "\n  total volume: {:e} m3", mesh.total_volume()).unwrap();
    Ok(s)
}
