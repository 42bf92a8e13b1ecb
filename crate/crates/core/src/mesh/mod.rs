//! Face-based unstructured mesh used by the finite-volume discretization.
//!
//! Cells are stored with their VTK node ordering; faces are reconstructed
//! from per-kind templates and matched between neighbouring cells by their
//! sorted node sets. Interior faces come first, ordered by `(owner, neighbor)`
//! with `owner < neighbor`, followed by the boundary faces grouped by patch.

mod box_mesh;
mod patches;
mod refine;
mod terrain;
pub mod vtk;

use std::collections::HashMap;

use thiserror::Error;

use crate::num::{add, cross, dot, norm, scale, sub, zero3, Scalar, Vec3};

pub use box_mesh::build_box_mesh;
pub(crate) use box_mesh::BOX_PATCHES;
pub(crate) use terrain::TERRAIN_PATCHES;
pub use patches::{PatchRule, PatchRules, Selector};
pub use refine::refine_uniform;
pub use terrain::{synth_terrain_mesh, Surface};

#[derive(Debug, Error, PartialEq)]
pub enum MeshError {
    #[error("degenerate bounds: zero or negative extent along {axis}")]
    DegenerateBounds { axis: char },
    #[error("cell counts must be at least 1, got {0}x{1}x{2}")]
    ZeroCells(usize, usize, usize),
    #[error("unsupported VTK cell type {0}")]
    UnsupportedCellType(u32),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("cell {cell} references point {point} but only {n_points} points exist")]
    BadPointIndex { cell: usize, point: usize, n_points: usize },
    #[error("cell {cell} has {got} nodes, {kind:?} needs {expected}")]
    WrongNodeCount { cell: usize, kind: CellKind, got: usize, expected: usize },
    #[error("face shared by more than two cells (cells {0}, {1}, {2})")]
    NonManifoldFace(usize, usize, usize),
    #[error("cell {cell} has non-positive volume {volume:e}")]
    NonPositiveVolume { cell: usize, volume: f64 },
    #[error("refinement needs hexahedra only, cell {0} is {1:?}")]
    NotHexahedral(usize, CellKind),
    #[error("refinement levels must be >= 1")]
    ZeroRefinement,
    #[error("surface height {height:e} at ({x}, {y}) is not positive")]
    NonPositiveHeight { x: f64, y: f64, height: f64 },
    #[error("patch rules: line {line}: {msg}")]
    PatchRule { line: usize, msg: String },
}

/// Supported cell shapes and their legacy-VTK type codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CellKind {
    Tetrahedron,
    Hexahedron,
    Wedge,
}

impl CellKind {
    pub fn from_vtk(code: u32) -> Result<Self, MeshError> {
        match code {
            10 => Ok(CellKind::Tetrahedron),
            12 => Ok(CellKind::Hexahedron),
            13 => Ok(CellKind::Wedge),
            other => Err(MeshError::UnsupportedCellType(other)),
        }
    }

    pub fn vtk_code(self) -> u32 {
        match self {
            CellKind::Tetrahedron => 10,
            CellKind::Hexahedron => 12,
            CellKind::Wedge => 13,
        }
    }

    pub fn n_nodes(self) -> usize {
        match self {
            CellKind::Tetrahedron => 4,
            CellKind::Hexahedron => 8,
            CellKind::Wedge => 6,
        }
    }

    /// Local node indices of each face, in VTK node numbering.
    fn face_templates(self) -> &'static [&'static [usize]] {
        match self {
            CellKind::Tetrahedron => &[&[0, 1, 2], &[0, 1, 3], &[1, 2, 3], &[0, 2, 3]],
            CellKind::Hexahedron => &[
                &[0, 3, 2, 1],
                &[4, 5, 6, 7],
                &[0, 1, 5, 4],
                &[1, 2, 6, 5],
                &[2, 3, 7, 6],
                &[3, 0, 4, 7],
            ],
            CellKind::Wedge => &[
                &[0, 1, 2],
                &[3, 4, 5],
                &[0, 1, 4, 3],
                &[1, 2, 5, 4],
                &[2, 0, 3, 5],
            ],
        }
    }
}

/// A named, contiguous range of boundary faces.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Patch {
    pub name: String,
    pub start: usize,
    pub len: usize,
}

impl Patch {
    pub fn faces(&self) -> std::ops::Range<usize> {
        self.start..self.start + self.len
    }
}

/// Immutable mesh topology and geometry.
#[derive(Clone, Debug)]
pub struct Mesh<T: Scalar> {
    points: Vec<Vec3<T>>,
    cell_kinds: Vec<CellKind>,
    cell_node_ptr: Vec<usize>,
    cell_nodes: Vec<usize>,
    face_node_ptr: Vec<usize>,
    face_nodes: Vec<usize>,
    owner: Vec<usize>,
    neighbor: Vec<usize>,
    patches: Vec<Patch>,
    cell_face_ptr: Vec<usize>,
    cell_faces: Vec<usize>,
    cell_centroids: Vec<Vec3<T>>,
    cell_volumes: Vec<T>,
    face_centroids: Vec<Vec3<T>>,
    face_areas: Vec<Vec3<T>>,
}

/// Raw cell description: points plus per-cell kind and node list.
#[derive(Clone, Debug, PartialEq)]
pub struct CellSet<T: Scalar> {
    pub points: Vec<Vec3<T>>,
    pub kinds: Vec<CellKind>,
    pub node_ptr: Vec<usize>,
    pub nodes: Vec<usize>,
}

impl<T: Scalar> CellSet<T> {
    pub fn new(points: Vec<Vec3<T>>) -> Self {
        CellSet { points, kinds: Vec::new(), node_ptr: vec![0], nodes: Vec::new() }
    }

    pub fn push(&mut self, kind: CellKind, nodes: &[usize]) {
        self.kinds.push(kind);
        self.nodes.extend_from_slice(nodes);
        self.node_ptr.push(self.nodes.len());
    }

    pub fn n_cells(&self) -> usize {
        self.kinds.len()
    }

    pub fn cell(&self, c: usize) -> &[usize] {
        &self.nodes[self.node_ptr[c]..self.node_ptr[c + 1]]
    }
}

const NO_NODE: usize = usize::MAX;

fn face_key(nodes: &[usize]) -> [usize; 4] {
    let mut key = [NO_NODE; 4];
    key[..nodes.len()].copy_from_slice(nodes);
    key.sort_unstable();
    key
}

fn polygon_geometry<T: Scalar>(points: &[Vec3<T>], nodes: &[usize]) -> (Vec3<T>, Vec3<T>) {
    if nodes.len() == 3 {
        let (a, b, c) = (points[nodes[0]], points[nodes[1]], points[nodes[2]]);
        let area = scale(cross(sub(b, a), sub(c, a)), T::of(0.5));
        let centroid = scale(add(add(a, b), c), T::one() / T::of(3.0));
        return (centroid, area);
    }
    let n = T::from_usize(nodes.len()).unwrap();
    let mut mid = zero3();
    for &i in nodes {
        mid = add(mid, points[i]);
    }
    mid = scale(mid, T::one() / n);
    let mut area = zero3();
    let mut weighted = zero3();
    let mut weight = T::zero();
    for k in 0..nodes.len() {
        let p = points[nodes[k]];
        let q = points[nodes[(k + 1) % nodes.len()]];
        let tri = scale(cross(sub(p, mid), sub(q, mid)), T::of(0.5));
        let tri_c = scale(add(add(p, q), mid), T::one() / T::of(3.0));
        let mag = norm(tri);
        area = add(area, tri);
        weighted = add(weighted, scale(tri_c, mag));
        weight = weight + mag;
    }
    let centroid = if weight > T::zero() { scale(weighted, T::one() / weight) } else { mid };
    (centroid, area)
}

impl<T: Scalar> Mesh<T> {
    /// Builds the face topology of `cells`. `patch_names` lists the boundary
    /// patches; `assign` maps each boundary face (oriented nodes, centroid) to an
    /// index into `patch_names`. Patches that receive no face are dropped.
    pub fn from_cells<F>(
        cells: CellSet<T>,
        patch_names: &[String],
        mut assign: F,
    ) -> Result<Self, MeshError>
    where
        F: FnMut(&[usize], Vec3<T>) -> usize,
    {
        let CellSet { points, kinds, node_ptr, nodes } = cells;
        let n_cells = kinds.len();
        for c in 0..n_cells {
            let cn = &nodes[node_ptr[c]..node_ptr[c + 1]];
            if cn.len() != kinds[c].n_nodes() {
                return Err(MeshError::WrongNodeCount {
                    cell: c,
                    kind: kinds[c],
                    got: cn.len(),
                    expected: kinds[c].n_nodes(),
                });
            }
            if let Some(&bad) = cn.iter().find(|&&p| p >= points.len()) {
                return Err(MeshError::BadPointIndex { cell: c, point: bad, n_points: points.len() });
            }
        }

        // Every cell face, oriented outward from its cell.
        struct LocalFace {
            cell: usize,
            nodes: [usize; 4],
            len: usize,
        }
        let mut local = Vec::new();
        for c in 0..n_cells {
            let cn = &nodes[node_ptr[c]..node_ptr[c + 1]];
            let mut centre = zero3();
            for &p in cn {
                centre = add(centre, points[p]);
            }
            centre = scale(centre, T::one() / T::from_usize(cn.len()).unwrap());
            for tmpl in kinds[c].face_templates() {
                let mut fnodes = [NO_NODE; 4];
                for (k, &l) in tmpl.iter().enumerate() {
                    fnodes[k] = cn[l];
                }
                let len = tmpl.len();
                let (fc, area) = polygon_geometry(&points, &fnodes[..len]);
                if dot(area, sub(fc, centre)) < T::zero() {
                    fnodes[..len].reverse();
                }
                local.push(LocalFace { cell: c, nodes: fnodes, len });
            }
        }

        let mut seen: HashMap<[usize; 4], usize> = HashMap::with_capacity(local.len());
        let mut partner = vec![NO_NODE; local.len()];
        for (i, lf) in local.iter().enumerate() {
            let key = face_key(&lf.nodes[..lf.len]);
            match seen.get(&key) {
                None => {
                    seen.insert(key, i);
                }
                Some(&j) => {
                    if partner[j] != NO_NODE {
                        return Err(MeshError::NonManifoldFace(
                            local[j].cell,
                            local[partner[j]].cell,
                            lf.cell,
                        ));
                    }
                    partner[j] = i;
                    partner[i] = j;
                }
            }
        }
        drop(seen);

        // Interior faces keep the node order of the lower-indexed (owner) cell.
        let mut interior: Vec<(usize, usize, usize)> = Vec::new();
        let mut boundary: Vec<usize> = Vec::new();
        for (i, lf) in local.iter().enumerate() {
            let j = partner[i];
            if j == NO_NODE {
                boundary.push(i);
            } else if lf.cell < local[j].cell {
                interior.push((lf.cell, local[j].cell, i));
            }
        }
        interior.sort_unstable();

        let mut face_node_ptr = vec![0];
        let mut face_nodes = Vec::with_capacity(4 * (interior.len() + boundary.len()));
        let mut owner = Vec::with_capacity(interior.len() + boundary.len());
        let mut neighbor = Vec::with_capacity(interior.len());
        for &(o, n, i) in &interior {
            face_nodes.extend_from_slice(&local[i].nodes[..local[i].len]);
            face_node_ptr.push(face_nodes.len());
            owner.push(o);
            neighbor.push(n);
        }

        let mut tagged: Vec<(usize, usize)> = boundary
            .iter()
            .map(|&i| {
                let lf = &local[i];
                let (fc, _) = polygon_geometry(&points, &lf.nodes[..lf.len]);
                (assign(&lf.nodes[..lf.len], fc), i)
            })
            .collect();
        tagged.sort_by_key(|&(p, _)| p);
        let mut patches = Vec::new();
        let mut start = interior.len();
        for (pi, name) in patch_names.iter().enumerate() {
            let count = tagged.iter().filter(|&&(p, _)| p == pi).count();
            if count > 0 {
                patches.push(Patch { name: name.clone(), start, len: count });
                start += count;
            }
        }
        for &(_, i) in &tagged {
            face_nodes.extend_from_slice(&local[i].nodes[..local[i].len]);
            face_node_ptr.push(face_nodes.len());
            owner.push(local[i].cell);
        }

        let mut mesh = Mesh {
            points,
            cell_kinds: kinds,
            cell_node_ptr: node_ptr,
            cell_nodes: nodes,
            face_node_ptr,
            face_nodes,
            owner,
            neighbor,
            patches,
            cell_face_ptr: Vec::new(),
            cell_faces: Vec::new(),
            cell_centroids: Vec::new(),
            cell_volumes: Vec::new(),
            face_centroids: Vec::new(),
            face_areas: Vec::new(),
        };
        mesh.build_cell_faces();
        mesh.compute_geometry()?;
        Ok(mesh)
    }

    fn build_cell_faces(&mut self) {
        let n = self.n_cells();
        let mut count = vec![0usize; n + 1];
        for f in 0..self.n_faces() {
            count[self.owner[f] + 1] += 1;
            if f < self.n_interior_faces() {
                count[self.neighbor[f] + 1] += 1;
            }
        }
        for c in 0..n {
            count[c + 1] += count[c];
        }
        let mut fill = count.clone();
        let mut faces = vec![0; count[n]];
        // Face indices are visited in increasing order, so each row ends up sorted.
        for f in 0..self.n_faces() {
            let o = self.owner[f];
            faces[fill[o]] = f;
            fill[o] += 1;
            if f < self.n_interior_faces() {
                let nb = self.neighbor[f];
                faces[fill[nb]] = f;
                fill[nb] += 1;
            }
        }
        for c in 0..n {
            faces[count[c]..count[c + 1]].sort_unstable();
        }
        self.cell_face_ptr = count;
        self.cell_faces = faces;
    }

    fn compute_geometry(&mut self) -> Result<(), MeshError> {
        let nf = self.n_faces();
        let mut fcs = Vec::with_capacity(nf);
        let mut fas = Vec::with_capacity(nf);
        for f in 0..nf {
            let (c, a) = polygon_geometry(&self.points, self.face_nodes(f));
            fcs.push(c);
            fas.push(a);
        }
        self.face_centroids = fcs;
        self.face_areas = fas;

        let n = self.n_cells();
        let mut centroids = Vec::with_capacity(n);
        let mut volumes = Vec::with_capacity(n);
        for c in 0..n {
            let faces = self.cell_faces(c);
            let mut est = zero3();
            for &f in faces {
                est = add(est, self.face_centroids[f]);
            }
            est = scale(est, T::one() / T::from_usize(faces.len()).unwrap());
            let mut vol = T::zero();
            let mut moment = zero3();
            for &f in faces {
                let s = self.outward_area(c, f);
                let fc = self.face_centroids[f];
                let pyr = dot(s, sub(fc, est)) / T::of(3.0);
                let pc = add(scale(fc, T::of(0.75)), scale(est, T::of(0.25)));
                vol = vol + pyr;
                moment = add(moment, scale(pc, pyr));
            }
            if !(vol > T::zero()) {
                return Err(MeshError::NonPositiveVolume { cell: c, volume: vol.to_f64_lossy() });
            }
            centroids.push(scale(moment, T::one() / vol));
            volumes.push(vol);
        }
        self.cell_centroids = centroids;
        self.cell_volumes = volumes;
        Ok(())
    }

    pub fn n_cells(&self) -> usize {
        self.cell_kinds.len()
    }

    pub fn n_faces(&self) -> usize {
        self.owner.len()
    }

    pub fn n_interior_faces(&self) -> usize {
        self.neighbor.len()
    }

    pub fn n_boundary_faces(&self) -> usize {
        self.n_faces() - self.n_interior_faces()
    }

    pub fn points(&self) -> &[Vec3<T>] {
        &self.points
    }

    pub fn cell_kind(&self, c: usize) -> CellKind {
        self.cell_kinds[c]
    }

    pub fn cell_nodes(&self, c: usize) -> &[usize] {
        &self.cell_nodes[self.cell_node_ptr[c]..self.cell_node_ptr[c + 1]]
    }

    pub fn face_nodes(&self, f: usize) -> &[usize] {
        &self.face_nodes[self.face_node_ptr[f]..self.face_node_ptr[f + 1]]
    }

    pub fn owner(&self) -> &[usize] {
        &self.owner
    }

    /// Neighbor cell of each interior face (indexed like the first
    /// `n_interior_faces` faces).
    pub fn neighbor(&self) -> &[usize] {
        &self.neighbor
    }

    pub fn patches(&self) -> &[Patch] {
        &self.patches
    }

    pub fn patch(&self, name: &str) -> Option<&Patch> {
        self.patches.iter().find(|p| p.name == name)
    }

    /// Faces bounding cell `c`, in increasing face index.
    pub fn cell_faces(&self, c: usize) -> &[usize] {
        &self.cell_faces[self.cell_face_ptr[c]..self.cell_face_ptr[c + 1]]
    }

    pub fn cell_centroids(&self) -> &[Vec3<T>] {
        &self.cell_centroids
    }

    pub fn cell_volumes(&self) -> &[T] {
        &self.cell_volumes
    }

    pub fn face_centroids(&self) -> &[Vec3<T>] {
        &self.face_centroids
    }

    /// Face area vectors, pointing out of the owner cell.
    pub fn face_areas(&self) -> &[Vec3<T>] {
        &self.face_areas
    }

    /// Area vector of face `f` pointing out of cell `c`.
    pub fn outward_area(&self, c: usize, f: usize) -> Vec3<T> {
        let s = self.face_areas[f];
        if self.owner[f] == c {
            s
        } else {
            scale(s, -T::one())
        }
    }

    pub fn total_volume(&self) -> T {
        self.cell_volumes.iter().fold(T::zero(), |a, &v| a + v)
    }

    /// Owned copy of the cell description, e.g. for re-export or refinement.
    pub fn cell_set(&self) -> CellSet<T> {
        CellSet {
            points: self.points.clone(),
            kinds: self.cell_kinds.clone(),
            node_ptr: self.cell_node_ptr.clone(),
            nodes: self.cell_nodes.clone(),
        }
    }

    /// Patch name of boundary face `f`, if it is one.
    pub fn patch_of_face(&self, f: usize) -> Option<&Patch> {
        self.patches.iter().find(|p| p.faces().contains(&f))
    }
}
