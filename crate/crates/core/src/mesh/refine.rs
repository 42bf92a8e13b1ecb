use std::collections::HashMap;

use super::{face_key, CellKind, CellSet, Mesh, MeshError};
use crate::num::{add, scale, zero3, Scalar, Vec3};

// Reference (u, v, w) corner of each VTK hexahedron node.
const HEX_CORNERS: [[usize; 3]; 8] = [
    [0, 0, 0],
    [1, 0, 0],
    [1, 1, 0],
    [0, 1, 0],
    [0, 0, 1],
    [1, 0, 1],
    [1, 1, 1],
    [0, 1, 1],
];

fn local_node(u: usize, v: usize, w: usize) -> usize {
    HEX_CORNERS.iter().position(|c| *c == [u, v, w]).unwrap()
}

struct Refiner<T: Scalar> {
    points: Vec<Vec3<T>>,
    shared: HashMap<[usize; 4], usize>,
}

impl<T: Scalar> Refiner<T> {
    /// Node at the average of `corners` (global ids), created once per set.
    fn midpoint(&mut self, corners: &[usize]) -> usize {
        if corners.len() == 1 {
            return corners[0];
        }
        let key = face_key(corners);
        if let Some(&id) = self.shared.get(&key) {
            return id;
        }
        let mut p = zero3();
        for &c in corners {
            p = add(p, self.points[c]);
        }
        p = scale(p, T::one() / T::from_usize(corners.len()).unwrap());
        self.points.push(p);
        let id = self.points.len() - 1;
        self.shared.insert(key, id);
        id
    }
}

/// Corner sets spanned by lattice index 0, 1 or 2 along one axis.
fn sides(a: usize) -> &'static [usize] {
    match a {
        0 => &[0],
        1 => &[0, 1],
        _ => &[1],
    }
}

fn refine_once<T: Scalar>(mesh: &Mesh<T>) -> Result<Mesh<T>, MeshError> {
    for c in 0..mesh.n_cells() {
        if mesh.cell_kind(c) != CellKind::Hexahedron {
            return Err(MeshError::NotHexahedral(c, mesh.cell_kind(c)));
        }
    }
    let mut r = Refiner { points: mesh.points().to_vec(), shared: HashMap::new() };
    let mut cells = CellSet::new(Vec::new());
    let mut lattice = [[[0usize; 3]; 3]; 3];
    for c in 0..mesh.n_cells() {
        let hex = mesh.cell_nodes(c);
        for (a, plane) in lattice.iter_mut().enumerate() {
            for (b, row) in plane.iter_mut().enumerate() {
                for (d, slot) in row.iter_mut().enumerate() {
                    let mut corners = Vec::with_capacity(8);
                    for &u in sides(a) {
                        for &v in sides(b) {
                            for &w in sides(d) {
                                corners.push(hex[local_node(u, v, w)]);
                            }
                        }
                    }
                    *slot = if corners.len() == 8 {
                        let mut p = zero3();
                        for &n in &corners {
                            p = add(p, r.points[n]);
                        }
                        r.points.push(scale(p, T::one() / T::of(8.0)));
                        r.points.len() - 1
                    } else {
                        r.midpoint(&corners)
                    };
                }
            }
        }
        for w0 in 0..2 {
            for v0 in 0..2 {
                for u0 in 0..2 {
                    let mut child = [0usize; 8];
                    for (k, [u, v, w]) in HEX_CORNERS.iter().enumerate() {
                        child[k] = lattice[u0 + u][v0 + v][w0 + w];
                    }
                    cells.push(CellKind::Hexahedron, &child);
                }
            }
        }
    }

    // Each boundary quad splits into four children that inherit its patch.
    let names: Vec<String> = mesh.patches().iter().map(|p| p.name.clone()).collect();
    let mut child_patch: HashMap<[usize; 4], usize> = HashMap::new();
    for (pi, patch) in mesh.patches().iter().enumerate() {
        for f in patch.faces() {
            let q = mesh.face_nodes(f);
            let at = |r: &mut Refiner<T>, s: usize, t: usize| -> usize {
                let mut corners = Vec::with_capacity(4);
                for &a in sides(s) {
                    for &b in sides(t) {
                        corners.push(match (a, b) {
                            (0, 0) => q[0],
                            (1, 0) => q[1],
                            (1, 1) => q[2],
                            _ => q[3],
                        });
                    }
                }
                r.midpoint(&corners)
            };
            let mut grid = [[0usize; 3]; 3];
            for (s, row) in grid.iter_mut().enumerate() {
                for (t, slot) in row.iter_mut().enumerate() {
                    *slot = at(&mut r, s, t);
                }
            }
            for s in 0..2 {
                for t in 0..2 {
                    let quad = [grid[s][t], grid[s + 1][t], grid[s + 1][t + 1], grid[s][t + 1]];
                    child_patch.insert(face_key(&quad), pi);
                }
            }
        }
    }
    cells.points = r.points;
    Mesh::from_cells(cells, &names, |nodes, _| child_patch[&face_key(nodes)])
}

/// Splits every hexahedron 2x2x2, `levels` times. Boundary faces keep their
/// parent's patch.
pub fn refine_uniform<T: Scalar>(mesh: &Mesh<T>, levels: usize) -> Result<Mesh<T>, MeshError> {
    if levels == 0 {
        return Err(MeshError::ZeroRefinement);
    }
    let mut out = refine_once(mesh)?;
    for _ in 1..levels {
        out = refine_once(&out)?;
    }
    Ok(out)
}
