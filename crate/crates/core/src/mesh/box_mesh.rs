use super::{CellKind, CellSet, Mesh, MeshError};
use crate::num::{Scalar, Vec3};

pub(crate) const BOX_PATCHES: [&str; 6] = ["x-", "x+", "y-", "y+", "z-", "z+"];

/// Hexahedral cells on an `(nx+1)(ny+1)(nz+1)` lattice whose node positions
/// come from `node(i, j, k)`. Cells are numbered with `i` fastest.
pub(crate) fn structured_hexes<T: Scalar>(
    nx: usize,
    ny: usize,
    nz: usize,
    mut node: impl FnMut(usize, usize, usize) -> Vec3<T>,
) -> CellSet<T> {
    let id = |i: usize, j: usize, k: usize| i + (nx + 1) * (j + (ny + 1) * k);
    let mut points = Vec::with_capacity((nx + 1) * (ny + 1) * (nz + 1));
    for k in 0..=nz {
        for j in 0..=ny {
            for i in 0..=nx {
                points.push(node(i, j, k));
            }
        }
    }
    let mut cells = CellSet::new(points);
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                cells.push(
                    CellKind::Hexahedron,
                    &[
                        id(i, j, k),
                        id(i + 1, j, k),
                        id(i + 1, j + 1, k),
                        id(i, j + 1, k),
                        id(i, j, k + 1),
                        id(i + 1, j, k + 1),
                        id(i + 1, j + 1, k + 1),
                        id(i, j + 1, k + 1),
                    ],
                );
            }
        }
    }
    cells
}

/// Patch index (into [`BOX_PATCHES`]) of a boundary face of an axis-aligned
/// box, found from which bound its centroid sits on.
pub(crate) fn box_patch<T: Scalar>(centroid: Vec3<T>, lo: Vec3<T>, hi: Vec3<T>) -> usize {
    let mut best = (T::infinity(), 0);
    for axis in 0..3 {
        let tol_scale = hi[axis] - lo[axis];
        for (side, bound) in [lo[axis], hi[axis]].into_iter().enumerate() {
            let d = (centroid[axis] - bound).abs() / tol_scale;
            if d < best.0 {
                best = (d, 2 * axis + side);
            }
        }
    }
    best.1
}

/// Axis-aligned hexahedral box with patches `x-, x+, y-, y+, z-, z+`.
pub fn build_box_mesh<T: Scalar>(
    nx: usize,
    ny: usize,
    nz: usize,
    bounds: [Vec3<T>; 2],
) -> Result<Mesh<T>, MeshError> {
    if nx == 0 || ny == 0 || nz == 0 {
        return Err(MeshError::ZeroCells(nx, ny, nz));
    }
    let [lo, hi] = bounds;
    for (axis, name) in ['x', 'y', 'z'].into_iter().enumerate() {
        if !(hi[axis] > lo[axis]) {
            return Err(MeshError::DegenerateBounds { axis: name });
        }
    }
    let n = [nx, ny, nz];
    let coord = |axis: usize, i: usize| {
        if i == n[axis] {
            hi[axis]
        } else {
            let t = T::from_usize(i).unwrap() / T::from_usize(n[axis]).unwrap();
            lo[axis] + (hi[axis] - lo[axis]) * t
        }
    };
    let cells = structured_hexes(nx, ny, nz, |i, j, k| [coord(0, i), coord(1, j), coord(2, k)]);
    let names: Vec<String> = BOX_PATCHES.iter().map(|s| s.to_string()).collect();
    Mesh::from_cells(cells, &names, |_, c| box_patch(c, lo, hi))
}
