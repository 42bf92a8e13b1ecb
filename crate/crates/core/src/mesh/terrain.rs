use std::f64::consts::PI;

use super::box_mesh::structured_hexes;
use super::{Mesh, MeshError};
use crate::num::Scalar;

/// Surface elevation above the base plane `z = 0`.
#[derive(Clone, Debug, PartialEq)]
pub enum Surface {
    Flat { height: f64 },
    /// `mean + amplitude/2 * (sin(2πx/λx) + sin(2πy/λy))`
    Sine { mean: f64, amplitude: f64, wavelength_x: f64, wavelength_y: f64 },
}

impl Surface {
    pub fn height(&self, x: f64, y: f64) -> f64 {
        match *self {
            Surface::Flat { height } => height,
            Surface::Sine { mean, amplitude, wavelength_x, wavelength_y } => {
                mean + 0.5
                    * amplitude
                    * ((2.0 * PI * x / wavelength_x).sin() + (2.0 * PI * y / wavelength_y).sin())
            }
        }
    }
}

pub(crate) const TERRAIN_PATCHES: [&str; 6] = ["x-", "x+", "y-", "y+", "z-", "top"];

/// Columnar hexahedral mesh over `[0, lx] x [0, ly]` between the base plane
/// and `surface`, with nodes spaced uniformly along each column.
pub fn synth_terrain_mesh<T: Scalar>(
    nx: usize,
    ny: usize,
    nz: usize,
    extent: [f64; 2],
    surface: &Surface,
) -> Result<Mesh<T>, MeshError> {
    if nx == 0 || ny == 0 || nz == 0 {
        return Err(MeshError::ZeroCells(nx, ny, nz));
    }
    for (axis, &e) in ['x', 'y'].iter().zip(&extent) {
        if !(e > 0.0) {
            return Err(MeshError::DegenerateBounds { axis: *axis });
        }
    }
    let xs: Vec<f64> = (0..=nx).map(|i| extent[0] * i as f64 / nx as f64).collect();
    let ys: Vec<f64> = (0..=ny).map(|j| extent[1] * j as f64 / ny as f64).collect();
    let mut top = vec![0.0; (nx + 1) * (ny + 1)];
    for j in 0..=ny {
        for i in 0..=nx {
            let h = surface.height(xs[i], ys[j]);
            if !(h > 0.0) {
                return Err(MeshError::NonPositiveHeight { x: xs[i], y: ys[j], height: h });
            }
            top[i + (nx + 1) * j] = h;
        }
    }
    let cells = structured_hexes(nx, ny, nz, |i, j, k| {
        let h = top[i + (nx + 1) * j];
        let z = if k == nz { h } else { h * k as f64 / nz as f64 };
        [T::of(xs[i]), T::of(ys[j]), T::of(z)]
    });
    let names: Vec<String> = TERRAIN_PATCHES.iter().map(|s| s.to_string()).collect();
    let layer = (nx + 1) * (ny + 1);
    let decode = |id: usize| (id % (nx + 1), (id % layer) / (nx + 1), id / layer);
    Mesh::from_cells(cells, &names, |nodes, _| {
        let ijk: Vec<_> = nodes.iter().map(|&n| decode(n)).collect();
        let all = |f: &dyn Fn(&(usize, usize, usize)) -> bool| ijk.iter().all(f);
        if all(&|p| p.2 == nz) {
            5
        } else if all(&|p| p.2 == 0) {
            4
        } else if all(&|p| p.0 == 0) {
            0
        } else if all(&|p| p.0 == nx) {
            1
        } else if all(&|p| p.1 == 0) {
            2
        } else {
            3
        }
    })
}
