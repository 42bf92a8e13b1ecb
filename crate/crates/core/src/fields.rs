//! Cell fields, boundary conditions and face mobilities.

use rayon::prelude::*;
use thiserror::Error;

use crate::constitutive::{FluidProps, VanGenuchten};
use crate::mesh::Mesh;
use crate::num::{dot, Scalar, Vec3};

#[derive(Debug, Error, PartialEq)]
pub enum FieldError {
    #[error("field '{name}' has {got} values, mesh has {expected} cells")]
    WrongLength { name: String, got: usize, expected: usize },
    #[error("field '{name}' has non-finite value at cell {cell}")]
    NonFinite { name: String, cell: usize },
    #[error("patch '{0}' has no boundary condition")]
    UncoveredPatch(String),
    #[error("patch '{0}' has more than one boundary condition")]
    DuplicatePatch(String),
    #[error("boundary condition for unknown patch '{0}'")]
    UnknownPatch(String),
    #[error("patch '{0}': velocity must be finite")]
    NonFiniteVelocity(String),
    #[error("cannot impose normal velocity {velocity:e} m/s through a face with zero mobility")]
    ImpermeableFace { velocity: f64 },
}

/// One scalar per cell.
#[derive(Clone, Debug, PartialEq)]
pub struct CellField<T> {
    pub name: String,
    pub values: Vec<T>,
}

impl<T: Scalar> CellField<T> {
    pub fn new(name: &str, values: Vec<T>, n_cells: usize) -> Result<Self, FieldError> {
        if values.len() != n_cells {
            return Err(FieldError::WrongLength { name: name.into(), got: values.len(), expected: n_cells });
        }
        if let Some(cell) = values.iter().position(|v| !v.is_finite()) {
            return Err(FieldError::NonFinite { name: name.into(), cell });
        }
        Ok(CellField { name: name.into(), values })
    }

    pub fn uniform(name: &str, value: T, n_cells: usize) -> Self {
        CellField { name: name.into(), values: vec![value; n_cells] }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BoundaryKind<T> {
    /// Prescribed pressure head, m.
    FixedHead(T),
    /// Prescribed Darcy velocity, m/s.
    FixedVelocity(Vec3<T>),
    ZeroFlux,
}

impl<T: Scalar> BoundaryKind<T> {
    /// Zero flux is a fixed velocity of zero.
    pub fn velocity(&self) -> Option<Vec3<T>> {
        match *self {
            BoundaryKind::FixedVelocity(u) => Some(u),
            BoundaryKind::ZeroFlux => Some([T::zero(); 3]),
            BoundaryKind::FixedHead(_) => None,
        }
    }
}

impl<T: Copy> BoundaryKind<T> {
    pub fn map<U>(self, f: impl Fn(T) -> U) -> BoundaryKind<U> {
        match self {
            BoundaryKind::FixedHead(h) => BoundaryKind::FixedHead(f(h)),
            BoundaryKind::FixedVelocity(u) => BoundaryKind::FixedVelocity(u.map(f)),
            BoundaryKind::ZeroFlux => BoundaryKind::ZeroFlux,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundarySpec<T> {
    pub patch: String,
    pub kind: BoundaryKind<T>,
}

/// Boundary conditions resolved against a mesh: one kind per boundary face.
#[derive(Clone, Debug)]
pub struct BoundarySet<T> {
    first_boundary: usize,
    face_kind: Vec<BoundaryKind<T>>,
}

impl<T: Scalar> BoundarySet<T> {
    pub fn new(mesh: &Mesh<T>, specs: &[BoundarySpec<T>]) -> Result<Self, FieldError> {
        for (i, s) in specs.iter().enumerate() {
            if specs[..i].iter().any(|o| o.patch == s.patch) {
                return Err(FieldError::DuplicatePatch(s.patch.clone()));
            }
            if mesh.patch(&s.patch).is_none() {
                return Err(FieldError::UnknownPatch(s.patch.clone()));
            }
            if let BoundaryKind::FixedVelocity(u) = s.kind {
                if u.iter().any(|c| !c.is_finite()) {
                    return Err(FieldError::NonFiniteVelocity(s.patch.clone()));
                }
            }
        }
        let first_boundary = mesh.n_interior_faces();
        let mut face_kind = vec![BoundaryKind::ZeroFlux; mesh.n_boundary_faces()];
        for p in mesh.patches() {
            let spec = specs
                .iter()
                .find(|s| s.patch == p.name)
                .ok_or_else(|| FieldError::UncoveredPatch(p.name.clone()))?;
            for f in p.faces() {
                face_kind[f - first_boundary] = spec.kind;
            }
        }
        Ok(BoundarySet { first_boundary, face_kind })
    }

    /// Condition on boundary face `f` (global face index).
    #[inline]
    pub fn kind(&self, f: usize) -> &BoundaryKind<T> {
        &self.face_kind[f - self.first_boundary]
    }
}

/// How relative permeability is carried to interior faces.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum KrScheme {
    #[default]
    Arithmetic,
    Upwind,
}

/// Pointwise closures evaluated at a head field.
#[derive(Clone, Debug, PartialEq)]
pub struct SecondaryFields<T> {
    pub theta: Vec<T>,
    pub capacity: Vec<T>,
    pub kr: Vec<T>,
    pub phase_mobility: Vec<T>,
    pub total_mobility: Vec<T>,
}

pub fn update_secondary_fields<T: Scalar>(
    h: &[T],
    permeability: &[T],
    vg: &VanGenuchten<T>,
    fluid: &FluidProps<T>,
) -> SecondaryFields<T> {
    let n = h.len();
    let per_cell: Vec<[T; 5]> = h
        .par_iter()
        .zip(permeability.par_iter())
        .with_min_len(1024)
        .map(|(&hc, &k)| {
            let kr = vg.kr_of_h(hc);
            let phase = k * kr / fluid.mu;
            [vg.theta(hc), vg.capillary_capacity(hc), kr, phase, phase * fluid.rho * fluid.g_mag()]
        })
        .collect();
    let mut out = SecondaryFields {
        theta: Vec::with_capacity(n),
        capacity: Vec::with_capacity(n),
        kr: Vec::with_capacity(n),
        phase_mobility: Vec::with_capacity(n),
        total_mobility: Vec::with_capacity(n),
    };
    for v in per_cell {
        out.theta.push(v[0]);
        out.capacity.push(v[1]);
        out.kr.push(v[2]);
        out.phase_mobility.push(v[3]);
        out.total_mobility.push(v[4]);
    }
    out
}

#[inline]
pub fn harmonic_mean<T: Scalar>(a: T, b: T) -> T {
    if a <= T::zero() || b <= T::zero() {
        T::zero()
    } else {
        T::of(2.0) * a * b / (a + b)
    }
}

/// Total mobility `M_f` (m/s) on every face.
///
/// Interior faces use the harmonic mean of the two cell permeabilities and a
/// `scheme`-interpolated relative permeability. Boundary faces use the cell
/// permeability; fixed-head faces take `kr` at the prescribed head.
#[allow(clippy::too_many_arguments)]
pub fn face_mobility<T: Scalar>(
    mesh: &Mesh<T>,
    bcs: &BoundarySet<T>,
    h: &[T],
    kr: &[T],
    permeability: &[T],
    vg: &VanGenuchten<T>,
    fluid: &FluidProps<T>,
    scheme: KrScheme,
) -> Vec<T> {
    let factor = fluid.conductivity_factor();
    let g_hat = fluid.g_hat();
    let centroids = mesh.cell_centroids();
    let n_int = mesh.n_interior_faces();
    let owner = mesh.owner();
    let neighbor = mesh.neighbor();
    // total head h + z, with z measured against gravity
    let potential = |c: usize| h[c] - dot(g_hat, centroids[c]);
    (0..mesh.n_faces())
        .into_par_iter()
        .with_min_len(1024)
        .map(|f| {
            let o = owner[f];
            if f < n_int {
                let nb = neighbor[f];
                let k_f = harmonic_mean(permeability[o], permeability[nb]);
                let kr_f = match scheme {
                    KrScheme::Arithmetic => T::of(0.5) * (kr[o] + kr[nb]),
                    KrScheme::Upwind => {
                        if potential(o) >= potential(nb) {
                            kr[o]
                        } else {
                            kr[nb]
                        }
                    }
                };
                k_f * kr_f * factor
            } else {
                let kr_f = match *bcs.kind(f) {
                    BoundaryKind::FixedHead(hb) => vg.kr_of_h(hb),
                    _ => kr[o],
                };
                permeability[o] * kr_f * factor
            }
        })
        .collect()
}

/// Normal head gradient `∂h/∂n` that makes the Darcy flux `-M∇h + M ĝ`
/// through a face with unit normal `normal` equal `velocity · normal`.
pub fn boundary_head_gradient<T: Scalar>(
    velocity: Vec3<T>,
    normal: Vec3<T>,
    mobility: T,
    fluid: &FluidProps<T>,
) -> Result<T, FieldError> {
    let un = dot(velocity, normal);
    let gn = dot(fluid.g_hat(), normal);
    if un == T::zero() {
        return Ok(gn);
    }
    if !(mobility > T::zero()) {
        return Err(FieldError::ImpermeableFace { velocity: un.to_f64_lossy() });
    }
    Ok(gn - un / mobility)
}

/// Flux per unit area through a face given its normal head gradient.
#[inline]
pub fn darcy_normal_flux<T: Scalar>(grad: T, normal: Vec3<T>, mobility: T, fluid: &FluidProps<T>) -> T {
    mobility * (dot(fluid.g_hat(), normal) - grad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_box_mesh;
    use crate::num::{norm, scale};
    use proptest::prelude::*;
    use approx::assert_relative_eq;

    fn unit(v: Vec3<f64>) -> Vec3<f64> {
        scale(v, 1.0 / norm(v))
    }

    fn setup() -> (Mesh<f64>, VanGenuchten<f64>, FluidProps<f64>) {
        let m = build_box_mesh(1, 1, 4, [[0.0, 0.0, -1.0], [0.1, 0.1, 0.0]]).unwrap();
        (m, VanGenuchten::new(3.35, 2.0, 0.102, 0.368).unwrap(), FluidProps::water())
    }

    fn all_zero_flux(m: &Mesh<f64>) -> BoundarySet<f64> {
        let specs: Vec<_> = m
            .patches()
            .iter()
            .map(|p| BoundarySpec { patch: p.name.clone(), kind: BoundaryKind::ZeroFlux })
            .collect();
        BoundarySet::new(m, &specs).unwrap()
    }

    #[test]
    fn uniform_state_gives_uniform_mobility() {
        let (m, vg, w) = setup();
        let bcs = all_zero_flux(&m);
        let h = vec![-0.75; 4];
        let k = vec![9.4e-12; 4];
        let sec = update_secondary_fields(&h, &k, &vg, &w);
        for scheme in [KrScheme::Arithmetic, KrScheme::Upwind] {
            let mf = face_mobility(&m, &bcs, &h, &sec.kr, &k, &vg, &w, scheme);
            for v in mf {
                assert_eq!(v, sec.total_mobility[0]);
            }
        }
    }

    #[test]
    fn harmonic_permeability_on_faces() {
        let (m, vg, w) = setup();
        let bcs = all_zero_flux(&m);
        let h = vec![0.0; 4];
        let k = vec![1e-12, 9e-12, 1e-12, 1e-12];
        let kr = vec![1.0; 4];
        let mf = face_mobility(&m, &bcs, &h, &kr, &k, &vg, &w, KrScheme::Arithmetic);
        let kf = mf[0] / w.conductivity_factor();
        assert!((kf - 1.8e-12).abs() < 1e-24);
        assert!(harmonic_mean(1e-12, 9e-12) >= 1e-12 && harmonic_mean(1e-12, 9e-12) <= 9e-12);
    }

    #[test]
    fn upwind_picks_higher_potential() {
        let (m, vg, w) = setup();
        let bcs = all_zero_flux(&m);
        // face 0 joins cell 0 (bottom) and cell 1; wet bottom pushes water up.
        let h = vec![0.5, -3.0, -3.0, -3.0];
        let k = vec![1e-12; 4];
        let sec = update_secondary_fields(&h, &k, &vg, &w);
        let mf = face_mobility(&m, &bcs, &h, &sec.kr, &k, &vg, &w, KrScheme::Upwind);
        assert_relative_eq!(mf[0], sec.total_mobility[0], max_relative = 1e-14);
        let h = vec![-3.0, 0.5, -3.0, -3.0];
        let sec = update_secondary_fields(&h, &k, &vg, &w);
        let mf = face_mobility(&m, &bcs, &h, &sec.kr, &k, &vg, &w, KrScheme::Upwind);
        assert_relative_eq!(mf[0], sec.total_mobility[1], max_relative = 1e-14);
    }

    #[test]
    fn fixed_head_face_uses_boundary_head() {
        let (m, vg, w) = setup();
        let mut specs: Vec<_> = m
            .patches()
            .iter()
            .map(|p| BoundarySpec { patch: p.name.clone(), kind: BoundaryKind::ZeroFlux })
            .collect();
        specs.iter_mut().find(|s| s.patch == "z+").unwrap().kind = BoundaryKind::FixedHead(-0.75);
        let bcs = BoundarySet::new(&m, &specs).unwrap();
        let h = vec![-10.0; 4];
        let k = vec![9.4e-12; 4];
        let sec = update_secondary_fields(&h, &k, &vg, &w);
        let mf = face_mobility(&m, &bcs, &h, &sec.kr, &k, &vg, &w, KrScheme::Arithmetic);
        let top = m.patch("z+").unwrap().start;
        let expect = 9.4e-12 * vg.kr_of_h(-0.75) * w.conductivity_factor();
        assert!((mf[top] - expect).abs() <= 1e-15 * expect);
    }

    #[test]
    fn boundary_set_validation() {
        let (m, _, _) = setup();
        let spec = |p: &str| BoundarySpec { patch: p.into(), kind: BoundaryKind::<f64>::ZeroFlux };
        let e = BoundarySet::new(&m, &[spec("z+")]).unwrap_err();
        assert!(matches!(e, FieldError::UncoveredPatch(_)));
        let e = BoundarySet::new(&m, &[spec("z+"), spec("z+")]).unwrap_err();
        assert_eq!(e, FieldError::DuplicatePatch("z+".into()));
        let e = BoundarySet::new(&m, &[spec("nowhere")]).unwrap_err();
        assert_eq!(e, FieldError::UnknownPatch("nowhere".into()));
    }

    #[test]
    fn darcy_gradient_examples() {
        let w = FluidProps::<f64>::water();
        let up = [0.0, 0.0, 1.0];
        assert_eq!(boundary_head_gradient([0.0; 3], up, 1e-5, &w).unwrap(), -1.0);
        assert_eq!(BoundaryKind::<f64>::ZeroFlux.velocity(), Some([0.0; 3]));
        let (q, mf) = (2e-6, 5e-5);
        let grad = boundary_head_gradient([0.0, 0.0, -q], up, mf, &w).unwrap();
        assert!((grad - (-1.0 + q / mf)).abs() < 1e-15);
        let flux = darcy_normal_flux(grad, up, mf, &w);
        assert!((flux + q).abs() <= 1e-12 * q);
        assert!(boundary_head_gradient([0.0, 0.0, -q], up, 0.0, &w).is_err());
        assert_eq!(boundary_head_gradient([0.0; 3], up, 0.0, &w).unwrap(), -1.0);
    }

    #[test]
    fn saturated_update() {
        let (_, vg, w) = setup();
        let k = vec![1e-12, 2e-12];
        let sec = update_secondary_fields(&[0.0, 3.0], &k, &vg, &w);
        assert_eq!(sec.theta, vec![0.368; 2]);
        assert_eq!(sec.capacity, vec![0.0; 2]);
        assert_eq!(k, vec![1e-12, 2e-12]);
        let sec = update_secondary_fields(&[-0.75; 3], &[1e-12; 3], &vg, &w);
        for t in sec.theta {
            assert!((t - 0.20037).abs() < 5e-6);
        }
    }

    #[test]
    fn cell_field_validation() {
        assert!(CellField::new("h", vec![0.0; 3], 4).is_err());
        assert!(CellField::new("h", vec![0.0, f64::NAN], 2).is_err());
        assert_eq!(CellField::uniform("h", 1.0, 3).len(), 3);
    }

    proptest! {
        #[test]
        fn imposed_flux_is_reproduced(
            u in prop::array::uniform3(-1e-4f64..1e-4),
            n in prop::array::uniform3(-1.0f64..1.0),
            mf in 1e-9f64..1e-3,
        ) {
            prop_assume!(norm(n) > 1e-3);
            let n = unit(n);
            let w = FluidProps::<f64>::water();
            let grad = boundary_head_gradient(u, n, mf, &w).unwrap();
            let un = dot(u, n);
            let flux = darcy_normal_flux(grad, n, mf, &w);
            // The gradient form subtracts the gravity flux back out, so the
            // rounding floor scales with the larger of the two fluxes.
            let scale = un.abs().max(mf * dot(w.g_hat(), n).abs());
            prop_assert!((flux - un).abs() <= 1e-12 * scale);
        }

        #[test]
        fn harmonic_mean_bounded(a in 1e-15f64..1e-9, b in 1e-15f64..1e-9) {
            let hm = harmonic_mean(a, b);
            prop_assert!(hm >= a.min(b) * (1.0 - 1e-15) && hm <= a.max(b) * (1.0 + 1e-15));
        }
    }
}
