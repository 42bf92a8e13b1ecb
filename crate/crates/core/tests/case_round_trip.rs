use gwflow_core::case_io::{parse_case, print_case, tutorial, CaseConfig, InitialSpec, MeshSpec, PermeabilitySpec, TUTORIALS};
use gwflow_core::fields::{BoundaryKind, KrScheme};
use gwflow_core::mesh::Surface;
use proptest::prelude::*;

fn pos() -> impl Strategy<Value = f64> {
    1e-6f64..1e6
}

fn head() -> impl Strategy<Value = f64> {
    -1e3f64..1e2
}

fn any_boundary() -> impl Strategy<Value = BoundaryKind<f64>> {
    prop_oneof![
        head().prop_map(BoundaryKind::FixedHead),
        [-1e-3f64..1e-3, -1e-3..1e-3, -1e-3..1e-3].prop_map(BoundaryKind::FixedVelocity),
        Just(BoundaryKind::ZeroFlux),
    ]
}

/// A shipped case with every printed number replaced at random.
fn any_case() -> impl Strategy<Value = CaseConfig> {
    let base = (0..TUTORIALS.len()).prop_map(|i| parse_case(TUTORIALS[i].1).unwrap());
    (
        base,
        (pos(), 1.01f64..5.0, 0.0f64..0.2, 0.3f64..0.6),
        (1e-15f64..1e-9, 1.0f64..10.0, any::<u64>(), any::<bool>()),
        (head(), any::<bool>(), prop::collection::vec(any_boundary(), 6)),
        (pos(), 1e-4f64..10.0, prop::collection::vec(0.0f64..1e6, 0..5)),
        (1e-9f64..1e-2, 1usize..40, 0.1f64..1.0, any::<bool>()),
        (1usize..50, 1usize..50, 1usize..50, 0usize..3, 1.0f64..500.0, 0.0f64..0.5),
    )
        .prop_map(|(mut c, vg, perm, ini, time, pic, geo)| {
            c.vg.alpha = vg.0;
            c.vg.n = vg.1;
            c.vg.theta_r = vg.2;
            c.vg.theta_s = vg.3;
            c.permeability = if perm.3 {
                PermeabilitySpec::Uniform(perm.0)
            } else {
                PermeabilitySpec::Random { min: perm.0, max: perm.0 * perm.1, seed: perm.2 }
            };
            c.initial = if ini.1 { InitialSpec::Uniform(ini.0) } else { InitialSpec::Hydrostatic(ini.0) };
            for (b, kind) in c.boundaries.iter_mut().zip(ini.2) {
                b.1 = kind;
            }
            c.time.end = time.0 * 10.0;
            c.time.control.dt_min = time.1 * 1e-3;
            c.time.control.dt_init = time.1;
            c.time.control.dt_max = time.1 * 1e3;
            let mut times = time.2;
            times.sort_by(f64::total_cmp);
            times.dedup();
            times.retain(|&t| t <= c.time.end);
            c.output.times = times;
            c.picard.epsilon = pic.0;
            c.picard.n_max_iter = pic.1;
            c.time.control.n_max_iter = pic.1;
            c.time.control.n_min_iter = c.time.control.n_min_iter.min(pic.1);
            c.picard.relaxation = pic.2;
            c.kr_scheme = if pic.3 { KrScheme::Upwind } else { KrScheme::Arithmetic };
            let (nx, ny, nz, refine, size, amp) = geo;
            c.mesh = match c.mesh {
                MeshSpec::Box { min, .. } => MeshSpec::Box {
                    cells: [nx, ny, nz],
                    min,
                    max: [min[0] + size, min[1] + size / 3.0, min[2] + size / 7.0],
                    refine,
                },
                MeshSpec::Terrain { .. } => MeshSpec::Terrain {
                    cells: [nx, ny, nz],
                    extent: [size, 2.0 * size],
                    surface: Surface::Sine { mean: size / 10.0, amplitude: amp * size / 10.0, wavelength_x: size / 2.0, wavelength_y: size },
                    refine,
                },
                other => other,
            };
            c
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn print_then_parse_is_identity(cfg in any_case()) {
        let text = print_case(&cfg);
        let back = parse_case(&text).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
        prop_assert_eq!(back, cfg);
    }
}

#[test]
fn every_tutorial_is_listed() {
    for (name, _) in TUTORIALS {
        assert!(tutorial(name).is_some());
    }
    assert!(tutorial("missing").is_none());
}
