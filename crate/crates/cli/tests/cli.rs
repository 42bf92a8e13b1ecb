use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn gwflow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gwflow")).args(args).env_remove("GWFLOW_THREADS").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn case(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join(format!("../core/cases/{name}.case"))
}

const ONE_HEX: &str = "# vtk DataFile Version 3.0
cube
ASCII
DATASET UNSTRUCTURED_GRID
POINTS 8 float
0 0 0  1 0 0  1 1 0  0 1 0
0 0 1  1 0 1  1 1 1  0 1 1
CELLS 1 9
8 0 1 2 3 4 5 6 7
CELL_TYPES 1
12
";

const TWO_HEX: &str = "# vtk DataFile Version 3.0
two cubes
ASCII
DATASET UNSTRUCTURED_GRID
POINTS 12 double
0 0 0  1 0 0  2 0 0  0 1 0  1 1 0  2 1 0
0 0 1  1 0 1  2 0 1  0 1 1  1 1 1  2 1 1
CELLS 2 18
8 0 1 4 3 6 7 10 9
8 1 2 5 4 7 8 11 10
CELL_TYPES 2
12 12
";

#[test]
fn convert_single_hex_without_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("cube.vtk");
    fs::write(&input, ONE_HEX).unwrap();
    let out = dir.path().join("cube_out.vtk");
    let o = gwflow(&["convert-vtk", input.to_str().unwrap(), out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("1 cells, 6 boundary faces\n  patch boundary: 6 faces"), "{}", stdout(&o));
    let patches = fs::read_to_string(dir.path().join("cube_out.patches.csv")).unwrap();
    assert_eq!(patches.lines().count(), 7);
    assert!(patches.lines().skip(1).all(|l| l.split(',').nth(1) == Some("boundary")));
    let again = gwflow(&["mesh-info", out.to_str().unwrap()]);
    assert!(stdout(&again).starts_with("1 cells, 6 boundary faces"));
}

#[test]
fn convert_two_hexes_with_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("two.vtk");
    fs::write(&input, TWO_HEX).unwrap();
    let sidecar = dir.path().join("two.patches");
    fs::write(&sidecar, "bottom plane axis=z value=0 tol=1e-9\nwalls remaining\n").unwrap();
    let out = dir.path().join("two_out.vtk");
    let o = gwflow(&["convert-vtk", input.to_str().unwrap(), out.to_str().unwrap(), "--patches", sidecar.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let s = stdout(&o);
    assert!(s.starts_with("2 cells, 1 interior face, 10 boundary faces"), "{s}");
    assert!(s.contains("patch bottom: 2 faces") && s.contains("patch walls: 8 faces"), "{s}");
}

#[test]
fn convert_reports_parse_errors() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("bad.vtk");
    fs::write(&input, ONE_HEX.replace("CELL_TYPES 1\n12", "CELL_TYPES 1\n99")).unwrap();
    let o = gwflow(&["convert-vtk", input.to_str().unwrap(), dir.path().join("o.vtk").to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("99"), "{}", stderr(&o));
}

#[test]
fn run_writes_outputs_and_log() {
    let dir = tempfile::tempdir().unwrap();
    let o = gwflow(&["run", case("hydrostatic").to_str().unwrap(), "--output", dir.path().to_str().unwrap(), "--threads", "2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    for f in ["hydrostatic_t0.vtk", "hydrostatic_t3600.vtk", "hydrostatic_t3600_profile.csv"] {
        assert!(dir.path().join(f).exists(), "missing {f}");
    }
    let log = fs::read_to_string(dir.path().join("hydrostatic_log.csv")).unwrap();
    assert_eq!(log.lines().next().unwrap(), "time_s,dt_s,n_picard,residual_m,mass_balance_err");
    assert!(log.lines().count() > 1);
}

#[test]
fn overrides_change_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let o = gwflow(&[
        "run",
        case("hydrostatic").to_str().unwrap(),
        "--output",
        dir.path().to_str().unwrap(),
        "--set",
        "time.end=2 h",
        "--set",
        "output.times=2 h",
        "--set",
        "output.name=longer",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("t = 7200 s"), "{}", stdout(&o));
    assert!(dir.path().join("longer_t7200.vtk").exists());
}

#[test]
fn repeated_minimum_step_failure_exits_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let o = gwflow(&[
        "run",
        case("1Dinfiltration").to_str().unwrap(),
        "--output",
        dir.path().to_str().unwrap(),
        "--set",
        "time.dt_min=1000 s",
        "--set",
        "time.dt_init=1000 s",
        "--set",
        "time.dt_max=10000 s",
    ]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("aborted"), "{}", stderr(&o));
    assert!(dir.path().join("1Dinfiltration_log.csv").exists());
}

#[test]
fn bad_case_names_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(case("hydrostatic")).unwrap().replace("dt_init = 60 s", "dt_init = 60 m");
    let path = dir.path().join("bad.case");
    fs::write(&path, text).unwrap();
    let o = gwflow(&["run", path.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("dt_init") && stderr(&o).contains("line"), "{}", stderr(&o));
}

#[test]
fn validate_and_its_negative_control() {
    let ok = gwflow(&["validate"]);
    assert!(ok.status.success(), "{}", stdout(&ok));
    assert!(stdout(&ok).contains("validation passed"));
    let perturbed = gwflow(&["validate", "--alpha-scale", "1.1"]);
    assert!(!perturbed.status.success());
    assert!(stdout(&perturbed).contains("FAIL"));
}

#[test]
fn bench_single_thread_has_unit_speedup() {
    let o = gwflow(&["bench", case("hydrostatic").to_str().unwrap(), "--threads", "1", "--steps", "3", "--repeats", "3"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let s = stdout(&o);
    let row = s.lines().find(|l| l.starts_with("1,")).unwrap();
    assert_eq!(row.split(',').nth(2), Some("1.000"));
    assert!(stderr(&o).contains("cells per thread"), "small cases warn: {}", stderr(&o));
}

#[test]
fn mesh_info_of_a_case() {
    let o = gwflow(&["mesh-info", case("realCase").to_str().unwrap(), "--set", "mesh.cells=6 12 2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("144 cells, "), "{}", stdout(&o));
}
