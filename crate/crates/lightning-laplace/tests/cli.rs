//! Black-box tests of the `lightning` binary: exit codes, artifact layout,
//! determinism of seeded runs, and the shape of every file the CLI writes.

use serde_json::Value;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::OnceLock;

fn lightning(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_lightning"))
        .args(args)
        .output()
        .expect("failed to launch the binary");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn scratch(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join(name);
    if dir.exists() {
        fs::remove_dir_all(&dir).unwrap();
    }
    fs::create_dir_all(&dir).unwrap();
    dir
}

/// One pentagon demo run shared by the read-only tests below.
fn pentagon_demo() -> &'static PathBuf {
    static CELL: OnceLock<PathBuf> = OnceLock::new();
    CELL.get_or_init(|| {
        let dir = scratch("pentagon-demo");
        let (code, out, err) = lightning(&[
            "demo",
            "pentagon",
            "--tol",
            "1e-4",
            "--out-dir",
            dir.to_str().unwrap(),
        ]);
        assert_eq!(code, 0, "demo failed:\n{out}\n{err}");
        dir
    })
}

fn read(path: &Path) -> String {
    fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn csv_lines(path: &Path) -> Vec<String> {
    read(path).lines().map(str::to_string).collect()
}

fn field(line: &str, idx: usize) -> f64 {
    line.split(',')
        .nth(idx)
        .unwrap_or_else(|| panic!("no field {idx} in {line:?}"))
        .parse()
        .unwrap_or_else(|_| panic!("field {idx} of {line:?} is not a number"))
}

const REPORT_HEADER: &str = "n,N,M,err_sup,err_fine,cond_est,seconds";

#[test]
fn help_succeeds_and_unknown_commands_fail() {
    let (code, stdout, _) = lightning(&["--help"]);
    assert_eq!(code, 0);
    for sub in ["solve", "demo", "eval", "theory"] {
        assert!(stdout.contains(sub), "help does not mention {sub}");
    }
    let (code, _, _) = lightning(&["frobnicate"]);
    assert_eq!(code, 1);
}

#[test]
fn demo_writes_the_full_artifact_set() {
    let dir = pentagon_demo();
    for ext in ["geom.json", "bc.json", "solution.json", "convergence.csv"] {
        assert!(
            dir.join(format!("pentagon.{ext}")).exists(),
            "missing pentagon.{ext}"
        );
    }
    let geom: Value = serde_json::from_str(&read(&dir.join("pentagon.geom.json"))).unwrap();
    assert_eq!(geom["vertices"].as_array().unwrap().len(), 5);
    let lines = csv_lines(&dir.join("pentagon.convergence.csv"));
    assert_eq!(lines[0], REPORT_HEADER);
    assert!(lines.len() >= 2, "empty history");
    let last = lines.last().unwrap();
    assert!(field(last, 3) <= 1e-4, "history never converged: {last}");
}

#[test]
fn seeded_demo_runs_are_reproducible() {
    let run = |dir: &Path| {
        let (code, out, err) = lightning(&[
            "demo",
            "random",
            "--m",
            "6",
            "--seed",
            "1",
            "--tol",
            "1e-4",
            "--out-dir",
            dir.to_str().unwrap(),
        ]);
        assert_eq!(code, 0, "{out}\n{err}");
    };
    let (a, b) = (scratch("hexagon-a"), scratch("hexagon-b"));
    run(&a);
    run(&b);
    for name in ["random.geom.json", "random.bc.json", "random.solution.json"] {
        assert_eq!(
            fs::read(a.join(name)).unwrap(),
            fs::read(b.join(name)).unwrap(),
            "{name} differs between identical runs"
        );
    }
    // Histories match except for the wall-clock column at the end.
    let strip = |p: &Path| -> Vec<String> {
        csv_lines(&p.join("random.convergence.csv"))
            .iter()
            .map(|l| l.rsplit_once(',').unwrap().0.to_string())
            .collect()
    };
    assert_eq!(strip(&a), strip(&b));
}

#[test]
fn solve_rebuilds_the_demo_solution_from_its_artifacts() {
    let demo = pentagon_demo();
    let dir = scratch("resolve");
    let sol = dir.join("sol.json");
    let rep = dir.join("rep.csv");
    let (code, out, err) = lightning(&[
        "solve",
        "--domain",
        demo.join("pentagon.geom.json").to_str().unwrap(),
        "--bc",
        demo.join("pentagon.bc.json").to_str().unwrap(),
        "--tol",
        "1e-4",
        "--out",
        sol.to_str().unwrap(),
        "--report",
        rep.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{out}\n{err}");
    // The geometry and BC files carry the whole problem, so solving from
    // them reproduces the demo's solution byte for byte.
    assert_eq!(
        fs::read(&sol).unwrap(),
        fs::read(demo.join("pentagon.solution.json")).unwrap()
    );
    assert_eq!(csv_lines(&rep)[0], REPORT_HEADER);
}

#[test]
fn flagged_nonconvergence_still_writes_artifacts() {
    let dir = scratch("stuck");
    let geom = dir.join("square.json");
    let bc = dir.join("bc.json");
    fs::write(&geom, r#"{"vertices": [[0,0],[1,0],[1,1],[0,1]]}"#).unwrap();
    fs::write(&bc, r#"{"all": {"randnfun": {"seed": 5, "wavelength": 0.4}}}"#).unwrap();
    let sol = dir.join("sol.json");
    let rep = dir.join("rep.csv");
    let (code, out, err) = lightning(&[
        "solve",
        "--domain",
        geom.to_str().unwrap(),
        "--bc",
        bc.to_str().unwrap(),
        "--tol",
        "1e-14",
        "--max-dofs",
        "120",
        "--out",
        sol.to_str().unwrap(),
        "--report",
        rep.to_str().unwrap(),
    ]);
    assert_eq!(code, 2, "expected the non-convergence code:\n{out}\n{err}");
    assert!(
        read(&sol).contains("\"converged\": false"),
        "solution not flagged"
    );
    assert!(csv_lines(&rep).len() >= 2, "history missing");
}

#[test]
fn malformed_inputs_exit_one_with_diagnostics() {
    let dir = scratch("malformed");
    let geom = dir.join("geom.json");
    let bc = dir.join("bc.json");
    fs::write(&bc, r#"{"all": "1"}"#).unwrap();

    fs::write(&geom, "{\"vertices\": [[0,0],\n[1,0],[1,]]}").unwrap();
    let (code, _, err) = lightning(&[
        "solve",
        "--domain",
        geom.to_str().unwrap(),
        "--bc",
        bc.to_str().unwrap(),
    ]);
    assert_eq!(code, 1);
    assert!(err.contains("line 2"), "no parse position in: {err}");

    fs::write(&geom, r#"{"vertices": [[0,0],[1,0],[1,1],[0,1]]}"#).unwrap();
    fs::write(&bc, r#"{"arcs": ["1", "2"]}"#).unwrap();
    let (code, _, err) = lightning(&[
        "solve",
        "--domain",
        geom.to_str().unwrap(),
        "--bc",
        bc.to_str().unwrap(),
    ]);
    assert_eq!(code, 1);
    assert!(err.contains("4 arcs"), "no field diagnostic in: {err}");

    let (code, _, err) = lightning(&[
        "solve",
        "--domain",
        dir.join("absent.json").to_str().unwrap(),
        "--bc",
        bc.to_str().unwrap(),
    ]);
    assert_eq!(code, 1);
    assert!(!err.is_empty());
}

#[test]
fn eval_grid_masks_to_the_interior() {
    let demo = pentagon_demo();
    let dir = scratch("grid");
    let out = dir.join("grid.csv");
    let (code, stdout, err) = lightning(&[
        "eval",
        "--solution",
        demo.join("pentagon.solution.json").to_str().unwrap(),
        "--grid",
        "40,30",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    assert!(stdout.contains("interior values"), "{stdout}");
    let lines = csv_lines(&out);
    assert_eq!(lines[0], "x,y,u");
    let rows = lines.len() - 1;
    // The pentagon covers only part of its bounding box, so the mask must
    // drop a visible share of the 1200 nodes.
    assert!(rows > 0 && rows < 1200, "suspicious mask: {rows} of 1200 kept");
    for l in &lines[1..] {
        assert_eq!(l.split(',').count(), 3, "bad row {l:?}");
        assert!(field(l, 2).is_finite());
    }
}

#[test]
fn eval_flag_combinations_are_validated() {
    let demo = pentagon_demo();
    let sol = demo.join("pentagon.solution.json");
    let sol = sol.to_str().unwrap();
    let (code, _, err) = lightning(&["eval", "--solution", sol, "--grid", "8,8", "--grad"]);
    assert_eq!(code, 1);
    assert!(err.contains("--points"), "{err}");
    let (code, _, err) = lightning(&["eval", "--solution", sol]);
    assert_eq!(code, 1);
    assert!(err.contains("exactly one"), "{err}");
    let (code, _, err) = lightning(&["eval", "--solution", sol, "--grid", "40"]);
    assert_eq!(code, 1);
    assert!(err.contains("grid"), "{err}");
}

#[test]
fn eval_marks_pole_hits_and_meets_the_throughput_bound() {
    let demo = pentagon_demo();
    let dir = scratch("points");
    let sol_path = demo.join("pentagon.solution.json");
    let sol_json: Value = serde_json::from_str(&read(&sol_path)).unwrap();
    let pole = &sol_json["clusters"][0]["poles"][0];
    let (px, py) = (pole[0].as_f64().unwrap(), pole[1].as_f64().unwrap());

    let geom: Value = serde_json::from_str(&read(&demo.join("pentagon.geom.json"))).unwrap();
    let verts: Vec<(f64, f64)> = geom["vertices"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| (v[0].as_f64().unwrap(), v[1].as_f64().unwrap()))
        .collect();
    let n = verts.len() as f64;
    let (cx, cy) = verts
        .iter()
        .fold((0.0, 0.0), |(x, y), v| (x + v.0 / n, y + v.1 / n));
    let rmax = 0.45
        * verts
            .iter()
            .map(|v| (v.0 - cx).hypot(v.1 - cy))
            .fold(f64::INFINITY, f64::min);

    // A sunflower disk of 10^4 interior points, plus one exactly on a pole.
    let mut csv = String::from("x,y\n");
    csv.push_str(&format!("{px},{py}\n"));
    for i in 0..10_000 {
        let r = rmax * ((i as f64 + 0.5) / 10_000.0).sqrt();
        let th = 2.399963229728653 * i as f64;
        csv.push_str(&format!("{},{}\n", cx + r * th.cos(), cy + r * th.sin()));
    }
    let pts = dir.join("pts.csv");
    fs::write(&pts, csv).unwrap();

    let out = dir.join("vals.csv");
    let (code, stdout, err) = lightning(&[
        "eval",
        "--solution",
        sol_path.to_str().unwrap(),
        "--points",
        pts.to_str().unwrap(),
        "--grad",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    assert!(stdout.contains("evaluated 10001 points"), "{stdout}");
    assert!(stdout.contains(", 1 failed"), "{stdout}");
    let secs: f64 = stdout
        .split(" in ")
        .nth(1)
        .and_then(|s| s.split(" s ").next())
        .unwrap()
        .parse()
        .unwrap();
    assert!(secs <= 1.0, "10^4 evaluations took {secs} s");

    let lines = csv_lines(&out);
    assert_eq!(lines[0], "x,y,u,ux,uy");
    assert_eq!(lines.len(), 10_002);
    assert!(
        lines[1].contains(",error,"),
        "pole row not marked: {}",
        lines[1]
    );
    for l in &lines[2..] {
        assert!(
            field(l, 2).is_finite() && field(l, 3).is_finite() && field(l, 4).is_finite(),
            "bad row {l:?}"
        );
    }
}

#[test]
fn demo_ablation_writes_the_control_history() {
    let dir = scratch("ablation");
    let (code, stdout, err) = lightning(&[
        "demo",
        "lshape",
        "--tol",
        "1e-4",
        "--max-dofs",
        "900",
        "--ablate-shift",
        "0.15",
        "--out-dir",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{stdout}\n{err}");
    assert!(stdout.contains("ablation:"), "{stdout}");
    let main = csv_lines(&dir.join("lshape.convergence.csv"));
    let control = csv_lines(&dir.join("lshape.ablation.csv"));
    assert_eq!(control[0], REPORT_HEADER);
    assert!(control.len() >= 2);
    let a = field(main.last().unwrap(), 3);
    let b = field(control.last().unwrap(), 3);
    assert!(b >= 10.0 * a, "shifted poles fit too well: {b:.3e} vs {a:.3e}");
}

#[test]
fn theory_wedge_writes_a_shrinking_error_table() {
    let dir = scratch("wedge");
    let out = dir.join("wedge.csv");
    let (code, stdout, err) = lightning(&[
        "theory",
        "wedge",
        "--nmax",
        "16",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    assert!(stdout.contains("fit:"), "{stdout}");
    let lines = csv_lines(&out);
    assert_eq!(lines[0], "n,sup_error");
    let ns: Vec<usize> = lines[1..]
        .iter()
        .map(|l| l.split(',').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(ns, vec![4, 9, 16]);
    assert!(
        field(&lines[3], 1) < field(&lines[1], 1),
        "error did not shrink"
    );
}

#[test]
fn theory_levels_exports_the_rectangle_grid() {
    let dir = scratch("levels");
    let out = dir.join("levels.csv");
    let (code, _, err) = lightning(&[
        "theory",
        "levels",
        "--n",
        "6",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    let lines = csv_lines(&out);
    assert_eq!(lines[0], "x,y,log10_abs_phi");
    assert_eq!(lines.len() - 1, 301 * 201);
}

#[test]
fn theory_energy_gradient_check_passes() {
    let (code, stdout, err) = lightning(&["theory", "energy", "--n", "8"]);
    assert_eq!(code, 0, "{err}");
    assert!(stdout.contains("energy ="), "{stdout}");
    assert!(stdout.contains("gradient check passed"), "{stdout}");
}
