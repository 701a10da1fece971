use rmhd_sonic_ffi::*;
use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr::null_mut;

fn last_error() -> String {
    let p = rmhd_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

unsafe fn small_config() -> *mut RmhdConfig {
    let mut cfg = null_mut();
    assert_eq!(rmhd_config_canonical(&mut cfg), RmhdStatus::Ok);
    assert_eq!(rmhd_config_set_grid(cfg, 33, 33), RmhdStatus::Ok);
    cfg
}

#[test]
fn table_round_trip() {
    unsafe {
        let cfg = small_config();
        let mut table = null_mut();
        assert_eq!(rmhd_table_build(cfg, &mut table), RmhdStatus::Ok);
        let mut st = RmhdState::default();
        assert_eq!(rmhd_table_state(table, 0.2, &mut st), RmhdStatus::Ok);
        assert!((st.mach - 1.0 / (1.0f64 - 0.04).sqrt()).abs() < 1e-10);
        let (mut rho_star, mut b) = (0.0, 0.0);
        assert_eq!(rmhd_table_sonic(table, &mut rho_star, &mut b), RmhdStatus::Ok);
        assert!(st.rho < rho_star);
        assert_eq!(rmhd_table_state(table, 0.9, &mut st), RmhdStatus::Numerical);
        assert!(last_error().contains("outside the table range"));
        rmhd_table_free(table);
        rmhd_config_free(cfg);
    }
}

#[test]
fn null_handles_and_bad_arguments_are_reported() {
    unsafe {
        let mut st = RmhdState::default();
        assert_eq!(rmhd_table_state(std::ptr::null(), 0.1, &mut st), RmhdStatus::NullPointer);
        assert!(last_error().contains("null"));
        rmhd_clear_error();
        assert!(rmhd_last_error().is_null());

        let mut cfg = null_mut();
        let bad = CString::new("seed = 1\n").unwrap();
        assert_eq!(rmhd_config_from_toml(bad.as_ptr(), &mut cfg), RmhdStatus::Config);
        assert!(cfg.is_null());

        let cfg = small_config();
        assert_eq!(rmhd_config_set_grid(cfg, 1, 33), RmhdStatus::Config);
        assert_eq!(rmhd_config_set_kappa0(cfg, -1.0), RmhdStatus::Config);
        rmhd_config_free(cfg);
        // Freeing null is a no-op.
        rmhd_config_free(null_mut());
        rmhd_solution_free(null_mut());
    }
}

#[test]
fn toml_configuration_is_accepted() {
    let text = CString::new(include_str!("../../core/configs/canonical.toml")).unwrap();
    unsafe {
        let mut cfg = null_mut();
        assert_eq!(rmhd_config_from_toml(text.as_ptr(), &mut cfg), RmhdStatus::Ok);
        rmhd_config_free(cfg);
    }
}

#[test]
fn solve_recover_invert_verify() {
    unsafe {
        let cfg = small_config();
        let mut sol = null_mut();
        assert_eq!(rmhd_solve(cfg, &mut sol), RmhdStatus::Ok, "{}", last_error());
        let mut info = RmhdSolveInfo::default();
        assert_eq!(rmhd_solution_info(sol, &mut info), RmhdStatus::Ok);
        assert_eq!((info.n_v, info.n_chi), (33, 33));
        assert!(info.iterations > 3 && info.ratio_fit < 0.7);

        // Sonic line: W = -a0^, Z = a0^, so W + Z vanishes.
        let (mut w, mut z) = (0.0, 0.0);
        assert_eq!(rmhd_solution_wz(sol, 0.0, info.r2 - 0.5 * info.delta, &mut w, &mut z), RmhdStatus::Ok);
        assert!((w + z).abs() < 1e-12 && z != 0.0, "{w} {z}");

        let mut rows = 0;
        assert_eq!(rmhd_solution_field(sol, null_mut(), 0, &mut rows), RmhdStatus::BufferTooSmall);
        assert_eq!(rows, 33 * 33);
        let mut buf = vec![0.0; 4 * rows];
        assert_eq!(rmhd_solution_field(sol, buf.as_mut_ptr(), rows, &mut rows), RmhdStatus::Ok);
        assert!(buf.iter().all(|v| v.is_finite()));

        let mut recs = vec![RmhdRecord::default(); 25];
        let mut n = 0;
        assert_eq!(rmhd_solution_recover(sol, 5, 5, recs.as_mut_ptr(), recs.len(), &mut n), RmhdStatus::Ok);
        assert_eq!(n, 25);
        let p = recs.iter().find(|p| p.t > 0.3 * info.t0).unwrap();
        let (mut t, mut r) = (0.0, 0.0);
        assert_eq!(rmhd_solution_invert(sol, p.x, p.y, &mut t, &mut r), RmhdStatus::Ok, "{}", last_error());
        assert!((t - p.t).abs() < 1e-8, "{t} vs {}", p.t);
        assert!(p.mach >= 1.0);

        let mut v = [RmhdVerdict::default(); 7];
        assert_eq!(rmhd_solution_verify(sol, v.as_mut_ptr(), 3, &mut n), RmhdStatus::BufferTooSmall);
        assert_eq!(n, 7);
        assert_eq!(rmhd_solution_verify(sol, v.as_mut_ptr(), v.len(), &mut n), RmhdStatus::Ok, "{}", last_error());
        assert_eq!(v.map(|x| x.criterion), [1, 2, 3, 4, 5, 6, 7]);
        assert!(v.iter().all(|x| x.pass), "{v:?}");
        rmhd_solution_free(sol);
        rmhd_config_free(cfg);
    }
}

#[test]
fn oversized_strip_is_a_solver_error() {
    let text = CString::new(
        RunConfigText::with("[solver]\ndelta = 5.0\nn_v = 17\nn_chi = 17\ntol = 1e-10\nmax_iters = 60\n"),
    )
    .unwrap();
    unsafe {
        let mut cfg = null_mut();
        assert_eq!(rmhd_config_from_toml(text.as_ptr(), &mut cfg), RmhdStatus::Ok, "{}", last_error());
        let mut sol = null_mut();
        assert_eq!(rmhd_solve(cfg, &mut sol), RmhdStatus::Solver);
        assert!(sol.is_null());
        assert!(last_error().contains("halving"));
        rmhd_config_free(cfg);
    }
}

/// The shipped canonical TOML with its `[solver]` table replaced.
struct RunConfigText;

impl RunConfigText {
    fn with(solver: &str) -> String {
        let base = include_str!("../../core/configs/canonical.toml");
        let start = base.find("[solver]").unwrap();
        let end = start + base[start..].find("\n[recovery]").unwrap();
        format!("{}{solver}{}", &base[..start], &base[end..])
    }
}

fn profile_dir() -> PathBuf {
    // target/<profile>/deps/<this test binary>
    std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn header_declares_the_exported_api() {
    let header = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("include/rmhd_sonic.h")).unwrap();
    for name in [
        "rmhd_version",
        "rmhd_last_error",
        "rmhd_config_canonical",
        "rmhd_config_from_toml",
        "rmhd_table_build",
        "rmhd_table_state",
        "rmhd_solve",
        "rmhd_solution_invert",
        "rmhd_solution_recover",
        "rmhd_solution_verify",
        "rmhd_solution_free",
        "typedef struct RmhdSolution RmhdSolution;",
        "RMHD_STATUS_BUFFER_TOO_SMALL = 3",
    ] {
        assert!(header.contains(name), "{name} missing from the header");
    }
}

#[test]
fn c_program_links_against_the_static_library() {
    let lib = profile_dir().join("librmhd_sonic_ffi.a");
    assert!(lib.exists(), "{} not built", lib.display());
    let dir = tempfile::tempdir().unwrap();
    let exe = dir.path().join("smoke");
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR"));
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    let build = Command::new(cc)
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(manifest.join("tests/c/smoke.c"))
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&exe)
        .output()
        .unwrap();
    assert!(build.status.success(), "{}", String::from_utf8_lossy(&build.stderr));
    let run = Command::new(&exe).output().unwrap();
    let out = String::from_utf8_lossy(&run.stdout);
    assert!(run.status.success(), "{out}\n{}", String::from_utf8_lossy(&run.stderr));
    let value = |key: &str| -> String {
        out.lines().find_map(|l| l.strip_prefix(&format!("{key} "))).unwrap_or_else(|| panic!("{key} missing: {out}")).to_owned()
    };
    assert_eq!(value("version"), env!("CARGO_PKG_VERSION"));
    assert!((value("mach").parse::<f64>().unwrap() - 1.0 / (1.0f64 - 0.01).sqrt()).abs() < 1e-10);
    assert!(value("range_error").contains("outside the table range"));
    assert_eq!(value("rows"), (33 * 33).to_string());
    assert!(value("invert_gap").parse::<f64>().unwrap() < 1e-8);
}
