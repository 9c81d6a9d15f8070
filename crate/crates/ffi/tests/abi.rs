use std::ffi::CStr;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use fairpca_ffi::*;

fn two_groups() -> (Vec<f64>, Vec<usize>) {
    let data = vec![
        3.0, 1.0, 0.2, //
        -2.0, 0.5, 0.1, //
        1.0, -1.0, -0.3, //
        0.5, 0.5, 0.0, //
        3.0, -1.0, 0.2, //
        -2.0, -0.5, 0.1, //
        1.0, 1.0, -0.3, //
        0.5, -0.5, 0.4,
    ];
    (data, vec![0, 0, 0, 0, 1, 1, 1, 1])
}

fn last_error() -> String {
    let p = fpca_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn new_problem(r: usize, alpha: f64) -> (FpcaStatus, *mut FpcaProblem) {
    let (data, ids) = two_groups();
    let mut p = ptr::null_mut();
    let status = unsafe {
        fpca_problem_new(
            data.as_ptr(),
            8,
            3,
            ids.as_ptr(),
            2,
            r,
            FpcaMode::Pairwise,
            FpcaPenalty::Squared,
            alpha,
            &mut p,
        )
    };
    (status, p)
}

#[test]
fn solve_round_trip() {
    let (status, problem) = new_problem(1, -1.0);
    assert_eq!(status, FpcaStatus::Ok);
    unsafe {
        assert_eq!(fpca_problem_objective_count(problem), 2);
        assert!(fpca_problem_alpha(problem) >= 0.0);

        let mut plain = [0.0; 3];
        assert_eq!(fpca_plain_pca(problem, plain.as_mut_ptr(), 3), FpcaStatus::Ok);

        let mut config = fpca_solver_config_default();
        config.max_iters = 300;
        let mut result = ptr::null_mut();
        assert_eq!(fpca_solve(problem, &config, &mut result), FpcaStatus::Ok);
        assert!(fpca_result_iterations(result) >= 1);

        let mut u = [0.0; 3];
        assert_eq!(fpca_result_subspace(result, u.as_mut_ptr(), 3), FpcaStatus::Ok);
        let norm: f64 = u.iter().map(|v| v * v).sum();
        assert!((norm - 1.0).abs() < 1e-9);

        let mut f = [0.0; 2];
        assert_eq!(fpca_result_objectives(result, f.as_mut_ptr(), 2), FpcaStatus::Ok);
        let mut again = [0.0; 2];
        assert_eq!(fpca_problem_evaluate(problem, u.as_ptr(), again.as_mut_ptr(), 2), FpcaStatus::Ok);
        assert!((f[0] - again[0]).abs() <= 1e-9 * f[0].abs().max(1.0));

        fpca_result_free(result);
        fpca_problem_free(problem);
    }
}

#[test]
fn errors_set_status_and_message() {
    let (status, problem) = new_problem(7, -1.0);
    assert_eq!(status, FpcaStatus::Dimension);
    assert!(problem.is_null());
    assert!(last_error().contains("r = 7"));

    let (status, problem) = new_problem(1, 0.0);
    assert_eq!(status, FpcaStatus::Ok);
    unsafe {
        let mut small = [0.0; 1];
        assert_eq!(
            fpca_problem_evaluate(problem, [1.0, 0.0, 0.0].as_ptr(), small.as_mut_ptr(), 1),
            FpcaStatus::InvalidArgument
        );
        assert!(last_error().contains("need 2"));
        assert_eq!(fpca_plain_pca(problem, ptr::null_mut(), 3), FpcaStatus::NullPointer);

        let mut config = fpca_solver_config_default();
        config.max_iters = 0;
        let mut result = ptr::null_mut();
        assert_eq!(fpca_solve(problem, &config, &mut result), FpcaStatus::Config);
        assert!(result.is_null());
        fpca_problem_free(problem);

        assert_eq!(fpca_solve(ptr::null(), ptr::null(), &mut result), FpcaStatus::NullPointer);
        assert_eq!(fpca_problem_objective_count(ptr::null()), 0);
        assert!(fpca_problem_alpha(ptr::null()).is_nan());
        fpca_problem_free(ptr::null_mut());
        fpca_result_free(ptr::null_mut());
    }
}

#[test]
fn empty_group_is_rejected() {
    let (data, _) = two_groups();
    let ids = [0usize; 8];
    let mut p = ptr::null_mut();
    let status = unsafe {
        fpca_problem_new(
            data.as_ptr(),
            8,
            3,
            ids.as_ptr(),
            2,
            1,
            FpcaMode::Single,
            FpcaPenalty::Exponential,
            -1.0,
            &mut p,
        )
    };
    assert_ne!(status, FpcaStatus::Ok);
    assert!(p.is_null());
}

fn target_dir() -> PathBuf {
    // tests run from target/<profile>/deps
    std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn header_compiles_and_links_from_c() {
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR"));
    let lib = target_dir().join("libfairpca_ffi.a");
    assert!(lib.exists(), "static library not built at {}", lib.display());
    let exe = target_dir().join("fairpca_ffi_smoke");
    let cc = Command::new("cc")
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(manifest.join("tests/smoke.c"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .output()
        .expect("C compiler runs");
    assert!(cc.status.success(), "{}", String::from_utf8_lossy(&cc.stderr));
    let run = Command::new(&exe).output().unwrap();
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let stdout = String::from_utf8_lossy(&run.stdout);
    assert!(stdout.starts_with(env!("CARGO_PKG_VERSION")), "{stdout}");
}
