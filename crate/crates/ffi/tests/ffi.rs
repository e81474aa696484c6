use std::ffi::CStr;
use std::path::PathBuf;
use std::ptr;

use mimo_rfsel_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(mrs_last_error()) }
        .to_string_lossy()
        .into_owned()
}

unsafe fn drawn(users: usize, antennas: usize, seed: u64) -> *mut MrsChannel {
    let mut ch = ptr::null_mut();
    let st = mrs_channel_draw(users, antennas, 3.7, 500.0, 35.0, seed, 0, &mut ch);
    assert_eq!(st, MrsStatus::Ok, "{}", last_error());
    ch
}

#[test]
fn greedy_and_bfs_round_trip() {
    unsafe {
        let ch = drawn(2, 6, 4);
        assert_eq!((mrs_channel_users(ch), mrs_channel_antennas(ch)), (2, 6));
        let mut greedy = ptr::null_mut();
        let mut bfs = ptr::null_mut();
        assert_eq!(
            mrs_select_greedy(ch, 1.0, 0.05, 0, &mut greedy),
            MrsStatus::Ok
        );
        assert_eq!(
            mrs_select_bfs(ch, 1.0, 0.05, 1_000_000, &mut bfs),
            MrsStatus::Ok
        );
        assert!(mrs_selection_rate(bfs) >= mrs_selection_rate(greedy));

        let chains = mrs_selection_chains(greedy);
        let mut subset = vec![0usize; 6];
        let mut len = 0;
        assert_eq!(
            mrs_selection_subset(greedy, subset.as_mut_ptr(), subset.len(), &mut len),
            MrsStatus::Ok
        );
        assert_eq!(len, chains);
        assert!(subset[..len].windows(2).all(|w| w[0] < w[1]));

        let mut powers = [0.0; 2];
        assert_eq!(
            mrs_selection_powers(greedy, powers.as_mut_ptr(), 2, &mut len),
            MrsStatus::Ok
        );
        let total: f64 = powers.iter().sum();
        assert!((total - mrs_selection_p_out(greedy)).abs() < 1e-12);
        assert!(total + chains as f64 * 0.05 <= 1.0 + 1e-9);
        assert!(mrs_selection_eta_sq(greedy) > 0.0);

        mrs_selection_free(greedy);
        mrs_selection_free(bfs);
        mrs_channel_free(ch);
    }
}

#[test]
fn buffer_too_small_reports_length() {
    unsafe {
        let ch = drawn(3, 10, 1);
        let mut sel = ptr::null_mut();
        assert_eq!(
            mrs_select_random(ch, 1.0, 0.05, 7, 9, &mut sel),
            MrsStatus::Ok
        );
        let mut len = 0;
        let mut buf = [0usize; 2];
        assert_eq!(
            mrs_selection_subset(sel, buf.as_mut_ptr(), 2, &mut len),
            MrsStatus::BufferTooSmall
        );
        assert_eq!(len, 7);
        assert!(!last_error().is_empty());
        mrs_selection_free(sel);
        mrs_channel_free(ch);
    }
}

#[test]
fn from_parts_matches_identity_channel() {
    // 2 x 2 identity with unit gains: eta^2 = 2.
    let re = [1.0, 0.0, 0.0, 1.0];
    let im = [0.0; 4];
    unsafe {
        let mut ch = ptr::null_mut();
        let st = mrs_channel_from_parts(2, 2, re.as_ptr(), im.as_ptr(), ptr::null(), 3.7, &mut ch);
        assert_eq!(st, MrsStatus::Ok);
        let mut sel = ptr::null_mut();
        assert_eq!(mrs_select_greedy(ch, 1.0, 0.05, 0, &mut sel), MrsStatus::Ok);
        assert!((mrs_selection_eta_sq(sel) - 2.0).abs() < 1e-12);
        mrs_selection_free(sel);
        mrs_channel_free(ch);
    }
}

#[test]
fn error_codes() {
    unsafe {
        let mut ch = ptr::null_mut();
        assert_eq!(
            mrs_channel_draw(2, 4, 3.7, 500.0, 35.0, 0, 0, ptr::null_mut()),
            MrsStatus::NullPointer
        );
        assert_eq!(
            mrs_channel_draw(0, 4, 3.7, 500.0, 35.0, 0, 0, &mut ch),
            MrsStatus::InvalidArgument
        );
        let ch = drawn(4, 8, 2);
        let mut sel = ptr::null_mut();
        assert_eq!(
            mrs_select_greedy(ch, 0.1, 0.05, 0, &mut sel),
            MrsStatus::Infeasible
        );
        assert!(last_error().contains("p_max"));
        assert_eq!(
            mrs_select_bfs(ch, 1.0, 0.05, 3, &mut sel),
            MrsStatus::Capacity
        );
        assert_eq!(
            mrs_select_greedy(ptr::null(), 1.0, 0.05, 0, &mut sel),
            MrsStatus::NullPointer
        );
        assert!(sel.is_null());
        mrs_channel_free(ch);

        // Two identical columns cannot serve two users.
        let re = [1.0, 1.0, 1.0, 1.0];
        let im = [0.0; 4];
        let mut dup = ptr::null_mut();
        assert_eq!(
            mrs_channel_from_parts(2, 2, re.as_ptr(), im.as_ptr(), ptr::null(), 3.7, &mut dup),
            MrsStatus::Ok
        );
        assert_eq!(
            mrs_select_greedy(dup, 1.0, 0.05, 0, &mut sel),
            MrsStatus::Singular
        );
        mrs_channel_free(dup);

        assert_eq!(
            mrs_status_message(MrsStatus::Capacity as i32),
            mrs_status_message(5)
        );
        assert_eq!(
            CStr::from_ptr(mrs_status_message(99)).to_str().unwrap(),
            "unknown status"
        );
        mrs_channel_free(ptr::null_mut());
        mrs_selection_free(ptr::null_mut());
        mrs_string_free(ptr::null_mut());
    }
}

#[test]
fn analytic_and_waterfill() {
    unsafe {
        let mut s = 0usize;
        assert_eq!(mrs_optimal_rf_count(3, 1.0, 0.05, &mut s), MrsStatus::Ok);
        assert_eq!(s, 12);
        assert_eq!(mrs_optimal_rf_count(10, 4.0, 0.05, &mut s), MrsStatus::Ok);
        assert_eq!(s, 45);
        assert_eq!(
            mrs_optimal_rf_count(10, 0.1, 0.05, &mut s),
            MrsStatus::Infeasible
        );
        let mut r = 0.0;
        assert_eq!(
            mrs_average_sum_rate(45, 10, 4.0, 0.05, &mut r),
            MrsStatus::Ok
        );
        assert!((r - 10.0 * 1.6125f64.log2()).abs() < 1e-12);

        let gains = [1.0, 4.0];
        let mut p = [0.0; 2];
        assert_eq!(
            mrs_waterfill(gains.as_ptr(), 2, 1.0, p.as_mut_ptr()),
            MrsStatus::Ok
        );
        assert!((p[0] - 0.125).abs() < 1e-12 && (p[1] - 0.875).abs() < 1e-12);
        let bad = [1.0, -1.0];
        assert_eq!(
            mrs_waterfill(bad.as_ptr(), 2, 1.0, p.as_mut_ptr()),
            MrsStatus::InvalidArgument
        );
    }
}

#[test]
fn complexity_strings() {
    unsafe {
        let mut s = ptr::null_mut();
        assert_eq!(
            mrs_complexity_estimate(1, 1, 1, MrsComplexityAlgo::Greedy as u32, &mut s),
            MrsStatus::Ok
        );
        assert_eq!(CStr::from_ptr(s).to_str().unwrap(), "2");
        mrs_string_free(s);
        assert_eq!(
            mrs_complexity_estimate(128, 10, 128, MrsComplexityAlgo::Bfs as u32, &mut s),
            MrsStatus::Ok
        );
        assert_eq!(CStr::from_ptr(s).to_bytes().len(), 31);
        mrs_string_free(s);
        assert_eq!(
            mrs_complexity_estimate(4, 2, 4, 7, &mut s),
            MrsStatus::InvalidArgument
        );
    }
}

/// Compiles and runs a small C program against the generated header and the
/// static library.
#[test]
fn c_program_links_against_header() {
    let Some(cc) = ["cc", "gcc", "clang"].into_iter().find(|c| {
        std::process::Command::new(c)
            .arg("--version")
            .output()
            .is_ok_and(|o| o.status.success())
    }) else {
        eprintln!("no C compiler found; skipping");
        return;
    };
    let crate_dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let profile_dir = std::env::current_exe()
        .unwrap()
        .parent()
        .unwrap()
        .parent()
        .unwrap()
        .to_path_buf();
    let lib = profile_dir.join("libmimo_rfsel_ffi.a");
    assert!(lib.exists(), "static library missing at {}", lib.display());
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    std::fs::write(
        &src,
        r#"
#include <stdio.h>
#include "mimo_rfsel.h"
int main(void) {
    size_t s = 0;
    if (mrs_optimal_rf_count(3, 1.0, 0.05, &s) != MRS_STATUS_OK || s != 12) return 1;
    MrsChannel *ch = NULL;
    if (mrs_channel_draw(3, 12, 3.7, 500.0, 35.0, 1, 0, &ch) != MRS_STATUS_OK) return 2;
    MrsSelection *sel = NULL;
    if (mrs_select_greedy(ch, 1.0, 0.05, 0, &sel) != MRS_STATUS_OK) return 3;
    size_t idx[12], len = 0;
    if (mrs_selection_subset(sel, idx, 12, &len) != MRS_STATUS_OK || len != mrs_selection_chains(sel)) return 4;
    printf("%zu %.6f\n", len, mrs_selection_rate(sel));
    mrs_selection_free(sel);
    mrs_channel_free(ch);
    return 0;
}
"#,
    )
    .unwrap();
    let exe = dir.path().join("main");
    let out = std::process::Command::new(cc)
        .arg(&src)
        .arg("-I")
        .arg(crate_dir.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let run = std::process::Command::new(&exe).output().unwrap();
    assert!(run.status.success(), "exit {:?}", run.status.code());
    assert!(!run.stdout.is_empty());
}
