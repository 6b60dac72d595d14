//! Exercises the C ABI from Rust: handle lifecycle, status codes, error
//! messages, determinism, and agreement with the underlying library.

use std::ffi::{c_char, c_int, CStr, CString};
use std::ptr;

use credal_pac_ffi::*;

const GAP_CONFIG: &str = r#"
[domain]
inputs = 2
labels = 2

[hypotheses]
kind = "explicit"
tables = [[0, 1]]

[credal]
vertices = [[0.5, 0.0, 0.0, 0.5], [0.0, 0.5, 0.5, 0.0]]

[training]
mode = "fixed_vertex"
vertex = 0

[campaign]
n = 50
trials = 500
delta = 0.05
eps_grid = [0.25, 0.5, 0.75]
seed = 7
candidate_bound = "realisable_union"
"#;

fn parse(text: &str) -> *mut CpacConfig {
    let c_text = CString::new(text).unwrap();
    let mut config = ptr::null_mut();
    let status = unsafe { cpac_config_parse(c_text.as_ptr(), &mut config) };
    assert_eq!(status, CpacStatus::Ok);
    assert!(!config.is_null());
    config
}

fn take_string(text: *mut c_char) -> String {
    assert!(!text.is_null());
    let owned = unsafe { CStr::from_ptr(text) }.to_str().unwrap().to_owned();
    unsafe { cpac_string_free(text) };
    owned
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(cpac_last_error_message()) }
        .to_str()
        .unwrap()
        .to_owned()
}

#[test]
fn parse_run_report_lifecycle() {
    let config = parse(GAP_CONFIG);

    let mut digest_ptr = ptr::null_mut();
    assert_eq!(
        unsafe { cpac_config_digest(config, &mut digest_ptr) },
        CpacStatus::Ok
    );
    let digest = take_string(digest_ptr);
    assert_eq!(digest.len(), 64);

    let mut report = ptr::null_mut();
    assert_eq!(unsafe { cpac_run(config, &mut report) }, CpacStatus::Ok);

    let mut json_ptr = ptr::null_mut();
    assert_eq!(
        unsafe { cpac_report_to_json(report, &mut json_ptr) },
        CpacStatus::Ok
    );
    let json = take_string(json_ptr);
    let value: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(value["config_digest"], digest.as_str());
    assert_eq!(value["mode"], "credal");
    assert_eq!(value["rows"][0]["frequency"], 1.0);

    let mut csv_ptr = ptr::null_mut();
    assert_eq!(
        unsafe { cpac_report_to_csv(report, &mut csv_ptr) },
        CpacStatus::Ok
    );
    let csv = take_string(csv_ptr);
    assert!(csv.starts_with("eps,frequency,std_error,analytic_bound,verdict\n"));

    // The gap instance violates the classical realisable tail.
    let mut violated: c_int = -1;
    assert_eq!(
        unsafe { cpac_report_has_violation(report, &mut violated) },
        CpacStatus::Ok
    );
    assert_eq!(violated, 1);

    unsafe {
        cpac_report_free(report);
        cpac_config_free(config);
    }
}

#[test]
fn reports_are_deterministic_across_handles() {
    let render = || {
        let config = parse(GAP_CONFIG);
        let mut report = ptr::null_mut();
        assert_eq!(unsafe { cpac_run(config, &mut report) }, CpacStatus::Ok);
        let mut json_ptr = ptr::null_mut();
        assert_eq!(
            unsafe { cpac_report_to_json(report, &mut json_ptr) },
            CpacStatus::Ok
        );
        let json = take_string(json_ptr);
        unsafe {
            cpac_report_free(report);
            cpac_config_free(config);
        }
        json
    };
    assert_eq!(render(), render());
}

#[test]
fn seed_override_changes_the_digest_and_report() {
    let config = parse(GAP_CONFIG);
    let mut before = ptr::null_mut();
    unsafe { cpac_config_digest(config, &mut before) };
    let before = take_string(before);

    assert_eq!(
        unsafe { cpac_config_set_seed(config, 12345) },
        CpacStatus::Ok
    );
    let mut after = ptr::null_mut();
    unsafe { cpac_config_digest(config, &mut after) };
    let after = take_string(after);
    assert_ne!(before, after);
    unsafe { cpac_config_free(config) };
}

#[test]
fn parse_errors_set_the_thread_message() {
    let text = CString::new("[domain]\ninputs = 0\nlabels = 2\n").unwrap();
    let mut config = ptr::null_mut();
    let status = unsafe { cpac_config_parse(text.as_ptr(), &mut config) };
    assert_eq!(status, CpacStatus::ParseError);
    assert!(config.is_null());
    assert!(!last_error().is_empty());
}

#[test]
fn null_pointers_are_rejected_not_dereferenced() {
    unsafe {
        let mut out = ptr::null_mut();
        assert_eq!(
            cpac_config_parse(ptr::null(), &mut out),
            CpacStatus::NullPointer
        );
        assert_eq!(cpac_run(ptr::null(), ptr::null_mut()), CpacStatus::NullPointer);
        assert_eq!(
            cpac_report_to_json(ptr::null(), ptr::null_mut()),
            CpacStatus::NullPointer
        );
        assert_eq!(
            cpac_eps_finite_realisable(16, 0.05, 100, ptr::null_mut()),
            CpacStatus::NullPointer
        );
        // Free functions tolerate nulls.
        cpac_config_free(ptr::null_mut());
        cpac_report_free(ptr::null_mut());
        cpac_string_free(ptr::null_mut());
    }
}

#[test]
fn bound_helpers_match_the_reference_values() {
    unsafe {
        let mut value = 0.0;
        assert_eq!(
            cpac_eps_finite_realisable(16, 0.05, 100, &mut value),
            CpacStatus::Ok
        );
        assert!((value - 0.0576832).abs() < 1e-6);

        assert_eq!(
            cpac_eps_finite_agnostic(16, 0.05, 100, &mut value),
            CpacStatus::Ok
        );
        assert!((value - 0.359485).abs() < 1e-6);

        assert_eq!(cpac_eps_rademacher(0.1, 0.05, 100, &mut value), CpacStatus::Ok);
        assert!((value - 0.671620).abs() < 1e-6);

        assert_eq!(cpac_gn_tail(100, 0.1, &mut value), CpacStatus::Ok);
        assert!((value - (-2.0f64).exp()).abs() < 1e-9);

        assert_eq!(
            cpac_hoeffding_tail_uniform(100, 0.1, 1.0, &mut value),
            CpacStatus::Ok
        );
        assert!((value - (-2.0f64).exp()).abs() < 1e-9);

        // Domain errors surface as InvalidArgument with a message.
        assert_eq!(
            cpac_eps_finite_realisable(16, 1.5, 100, &mut value),
            CpacStatus::InvalidArgument
        );
        assert!(last_error().contains("delta"));
    }
}

#[test]
fn realisability_json_reports_the_gap_instance() {
    let config = parse(GAP_CONFIG);
    let mut out = ptr::null_mut();
    assert_eq!(
        unsafe { cpac_check_realisability_json(config, 1e-9, &mut out) },
        CpacStatus::Ok
    );
    let value: serde_json::Value = serde_json::from_str(&take_string(out)).unwrap();
    assert_eq!(value["credal_realisable"], true);
    assert_eq!(value["uniform_credal_realisable"], false);
    unsafe { cpac_config_free(config) };
}

#[test]
fn header_declares_exactly_the_exported_symbols() {
    let source = include_str!("../src/lib.rs");
    let header = include_str!("../include/credal_pac.h");

    // Exported symbols: every fn following a #[no_mangle] attribute.
    let mut exported = Vec::new();
    let mut pending = false;
    for line in source.lines() {
        let line = line.trim();
        if line.starts_with("#[no_mangle]") {
            pending = true;
        } else if pending && line.contains("fn ") {
            let after_fn = line.split("fn ").nth(1).unwrap();
            let name: String = after_fn
                .chars()
                .take_while(|c| c.is_alphanumeric() || *c == '_')
                .collect();
            exported.push(name);
            pending = false;
        }
    }
    exported.sort();
    assert!(!exported.is_empty());

    // Declared symbols: cpac_* identifiers followed by '(' in the header.
    let mut declared = Vec::new();
    for (index, _) in header.match_indices("cpac_") {
        let rest = &header[index..];
        let name: String = rest
            .chars()
            .take_while(|c| c.is_alphanumeric() || *c == '_')
            .collect();
        let after = &rest[name.len()..];
        if after.starts_with('(') && !name.ends_with("_h") {
            declared.push(name);
        }
    }
    declared.sort();
    declared.dedup();
    // Type names (cpac_status, cpac_config, cpac_report) never precede
    // '(' in the header, so what remains are the function declarations.
    assert_eq!(
        exported, declared,
        "header and exported symbols out of sync"
    );
}
