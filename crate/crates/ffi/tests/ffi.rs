use std::ffi::CStr;
use std::ptr;

use grnn_sdr_ffi::*;

fn small_config() -> GrnnTrainConfig {
    let mut cfg = grnn_train_config_default();
    cfg.m = 8;
    cfg.restarts = 1;
    cfg.epochs = 150;
    cfg.seed = 3;
    cfg
}

#[test]
fn simulate_fit_and_query() {
    unsafe {
        let mut ds = ptr::null_mut();
        assert_eq!(grnn_dataset_simulate(4, 300, 6, -1.0, 11, &mut ds), GrnnStatus::Ok);
        assert_eq!(grnn_dataset_n(ds), 300);
        assert_eq!(grnn_dataset_p(ds), 6);
        assert_eq!(grnn_dataset_d_true(ds), 3);
        let mut truth = vec![0.0; 18];
        assert_eq!(grnn_dataset_beta_true(ds, truth.as_mut_ptr(), truth.len()), GrnnStatus::Ok);

        let cfg = small_config();
        let mut out = ptr::null_mut();
        assert_eq!(grnn_fit(ds, 0.2, &cfg, ptr::null(), &mut out), GrnnStatus::Ok);
        let d_hat = grnn_outcome_d_hat(out);
        assert!((1..=6).contains(&d_hat));
        assert_eq!(grnn_outcome_p(out), 6);
        assert!(grnn_outcome_pen(out) > 0.0);
        assert!(grnn_outcome_nnl_calls(out) >= 1);

        let mut small = vec![0.0; 6 * d_hat - 1];
        assert_eq!(
            grnn_outcome_beta_hat(out, small.as_mut_ptr(), small.len()),
            GrnnStatus::BufferTooSmall
        );
        assert!(!grnn_last_error_message().is_null());
        let mut beta = vec![0.0; 6 * d_hat];
        assert_eq!(grnn_outcome_beta_hat(out, beta.as_mut_ptr(), beta.len()), GrnnStatus::Ok);

        let mut r = f64::NAN;
        assert_eq!(
            grnn_vector_correlation(truth.as_ptr(), 6, 3, beta.as_ptr(), d_hat, &mut r),
            GrnnStatus::Ok
        );
        assert!((0.0..=1.0).contains(&r));

        let x = [0.1, -0.2, 0.3, 0.0, 0.5, -0.4];
        let mut y = [f64::NAN];
        assert_eq!(grnn_outcome_predict(out, x.as_ptr(), 1, y.as_mut_ptr()), GrnnStatus::Ok);
        assert!(y[0].is_finite());

        let json = grnn_outcome_to_json(out);
        assert!(!json.is_null());
        let text = CStr::from_ptr(json).to_str().unwrap().to_owned();
        assert!(text.contains("\"d_hat\""));
        grnn_string_free(json);

        grnn_outcome_free(out);
        grnn_dataset_free(ds);
    }
}

#[test]
fn user_data_matches_simulated_fit() {
    unsafe {
        let mut sim = ptr::null_mut();
        assert_eq!(grnn_dataset_simulate(5, 200, 5, -1.0, 2, &mut sim), GrnnStatus::Ok);
        let data = grnn_sdr::simgen::generate(&grnn_sdr::simgen::ModelSpec::new(5, 200, 5, 2)).unwrap();
        let (x, y) = (data.x.as_slice(), &data.y);
        let mut own = ptr::null_mut();
        assert_eq!(grnn_dataset_new(x.as_ptr(), y.as_ptr(), 200, 5, &mut own), GrnnStatus::Ok);

        let cfg = small_config();
        let mut a = ptr::null_mut();
        let mut b = ptr::null_mut();
        assert_eq!(grnn_fit(sim, 0.2, &cfg, ptr::null(), &mut a), GrnnStatus::Ok);
        assert_eq!(grnn_fit(own, 0.2, &cfg, ptr::null(), &mut b), GrnnStatus::Ok);
        let ja = grnn_outcome_to_json(a);
        let jb = grnn_outcome_to_json(b);
        assert_eq!(CStr::from_ptr(ja), CStr::from_ptr(jb));
        grnn_string_free(ja);
        grnn_string_free(jb);
        grnn_outcome_free(a);
        grnn_outcome_free(b);
        grnn_dataset_free(sim);
        grnn_dataset_free(own);
    }
}

#[test]
fn error_codes() {
    unsafe {
        let mut ds = ptr::null_mut();
        assert_eq!(grnn_dataset_simulate(9, 100, 10, -1.0, 0, &mut ds), GrnnStatus::InvalidArgument);
        assert!(ds.is_null());
        assert!(last_error().unwrap().contains('9'));

        assert_eq!(
            grnn_dataset_new(ptr::null(), ptr::null(), 3, 2, &mut ds),
            GrnnStatus::NullPointer
        );
        let x = [1.0, f64::NAN];
        let y = [0.0];
        assert_ne!(grnn_dataset_new(x.as_ptr(), y.as_ptr(), 1, 2, &mut ds), GrnnStatus::Ok);
        assert_eq!(grnn_dataset_simulate(1, 10, 6, -1.0, 0, ptr::null_mut()), GrnnStatus::NullPointer);

        let mut out = ptr::null_mut();
        assert_eq!(grnn_fit(ptr::null(), 0.2, ptr::null(), ptr::null(), &mut out), GrnnStatus::NullPointer);
        assert_eq!(grnn_outcome_d_hat(ptr::null()), 0);
        assert!(grnn_outcome_pen(ptr::null()).is_nan());
        assert!(grnn_outcome_to_json(ptr::null()).is_null());

        let mut r = 0.0;
        let a = [1.0, 0.0];
        assert_eq!(grnn_vector_correlation(a.as_ptr(), 2, 1, a.as_ptr(), 1, &mut r), GrnnStatus::Ok);
        assert!((r - 1.0).abs() < 1e-12);

        grnn_dataset_free(ptr::null_mut());
        grnn_outcome_free(ptr::null_mut());
        grnn_string_free(ptr::null_mut());
    }
}

#[test]
fn numerical_failure_maps_to_status() {
    unsafe {
        let mut ds = ptr::null_mut();
        assert_eq!(grnn_dataset_simulate(4, 100, 5, -1.0, 1, &mut ds), GrnnStatus::Ok);
        let mut cfg = small_config();
        cfg.learning_rate = f64::MAX;
        let mut out = ptr::null_mut();
        assert_eq!(grnn_fit(ds, 0.2, &cfg, ptr::null(), &mut out), GrnnStatus::NumericalError);
        assert!(out.is_null());
        grnn_dataset_free(ds);
    }
}

#[test]
fn defaults_and_version() {
    let cfg = grnn_train_config_default();
    assert_eq!(cfg.m, 20);
    assert_eq!(cfg.activation, GrnnActivation::Tanh);
    let pen = grnn_penalty_config_default();
    assert!(!pen.use_override && pen.scale > 0.0);
    let v = unsafe { CStr::from_ptr(grnn_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/grnn_sdr.h")).unwrap();
    for name in [
        "grnn_dataset_new",
        "grnn_dataset_simulate",
        "grnn_dataset_free",
        "grnn_fit",
        "grnn_outcome_beta_hat",
        "grnn_outcome_predict",
        "grnn_outcome_to_json",
        "grnn_string_free",
        "grnn_vector_correlation",
        "grnn_last_error_message",
        "GRNN_STATUS_NUMERICAL_ERROR",
    ] {
        assert!(header.contains(name), "{name} missing from header");
    }
}
