use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use ips_bench_ffi::*;

fn last_error() -> String {
    let p = ips_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn synth(json: &str) -> *mut IpsDataset {
    let cfg = CString::new(json).unwrap();
    let mut ds = ptr::null_mut();
    assert_eq!(unsafe { ips_dataset_generate(cfg.as_ptr(), &mut ds) }, IpsStatus::IpsOk);
    ds
}

#[test]
fn dataset_lifecycle_and_knn() {
    let ds = synth(r#"{"seed": 7, "train_count": 80, "test_count": 10, "ap_count": 6}"#);
    unsafe {
        assert_eq!(ips_dataset_ap_count(ds), 6);
        assert_eq!(ips_dataset_train_len(ds), 80);
        assert_eq!(ips_dataset_test_len(ds), 10);
        let mut rss = [0.0; 6];
        let mut truth = IpsPosition::default();
        assert_eq!(
            ips_dataset_test_sample(ds, 0, rss.as_mut_ptr(), 6, &mut truth),
            IpsStatus::IpsOk
        );
        assert_eq!(
            ips_dataset_test_sample(ds, 0, rss.as_mut_ptr(), 2, ptr::null_mut()),
            IpsStatus::IpsErrBufferTooSmall
        );
        assert_eq!(
            ips_dataset_test_sample(ds, 99, ptr::null_mut(), 0, ptr::null_mut()),
            IpsStatus::IpsErrInvalidArgument
        );

        let dist = CString::new("sorensen").unwrap();
        let mut est = IpsPosition::default();
        assert_eq!(
            ips_knn_estimate(ds, rss.as_ptr(), 6, 1, dist.as_ptr(), ptr::null(), &mut est),
            IpsStatus::IpsOk
        );
        assert!(est.x.is_finite() && est.has_floor == 1);

        assert_eq!(
            ips_knn_estimate(ds, rss.as_ptr(), 5, 1, ptr::null(), ptr::null(), &mut est),
            IpsStatus::IpsErrDimension
        );
        assert!(last_error().contains("dimension"));
        let bad = CString::new("cosine").unwrap();
        assert_eq!(
            ips_knn_estimate(ds, rss.as_ptr(), 6, 1, bad.as_ptr(), ptr::null(), &mut est),
            IpsStatus::IpsErrInvalidArgument
        );
        assert_eq!(
            ips_knn_estimate(ptr::null(), rss.as_ptr(), 6, 1, ptr::null(), ptr::null(), &mut est),
            IpsStatus::IpsErrNullPointer
        );

        let method = CString::new(r#"{"id": "m", "kind": "akm", "akm": {"k": 4}}"#).unwrap();
        let mut summary = IpsTrialSummary::default();
        assert_eq!(ips_evaluate(ds, method.as_ptr(), 1, &mut summary), IpsStatus::IpsOk);
        assert!((summary.cr - 3.5).abs() < 1e-12);
        assert!(summary.mean_error >= 0.0 && summary.floor_hit_rate >= 0.0);

        ips_dataset_free(ds);
        ips_dataset_free(ptr::null_mut());
    }
}

#[test]
fn load_errors_are_reported() {
    let missing = CString::new("/nonexistent/a_train.csv").unwrap();
    let mut ds = ptr::null_mut();
    let st = unsafe { ips_dataset_load(missing.as_ptr(), missing.as_ptr(), &mut ds) };
    assert_eq!(st, IpsStatus::IpsErrIo);
    assert!(ds.is_null());
    assert!(last_error().contains("nonexistent"));
    let bad = CString::new(r#"{"seed": 1, "bogus": 2}"#).unwrap();
    assert_eq!(
        unsafe { ips_dataset_generate(bad.as_ptr(), &mut ds) },
        IpsStatus::IpsErrParse
    );
}

#[test]
fn aggregation_functions() {
    unsafe {
        let mut out = 0.0;
        let vals = [2.0, 4.0];
        assert_eq!(ips_aggregate_trials(vals.as_ptr(), 2, &mut out), IpsStatus::IpsOk);
        assert_eq!(out, 3.0);
        assert_eq!(
            ips_aggregate_trials(vals.as_ptr(), 0, &mut out),
            IpsStatus::IpsErrInvalidArgument
        );
        assert_eq!(ips_normalize_to_baseline(2.82, 2.82, &mut out), IpsStatus::IpsOk);
        assert_eq!(out, 1.0);
        assert_eq!(
            ips_normalize_to_baseline(1.0, 0.0, &mut out),
            IpsStatus::IpsErrNormalization
        );
        let (mut m, mut s) = (0.0, 0.0);
        assert_eq!(
            ips_aggregate_scenarios([1.0, 3.0].as_ptr(), 2, &mut m, &mut s),
            IpsStatus::IpsOk
        );
        assert_eq!(m, 2.0);
        assert!((s - 2f64.sqrt()).abs() < 1e-15);

        // K = 15 row of the AkM sweep.
        let v = [0.010, 0.010, 0.79, 0.25];
        let w = [0.05, 0.05, 0.9, 0.2];
        let t = [
            IPS_TRANSFORM_IDENTITY,
            IPS_TRANSFORM_IDENTITY,
            IPS_TRANSFORM_SQUARE,
            IPS_TRANSFORM_ONE_MINUS,
        ];
        assert_eq!(
            ips_weighted_combine(v.as_ptr(), w.as_ptr(), t.as_ptr(), 4, &mut out),
            IpsStatus::IpsOk
        );
        assert!((out - 0.71269).abs() < 1e-4);
        let t_bad = [7, 0, 0, 0];
        assert_eq!(
            ips_weighted_combine(v.as_ptr(), w.as_ptr(), t_bad.as_ptr(), 4, &mut out),
            IpsStatus::IpsErrInvalidArgument
        );
    }
}

#[test]
fn akm_functions() {
    unsafe {
        let mut cr = 0.0;
        assert_eq!(ips_akm_compression_ratio(15, 7, &mut cr), IpsStatus::IpsOk);
        assert_eq!(cr, 1.75);
        assert_eq!(
            ips_akm_compression_ratio(1, 7, &mut cr),
            IpsStatus::IpsErrInvalidArgument
        );
        let vals = [1.0, 2.0, 9.0, 10.0];
        let mut cents = [0.0; 4];
        let mut len = 0;
        assert_eq!(
            ips_akm_stage1(vals.as_ptr(), 4, 2, cents.as_mut_ptr(), 4, &mut len),
            IpsStatus::IpsOk
        );
        assert_eq!(&cents[..len], &[1.5, 9.5]);
        assert_eq!(
            ips_akm_stage1(vals.as_ptr(), 4, 3, cents.as_mut_ptr(), 1, &mut len),
            IpsStatus::IpsErrBufferTooSmall
        );
        assert_eq!(len, 3);
    }
}

#[test]
fn gmms_functions() {
    unsafe {
        let mut s = 0.0;
        assert_eq!(ips_gmms_color_score(4.0, &mut s), IpsStatus::IpsOk);
        assert_eq!(s, 1.0);
        assert_eq!(ips_gmms_color_score(0.0, &mut s), IpsStatus::IpsErrNormalization);
        assert_eq!(ips_gmms_shape_aspect(7.18, &mut s), IpsStatus::IpsOk);
        assert_eq!(s, 3.0);

        let m = CString::new("base").unwrap();
        let sc = CString::new("scn").unwrap();
        let methods = [m.as_ptr()];
        let scenarios = [sc.as_ptr()];
        let mut svg = ptr::null_mut();
        let st = ips_gmms_render(
            methods.as_ptr(),
            1,
            scenarios.as_ptr(),
            1,
            [1.0].as_ptr(),
            [1.0].as_ptr(),
            60,
            &mut svg,
        );
        assert_eq!(st, IpsStatus::IpsOk);
        let text = CStr::from_ptr(svg).to_str().unwrap().to_owned();
        ips_string_free(svg);
        assert_eq!(text.matches("<circle").count(), 1);
        assert!(text.contains(r##"fill="#ffffff""##));
        assert_eq!(
            ips_gmms_render(
                methods.as_ptr(),
                1,
                scenarios.as_ptr(),
                0,
                ptr::null(),
                ptr::null(),
                60,
                &mut svg
            ),
            IpsStatus::IpsErrInvalidArgument
        );
    }
}

#[test]
fn version_is_static() {
    let v = unsafe { CStr::from_ptr(ips_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_compiles_as_c_and_cpp() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let header = dir.join("include/ips_bench.h");
    assert!(header.exists(), "header not generated");
    let tmp = tempfile::tempdir().unwrap();
    let src = tmp.path().join("use.c");
    std::fs::write(
        &src,
        "#include \"ips_bench.h\"\n\
         int probe(void) {\n\
           IpsDataset *ds = 0; IpsPosition p; double cr;\n\
           IpsStatus st = ips_akm_compression_ratio(15, 7, &cr);\n\
           (void)p; ips_dataset_free(ds);\n\
           return st == IPS_OK ? IPS_TRANSFORM_SQUARE : 0;\n\
         }\n",
    )
    .unwrap();
    for (compiler, lang) in [("cc", "c"), ("c++", "c++")] {
        let status = Command::new(compiler)
            .args(["-fsyntax-only", "-Wall", "-Werror", "-x", lang, "-I"])
            .arg(dir.join("include"))
            .arg(&src)
            .status();
        match status {
            Ok(s) => assert!(s.success(), "{compiler} rejected the header"),
            Err(e) => eprintln!("skipping {compiler}: {e}"),
        }
    }
}
