use std::ffi::{c_char, CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use pwfiber::constellation::Alphabet;
use pwfiber::detectors;
use pwfiber::seed;
use pwfiber::Complex64;
use pwfiber_ffi::*;
use rand::Rng;
use rand_distr::{Distribution, Normal};

fn last_error() -> String {
    let mut buf = vec![0 as c_char; 256];
    let n = unsafe { pwf_last_error(buf.as_mut_ptr(), buf.len()) };
    assert!(n > 0);
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

fn cloud(n: usize, sigma: f64, s: u64) -> (Vec<f64>, Vec<f64>, Vec<u32>) {
    let a = Alphabet::qam(16).unwrap();
    let mut rng = seed::rng(s);
    let noise = Normal::new(0.0, sigma).unwrap();
    let (mut re, mut im, mut labels) = (Vec::new(), Vec::new(), Vec::new());
    for _ in 0..n {
        let l = rng.gen_range(0..16);
        let p = a.point(l);
        re.push(p.re + noise.sample(&mut rng));
        im.push(p.im + noise.sample(&mut rng));
        labels.push(l as u32);
    }
    (re, im, labels)
}

#[test]
fn q_from_ber_round_trips_status_and_value() {
    let mut q = 0.0;
    assert_eq!(unsafe { pwf_q_from_ber(1e-3, &mut q) }, PwfStatus::Ok);
    assert!((q - pwfiber::metrics::q_from_ber(1e-3).unwrap()).abs() == 0.0);

    assert_eq!(unsafe { pwf_q_from_ber(0.7, &mut q) }, PwfStatus::Input);
    assert!(last_error().contains("0.7"));
    assert_eq!(unsafe { pwf_q_from_ber(0.1, ptr::null_mut()) }, PwfStatus::NullPointer);
}

#[test]
fn last_error_truncates_and_reports_full_length() {
    let mut q = 0.0;
    unsafe { pwf_q_from_ber(-1.0, &mut q) };
    let full = unsafe { pwf_last_error(ptr::null_mut(), 0) };
    let mut small = [0 as c_char; 4];
    assert_eq!(unsafe { pwf_last_error(small.as_mut_ptr(), small.len()) }, full);
    assert_eq!(small[3], 0);
    assert_eq!(unsafe { CStr::from_ptr(small.as_ptr()) }.to_bytes().len(), 3);
}

#[test]
fn trained_detector_matches_the_rust_api() {
    let (re, im, labels) = cloud(2000, 0.15, 3);
    let mut det = ptr::null_mut();
    let st = unsafe { pwf_detector_train(16, re.as_ptr(), im.as_ptr(), labels.as_ptr(), re.len(), &mut det) };
    assert_eq!(st, PwfStatus::Ok);
    assert!(!det.is_null());

    let points: Vec<Complex64> = re.iter().zip(&im).map(|(&a, &b)| Complex64::new(a, b)).collect();
    let labels_us: Vec<usize> = labels.iter().map(|&l| l as usize).collect();
    let (reference, _) = detectors::train(&points, &labels_us, &Alphabet::qam(16).unwrap()).unwrap();

    let mut r = 0.0;
    assert_eq!(unsafe { pwf_detector_radius(det, &mut r) }, PwfStatus::Ok);
    assert_eq!(r, reference.radius());

    let (qre, qim, _) = cloud(500, 0.2, 4);
    let mut out = vec![u32::MAX; qre.len()];
    let st = unsafe { pwf_detector_classify(det, qre.as_ptr(), qim.as_ptr(), qre.len(), out.as_mut_ptr()) };
    assert_eq!(st, PwfStatus::Ok);
    let queries: Vec<Complex64> = qre.iter().zip(&qim).map(|(&a, &b)| Complex64::new(a, b)).collect();
    let expect: Vec<u32> = reference.classify_all(&queries).into_iter().map(|l| l as u32).collect();
    assert_eq!(out, expect);
    unsafe { pwf_detector_free(det) };
}

#[test]
fn fixed_radius_detector_and_bad_inputs() {
    let (re, im, labels) = cloud(64, 0.05, 5);
    let mut det = ptr::null_mut();
    let st = unsafe { pwf_detector_new(16, re.as_ptr(), im.as_ptr(), labels.as_ptr(), re.len(), -1.0, &mut det) };
    assert_eq!(st, PwfStatus::Config);
    assert!(det.is_null());

    let st = unsafe { pwf_detector_new(16, re.as_ptr(), ptr::null(), labels.as_ptr(), re.len(), 0.3, &mut det) };
    assert_eq!(st, PwfStatus::NullPointer);

    let st = unsafe { pwf_detector_train(12, re.as_ptr(), im.as_ptr(), labels.as_ptr(), re.len(), &mut det) };
    assert_eq!(st, PwfStatus::Config);
    assert!(last_error().contains("QAM"));

    let st = unsafe { pwf_detector_new(16, re.as_ptr(), im.as_ptr(), labels.as_ptr(), re.len(), 0.3, &mut det) };
    assert_eq!(st, PwfStatus::Ok);
    let mut out = [0u32; 1];
    let st = unsafe { pwf_detector_classify(det, &re[7], &im[7], 1, out.as_mut_ptr()) };
    assert_eq!(st, PwfStatus::Ok);
    assert_eq!(out[0], labels[7]);
    unsafe { pwf_detector_free(det) };
    unsafe { pwf_detector_free(ptr::null_mut()) };
}

#[test]
fn config_parse_errors_are_reported() {
    let mut cfg = ptr::null_mut();
    let text = CString::new("no_such_key = 3").unwrap();
    assert_eq!(unsafe { pwf_config_from_toml(text.as_ptr(), &mut cfg) }, PwfStatus::Config);
    assert!(cfg.is_null());
    assert!(last_error().contains("no_such_key"));

    assert_eq!(unsafe { pwf_config_default(&mut cfg) }, PwfStatus::Ok);
    unsafe { pwf_config_free(cfg) };
}

#[test]
fn run_point_fills_one_outcome_per_detector() {
    let text = CString::new("n_test = 4096\nn_train = 1000\nsamples_per_symbol = 4\nlaunch_powers_dbm = [-4.0]\n").unwrap();
    let mut cfg = ptr::null_mut();
    assert_eq!(unsafe { pwf_config_from_toml(text.as_ptr(), &mut cfg) }, PwfStatus::Ok);

    let mut n = 0usize;
    let mut one = [PwfOutcome {
        detector: PwfDetectorKind::Pw,
        n_symbols: 0,
        n_symbol_errors: 0,
        n_bits: 0,
        n_bit_errors: 0,
        ser: 0.0,
        ber: 0.0,
        q_db: 0.0,
        relative_radius: 0.0,
    }; 2];
    let st = unsafe { pwf_run_point(cfg, -4.0, 1, 11, one.as_mut_ptr(), 1, &mut n) };
    assert_eq!(st, PwfStatus::BufferTooSmall);
    assert_eq!(n, 2);

    let st = unsafe { pwf_run_point(cfg, -4.0, 1, 11, one.as_mut_ptr(), 2, &mut n) };
    assert_eq!(st, PwfStatus::Ok);
    assert_eq!(n, 2);
    assert_eq!(one[0].detector, PwfDetectorKind::Pw);
    assert_eq!(one[1].detector, PwfDetectorKind::Med);
    assert_eq!(one[0].n_symbols, 2 * 4096);
    assert!(one[0].relative_radius > 0.0);
    assert!(one[1].relative_radius.is_nan());
    unsafe { pwf_config_free(cfg) };
}

#[test]
fn version_is_a_c_string() {
    let v = unsafe { CStr::from_ptr(pwf_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn generated_header_declares_the_api_and_compiles() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/pwfiber.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for sym in [
        "pwf_last_error",
        "pwf_q_from_ber",
        "pwf_detector_train",
        "pwf_detector_classify",
        "pwf_detector_free",
        "pwf_config_from_toml",
        "pwf_run_point",
        "typedef struct PwfDetector PwfDetector",
        "PWF_STATUS_OK = 0",
    ] {
        assert!(text.contains(sym), "header lacks {sym}");
    }

    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use.c");
    std::fs::write(
        &src,
        "#include \"pwfiber.h\"\nint main(void) { double q; return pwf_q_from_ber(1e-3, &q) == PWF_STATUS_OK ? 0 : 1; }\n",
    )
    .unwrap();
    let status = Command::new("cc")
        .args(["-fsyntax-only", "-Wall", "-Werror", "-I"])
        .arg(header.parent().unwrap())
        .arg(&src)
        .status();
    match status {
        Ok(s) => assert!(s.success(), "C compiler rejected the header"),
        Err(e) => eprintln!("skipping C syntax check: no C compiler ({e})"),
    }
}
