use pwfiber::constellation::Alphabet;
use pwfiber::detectors::{self, MedDetector};
use pwfiber::harness::{
    self, point_seed, threshold_crossing, DetectorKind, RunConfig, SweepMode, MIN_TEST_SYMBOLS,
};
use pwfiber::Error;

fn small() -> RunConfig {
    RunConfig {
        n_test: MIN_TEST_SYMBOLS,
        n_spans: 2,
        ..RunConfig::default()
    }
}

#[test]
fn transparent_channel_is_error_free() {
    let cfg = RunConfig {
        gamma_per_w_km: 0.0,
        ase_enabled: false,
        dispersion_managed: false,
        ..small()
    };
    for o in harness::run_point(&cfg, 0.0, 3, 5).unwrap() {
        assert_eq!(o.report.n_bit_errors, 0, "{:?}", o.detector);
        assert_eq!(o.report.n_symbols, 2 * MIN_TEST_SYMBOLS as u64);
    }
}

#[test]
fn point_results_do_not_depend_on_the_rest_of_the_grid() {
    let both = harness::sweep_power(&RunConfig {
        launch_powers_dbm: vec![-6.0, 1.0],
        ..small()
    })
    .unwrap();
    let alone = harness::sweep_power(&RunConfig {
        launch_powers_dbm: vec![1.0],
        ..small()
    })
    .unwrap();
    let pick = |rec: &harness::SweepRecord| {
        rec.rows
            .iter()
            .filter(|r| r.power_dbm == 1.0)
            .map(|r| r.csv_line())
            .collect::<Vec<_>>()
    };
    assert_eq!(pick(&both), pick(&alone));
    assert_ne!(point_seed(1, SweepMode::Power, -6.0, 160.0), point_seed(1, SweepMode::Power, 1.0, 160.0));
}

#[test]
fn higher_power_beats_ase_in_the_linear_regime() {
    let cfg = RunConfig {
        detectors: vec![DetectorKind::Med],
        n_spans: 10,
        launch_powers_dbm: vec![-14.0, -9.0],
        ..small()
    };
    let rec = harness::sweep_power(&cfg).unwrap();
    let low = rec.q_at(DetectorKind::Med, -14.0).unwrap();
    let high = rec.q_at(DetectorKind::Med, -9.0).unwrap();
    assert!(high > low + 2.0, "{low} -> {high}");
}

#[test]
fn detectors_share_the_received_signal() {
    let cfg = small();
    let signals = harness::simulate_point(&cfg, -1.0, 2, 77).unwrap();
    assert_eq!(signals.rx_train[0].len(), cfg.n_train);
    assert_eq!(signals.rx_test[1].len(), cfg.n_test);

    // Re-deriving each detector by hand reproduces the pooled counts.
    let a = Alphabet::qam(16).unwrap();
    let outcomes = harness::detect(&cfg, &signals).unwrap();
    let mut pw_errors = 0;
    let mut med_errors = 0;
    for (pol, (sent_train, sent_test)) in [
        (&signals.sent_train.pol_x, &signals.sent_test.pol_x),
        (&signals.sent_train.pol_y, &signals.sent_test.pol_y),
    ]
    .into_iter()
    .enumerate()
    {
        let (pw, _) = detectors::train(&signals.rx_train[pol], &sent_train.labels, &a).unwrap();
        let med = MedDetector::fit(&signals.rx_train[pol], &sent_train.symbols, &a).unwrap();
        let count = |labels: Vec<usize>| labels.iter().zip(&sent_test.labels).filter(|(x, y)| x != y).count() as u64;
        pw_errors += count(pw.classify_all(&signals.rx_test[pol]));
        med_errors += count(med.classify_all(&signals.rx_test[pol]));
    }
    assert_eq!(outcomes[0].detector, DetectorKind::Pw);
    assert_eq!(outcomes[0].report.n_symbol_errors, pw_errors);
    assert_eq!(outcomes[1].report.n_symbol_errors, med_errors);
}

#[test]
fn region_maps_cover_the_alphabet() {
    let cfg = small();
    let signals = harness::simulate_point(&cfg, -6.0, 2, 3).unwrap();
    let maps = harness::region_maps(&cfg, &signals, 48).unwrap();
    for map in &maps {
        assert_eq!(map.labels.len(), 48 * 48);
        let mut seen = [false; 16];
        for &l in &map.labels {
            seen[l] = true;
        }
        assert!(seen.iter().all(|&s| s));
    }
}

#[test]
fn config_files_are_strict_and_flat() {
    let cfg = RunConfig::from_toml_str("n_spans = 4\ndetectors = [\"med\"]\nseed = 9\n").unwrap();
    assert_eq!((cfg.n_spans, cfg.seed), (4, 9));
    assert_eq!(cfg.detectors, vec![DetectorKind::Med]);
    assert_eq!(cfg.n_train, 2000);

    assert!(matches!(RunConfig::from_toml_str("[link]\nn_spans = 4\n"), Err(Error::Parse(_))));
    assert!(matches!(RunConfig::from_toml_str("n_test = 10\n"), Err(Error::Config(_))));
    assert!(matches!(RunConfig::from_toml_str("reaches_km = [100.0]\n"), Err(Error::Config(_))));
    assert!(matches!(RunConfig::from_toml_str("qam_order = 32\n"), Err(Error::Config(_))));

    let text = toml::to_string(&RunConfig::default()).unwrap();
    assert_eq!(RunConfig::from_toml_str(&text).unwrap(), RunConfig::default());
}

#[test]
fn reach_crossing_interpolates_in_db() {
    let curve = [(800.0, 12.0), (880.0, 11.0), (960.0, 9.0), (1040.0, 8.0)];
    assert_eq!(threshold_crossing(&curve, 10.0), Some(920.0));
    assert_eq!(threshold_crossing(&curve, 13.0), None);
    assert_eq!(threshold_crossing(&curve, 5.0), None);
}

#[test]
fn back_to_back_error_rate_falls_with_snr() {
    let cfg = RunConfig {
        detectors: vec![DetectorKind::Med],
        ..small()
    };
    let bers: Vec<f64> = [8.0, 11.0, 14.0]
        .iter()
        .map(|&snr| harness::run_back_to_back(&cfg, snr, 4).unwrap().ber)
        .collect();
    assert!(bers[0] > bers[1] && bers[1] > bers[2], "{bers:?}");
}
