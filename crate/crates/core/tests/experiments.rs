use pdbs::experiments::{mc_risk, mc_risk_with, sweep, CoinDetector, Detector, TestDetector};
use pdbs::{DetectOptions, Method, ModelParams, Seed};

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(f)
}

#[test]
fn risk_estimates_do_not_depend_on_thread_count() {
    let params = ModelParams::new(40, 4, 4, 0.7, 0.2).unwrap();
    let options = DetectOptions::default();
    for method in [Method::Count, Method::Degree, Method::ScanGreedy] {
        let one = in_pool(1, || mc_risk(method, &params, 60, Seed::new(4), &options).unwrap());
        let four = in_pool(4, || mc_risk(method, &params, 60, Seed::new(4), &options).unwrap());
        assert_eq!(one, four, "{method}");
    }
}

#[test]
fn wilson_interval_covers_a_known_rate() {
    let params = ModelParams::new(8, 2, 2, 0.6, 0.3).unwrap();
    let coin = CoinDetector(0.3);
    // 150 trials: exact Wilson coverage of 0.3 is 0.960 there (0.947 at 200).
    let mut covered = 0;
    for meta in 0..100 {
        let e = mc_risk_with(&coin, &params, 150, Seed::new(1_000 + meta)).unwrap();
        let (lo, hi) = e.type1_ci;
        covered += usize::from(lo <= 0.3 && 0.3 <= hi);
    }
    assert!(covered >= 93, "covered {covered}/100");
}

#[test]
fn nothing_beats_chance_when_hypotheses_coincide() {
    let params = ModelParams::new_unchecked(30, 4, 4, 0.3, 0.3);
    let options = DetectOptions::default();
    let mut detectors: Vec<Box<dyn Detector>> = [Method::Count, Method::Degree, Method::ScanGreedy]
        .into_iter()
        .map(|method| Box::new(TestDetector { method, params, options: options.clone() }) as Box<dyn Detector>)
        .collect();
    detectors.push(Box::new(CoinDetector(0.5)));
    for d in &detectors {
        let e = mc_risk_with(d.as_ref(), &params, 400, Seed::new(77)).unwrap();
        assert!(e.risk_hat >= 1.0 - 2.0 * e.ci_half_width, "{}: risk {} ± {}", d.label(), e.risk_hat, e.ci_half_width);
    }
}

#[test]
fn sweep_risk_falls_with_block_density() {
    let ps = [0.3, 0.6, 0.95];
    let grid: Vec<ModelParams> = [(60, 6), (80, 8), (100, 10)]
        .iter()
        .flat_map(|&(n, k)| ps.iter().map(move |&p| ModelParams::new(n, k, k, p, 0.2).unwrap()))
        .collect();
    let rows = sweep(&grid, &[Method::Count], 300, Seed::new(5), &DetectOptions::default());
    assert_eq!(rows.len(), 9);
    for chunk in rows.chunks(3) {
        let est: Vec<_> = chunk.iter().map(|r| r.estimate.clone().unwrap()).collect();
        for w in est.windows(2) {
            assert!(w[1].risk_hat <= w[0].risk_hat + w[0].ci_half_width + w[1].ci_half_width, "{:?}", chunk[0].params);
        }
        assert!(est[2].risk_hat < est[0].risk_hat);
    }
    let again = sweep(&grid[3..], &[Method::Count], 300, Seed::new(5), &DetectOptions::default());
    assert_ne!(again[0].estimate, rows[3].estimate, "cell seeds follow the cell index");
}

#[test]
fn exact_methods_fail_fast_when_infeasible() {
    let params = ModelParams::new(200, 20, 20, 0.9, 0.1).unwrap();
    let err = mc_risk(Method::ScanExact, &params, 10, Seed::new(1), &DetectOptions::default()).unwrap_err();
    assert!(matches!(err, pdbs::Error::BudgetExceeded { .. }));
}
