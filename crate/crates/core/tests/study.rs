use ridge_mml::simulation::{condition_beta, draw_beta, flag_rates};
use ridge_mml::rng::stream_rng;
use ridge_mml::{
    published_template, roc_analysis, run_study, simulate_dataset, CiScore, Criterion, Model, Orientation,
    SimulationTemplate, StudyConfig,
};

fn small_config() -> StudyConfig {
    StudyConfig { replications: 6, models: vec![Model::Rr, Model::Grr], seed: 3, ..StudyConfig::default() }
}

fn templates() -> Vec<SimulationTemplate> {
    vec![
        SimulationTemplate::equicorrelated("wide", 20, 40, 0.3, 1.0).unwrap().with_zero_proportion(0.5),
        SimulationTemplate::equicorrelated("tall", 60, 8, 0.1, 0.5).unwrap(),
    ]
}

#[test]
fn study_is_deterministic_across_thread_counts() {
    let config = small_config();
    let a = run_study(&templates(), &config).unwrap();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let b = pool.install(|| run_study(&templates(), &config).unwrap());
    assert_eq!(a, b);
    assert_eq!(a.rows.len(), 2 * 2 * 3);
    assert_eq!(a.replications.len(), 2 * 6 * 2 * 3);
    let replication_order: Vec<usize> =
        a.replications.iter().filter(|r| r.condition == "tall").map(|r| r.replication).collect();
    assert!(replication_order.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn study_rows_summarize_replications() {
    let table = run_study(&templates(), &small_config()).unwrap();
    for row in &table.rows {
        assert_eq!(row.completed + row.failed, 6);
        let aucs: Vec<f64> = table
            .replications
            .iter()
            .filter(|r| r.condition == row.condition && r.model == row.model && r.criterion == row.criterion)
            .map(|r| r.roc.auc)
            .collect();
        let mean = aucs.iter().sum::<f64>() / aucs.len() as f64;
        assert!((mean - row.auc.mean).abs() < 1e-12);
        assert!((0.0..=1.0).contains(&row.auc.mean));
    }
    let mut out = Vec::new();
    table.write_csv(&mut out).unwrap();
    assert_eq!(String::from_utf8(out).unwrap().lines().count(), 1 + table.rows.len());
}

#[test]
fn seeds_change_the_draws() {
    let t = &templates()[1];
    let a = simulate_dataset(t, 0).unwrap();
    let b = simulate_dataset(t, 1).unwrap();
    assert_eq!(a.beta, b.beta);
    assert_ne!(a.x, b.x);
    assert_eq!(simulate_dataset(t, 0).unwrap().y, a.y);
    let other = simulate_dataset(&t.clone().with_seed(99), 0).unwrap();
    assert_ne!(other.beta, a.beta);
    assert_eq!(condition_beta(t), a.beta);
}

#[test]
fn beta_has_requested_zero_count() {
    let mut rng = stream_rng(0, 5);
    for (p, zp, zeros) in [(10, 0.25, 3), (3, 0.75, 2), (8, 0.5, 4), (1, 0.25, 0)] {
        let beta = draw_beta(p, zp, &mut rng);
        assert_eq!(beta.iter().filter(|b| **b == 0.0).count(), zeros, "p={p} zp={zp}");
    }
}

#[test]
fn published_templates_resolve() {
    for name in ["Iris", "iris", "DiabetesQ", "DiabetesS"] {
        let t = published_template(name).unwrap();
        assert!(!t.surrogate, "{name}");
        assert!(t.sigma2 > 0.0);
    }
    let iris = published_template("Iris").unwrap();
    assert_eq!((iris.n, iris.p), (150, 3));
    assert_eq!(published_template("DiabetesS").unwrap().p, 65 + 442);
    assert!(published_template("no-such-data").is_err());
}

#[test]
fn roc_handles_ties_and_orientation() {
    let is_zero = [true, true, false, false];
    let r = roc_analysis(&[0.1, 0.4, 0.4, 0.9], &is_zero, Orientation::HigherIsSignificant, 0.5).unwrap();
    assert!((r.auc - 0.875).abs() < 1e-12);
    // sensitivity counts zeros left unflagged, specificity counts nonzeros flagged
    assert_eq!((r.sensitivity, r.specificity), (1.0, 0.5));
    let low = roc_analysis(&[0.9, 0.6, 0.6, 0.1], &is_zero, Orientation::LowerIsSignificant, 0.5).unwrap();
    assert!((low.auc - 0.875).abs() < 1e-12);
    assert!(roc_analysis(&[0.1, 0.2], &[true, true], Orientation::HigherIsSignificant, 0.5).is_err());
    assert_eq!(flag_rates(&[true, false, true, false], &[false, false, true, true]), (0.5, 0.5));
}

#[test]
fn criterion_defaults() {
    assert_eq!(Criterion::ALL.len(), 3);
    assert_eq!(Criterion::Sn.orientation(), Orientation::LowerIsSignificant);
    assert_eq!(Criterion::Ci95.threshold(), 0.975);
    assert_eq!(CiScore::default(), CiScore::Absolute);
}
