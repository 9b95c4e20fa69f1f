use taxicast::config::{ExperimentConfig, LambdaChoice, Schema, Source};
use taxicast::Error;
use taxicast_core::forecast::ModelKind;
use taxicast_core::metrics::Metric;

mod common;

#[test]
fn defaults_are_the_desk_scale_experiment() {
    let cfg = ExperimentConfig::default();
    assert_eq!(cfg.k, 40);
    assert_eq!(cfg.geohash_level, 6);
    assert_eq!(cfg.periods, vec![60]);
    assert_eq!((cfg.validation_hours, cfg.test_hours), (24, 24));
    assert_eq!(cfg.synthetic().unwrap().days, 14);
    cfg.validate().unwrap();
}

#[test]
fn text_round_trips() {
    let mut cfg = common::small_config();
    cfg.metric = Metric::Mase;
    cfg.periods = vec![60, 15];
    cfg.candidates = vec![ModelKind::Baseline, ModelKind::HoltWinters];
    cfg.lambda = LambdaChoice::Fixed(0.5);
    cfg.beta_grid = vec![0.2, 0.4];
    let back = ExperimentConfig::parse(&cfg.to_text()).unwrap();
    assert_eq!(back, cfg);
    assert_eq!(back.to_text(), cfg.to_text());
}

#[test]
fn parses_comments_and_csv_sources() {
    let cfg = ExperimentConfig::parse(
        "# NYC smoke\nsource = csv\ninput = trips.csv  # one day\nschema = b\nk = 100\nperiods = 60, 30\n",
    )
    .unwrap();
    assert_eq!(
        cfg.source,
        Source::Csv {
            path: "trips.csv".into(),
            schema: Schema::B
        }
    );
    assert_eq!(cfg.k, 100);
    assert_eq!(cfg.periods, vec![60, 30]);
}

#[test]
fn bad_configs_are_config_errors() {
    for text in [
        "k = 0",
        "k = many",
        "no_such_key = 1",
        "periods = 7",
        "metric = rmse",
        "validation_hours = 0",
        "beta_grid = 1.5",
        "candidates = arima",
        "geohash_level = 13",
        "synth.base_rate = -1",
        "just a line",
    ] {
        let err = ExperimentConfig::parse(text).unwrap_err();
        assert!(matches!(err, Error::Config(_)), "{text}: {err}");
        assert_eq!(err.exit_code(), 2);
    }
}

#[test]
fn missing_config_file_is_a_config_error() {
    let err = ExperimentConfig::from_file("/nonexistent/taxicast.cfg".as_ref()).unwrap_err();
    assert_eq!(err.exit_code(), 2);
}
