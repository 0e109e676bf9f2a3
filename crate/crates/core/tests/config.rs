use rrm_core::harness::config::ChannelBlock;
use rrm_core::harness::{load_config, save_config, ExperimentConfig, Preset};
use rrm_core::Error;
use serde_json::json;

fn key_of(err: Error) -> String {
    match err {
        Error::Config { key, .. } => key,
        other => panic!("expected a config error, got {other}"),
    }
}

#[test]
fn save_then_load_is_identity_for_every_preset() {
    let dir = tempfile::tempdir().unwrap();
    for preset in Preset::ALL {
        let cfg = preset.config(None).unwrap();
        let path = dir.path().join(format!("{}.json", preset.name()));
        save_config(&cfg, &path).unwrap();
        let back = load_config(&path).unwrap();
        assert_eq!(back, cfg, "{}", preset.name());
        assert_eq!(back.fingerprint(), cfg.fingerprint());
    }
}

#[test]
fn fingerprint_tracks_content() {
    let a = ExperimentConfig::default();
    let mut b = a.clone();
    b.link.snr_db.push(25.0);
    assert_ne!(a.fingerprint(), b.fingerprint());
    assert_eq!(a.fingerprint(), ExperimentConfig::default().fingerprint());
}

#[test]
fn invalid_values_name_their_key() {
    let cases = [
        (json!({"surface": {"N": 0}}), "surface.N"),
        (json!({"link": {"rolloff": 1.5}}), "link.rolloff"),
        (json!({"link": {"span": 2}}), "link.span"),
        (json!({"reference": {"amplitude": -1.0}}), "reference.amplitude"),
    ];
    for (patch, key) in cases {
        let mut value = serde_json::to_value(ExperimentConfig::default()).unwrap();
        rrm_core::harness::config::merge_json(&mut value, &patch);
        let err = ExperimentConfig::from_value(&value).unwrap_err();
        assert_eq!(key_of(err), key);
    }
}

#[test]
fn negative_path_delay_is_rejected_by_index() {
    let mut cfg = ExperimentConfig::default();
    if let ChannelBlock::Manual { paths, .. } = &mut cfg.channel {
        paths[2].delay_ns = -1.0;
    } else {
        panic!("default channel is manual");
    }
    let key = key_of(cfg.validate().unwrap_err());
    assert!(key.starts_with("channel.paths[2]"), "{key}");
}

#[test]
fn unknown_field_is_an_error() {
    let err = ExperimentConfig::from_json_str(r#"{"surface": {"M": 8, "colour": 3}}"#).unwrap_err();
    assert!(err.to_string().contains("colour"), "{err}");
}

#[test]
fn partial_config_fills_defaults() {
    let cfg = ExperimentConfig::from_json_str(r#"{"surface": {"M": 8, "N": 4}, "seed": 9}"#).unwrap();
    assert_eq!((cfg.surface.m, cfg.surface.n), (8, 4));
    assert_eq!(cfg.seed, 9);
    assert_eq!(cfg.link, ExperimentConfig::default().link);
    assert_eq!(cfg.geometry().unwrap().shape(), (8, 4));
}

#[test]
fn preset_overrides_win() {
    let cfg = Preset::Fig10Outage
        .config(Some(&json!({"outage": {"trials": 10}, "seed": 4})))
        .unwrap();
    assert_eq!(cfg.outage.unwrap().trials, 10);
    assert_eq!(cfg.seed, 4);
    assert_eq!(cfg.surface.m, 8);
}

#[test]
fn documented_example_parses() {
    let doc = include_str!("../../../docs/config.md");
    let start = doc.find("```json\n").unwrap() + 8;
    let end = start + doc[start..].find("```").unwrap();
    let cfg = ExperimentConfig::from_json_str(&doc[start..end]).unwrap();
    assert_eq!(cfg.link.k, 64);
}
