use speckle_trng::pipeline::{extract, InputSource, RunConfig};
use speckle_trng::sim::{SimConfig, SimMode};

fn validator() -> jsonschema::Validator {
    let text = include_str!("../schema/report.schema.json");
    jsonschema::validator_for(&serde_json::from_str(text).unwrap()).unwrap()
}

fn report_json(sim: SimConfig) -> serde_json::Value {
    let report = extract(&RunConfig::new(InputSource::Simulate(sim))).unwrap().report;
    serde_json::from_str(&report.to_json().unwrap()).unwrap()
}

#[test]
fn reports_conform_to_schema() {
    let schema = validator();
    let oracle = report_json(SimConfig {
        mode: SimMode::Oracle,
        urns: Some(40_000),
        spot_count_mean: 300.0,
        frame_count: 30,
        ..SimConfig::default()
    });
    assert!(oracle["calibration"].is_object() && oracle["entropy"].is_object());
    let speckle = report_json(SimConfig {
        width: 64,
        height: 64,
        spot_count_mean: 5.0,
        frame_count: 2,
        ..SimConfig::default()
    });
    for value in [&oracle, &speckle] {
        let errors: Vec<String> = schema.iter_errors(value).map(|e| e.to_string()).collect();
        assert!(errors.is_empty(), "{errors:?}");
    }

    let mut broken = oracle.clone();
    broken["frames"][0].as_object_mut().unwrap().remove("bits_emitted");
    assert!(!schema.is_valid(&broken));
    let mut broken = oracle;
    broken["aggregate"]["withheld_bits"] = serde_json::json!(9);
    assert!(!schema.is_valid(&broken));
}
