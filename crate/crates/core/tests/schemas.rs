use std::path::{Path, PathBuf};

use jsonschema::{Resource, Validator};
use serde_json::Value;
use stargen_core::pipeline::{artifacts, run_pipeline, to_json, Preset, RunConfig};

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))).unwrap()
}

fn validator(name: &str) -> Validator {
    let dir = root().join("schemas");
    let common = read_json(&dir.join("common.defs.json"));
    jsonschema::options()
        .with_resource("https://stargen.local/schemas/common.defs.json", Resource::from_contents(common).unwrap())
        .build(&read_json(&dir.join(name)))
        .unwrap()
}

fn assert_valid(v: &Validator, doc: &Value, what: &str) {
    let errs: Vec<String> = v.iter_errors(doc).map(|e| format!("{} at {}", e, e.instance_path)).take(5).collect();
    assert!(errs.is_empty(), "{what}: {errs:#?}");
}

fn check_run(cfg: RunConfig, label: &str) {
    let run = run_pipeline(&cfg).unwrap();
    let a = artifacts(&run.snapshot, &run.qwu, &run.bundle);
    let docs = [
        ("snapshot.schema.json", serde_json::to_value(&a.snapshot).unwrap()),
        ("scaffold.schema.json", serde_json::to_value(&a.scaffold).unwrap()),
        ("generator.schema.json", serde_json::to_value(&a.generator).unwrap()),
        ("report.schema.json", serde_json::from_str(&to_json(&run.report_export()).unwrap()).unwrap()),
    ];
    for (schema, doc) in docs {
        assert_valid(&validator(schema), &doc, &format!("{label} {schema}"));
    }
}

#[test]
fn uhf2_artifacts_match_schemas() {
    check_run(RunConfig::preset(Preset::Uhf2, 3, 2), "uhf2");
}

#[test]
fn goodearl_artifacts_match_schemas() {
    check_run(RunConfig::preset(Preset::Goodearl, 3, 2), "goodearl");
}

#[test]
fn tensored_artifacts_match_schemas() {
    let mut cfg = RunConfig::preset(Preset::Uhf2, 3, 2);
    cfg.tensor = Some(2);
    check_run(cfg, "uhf2 tensor 2");
}

#[test]
fn sample_configs_match_schema_and_parse() {
    let v = validator("run_config.schema.json");
    let mut n = 0;
    for entry in std::fs::read_dir(root().join("configs")).unwrap() {
        let p = entry.unwrap().path();
        let text = std::fs::read_to_string(&p).unwrap();
        assert_valid(&v, &serde_json::from_str(&text).unwrap(), &p.display().to_string());
        RunConfig::from_json(&text).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
        n += 1;
    }
    assert!(n >= 4);
}

#[test]
fn schema_rejects_unknown_config_field() {
    let v = validator("run_config.schema.json");
    let doc: Value = serde_json::json!({"system": {"preset": "uhf2"}, "depth": 3, "truncate": 2, "colour": 1});
    assert!(!v.is_valid(&doc));
}

#[test]
fn schema_rejects_malformed_generator() {
    let run = run_pipeline(&RunConfig::preset(Preset::Uhf2, 3, 2)).unwrap();
    let mut doc = serde_json::to_value(&artifacts(&run.snapshot, &run.qwu, &run.bundle).generator).unwrap();
    doc["generator"]["data"][0][0][0] = serde_json::json!([1.0]);
    assert!(!validator("generator.schema.json").is_valid(&doc));
}
