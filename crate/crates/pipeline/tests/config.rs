use arcdsl_pipeline::{ConfigError, PipelineConfig};

fn write(text: &str) -> (tempfile::TempDir, std::path::PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    std::fs::write(&path, text).unwrap();
    (dir, path)
}

#[test]
fn full_config_parses_with_resolved_paths() {
    let (dir, path) = write(
        r#"
[endpoint]
base_url = "http://localhost:8000/v1"
model_id = "m1"
api_key_env = "MY_KEY"
temperature = 0.2

[run]
tasks_dir = "tasks"
solvers_dir = "/abs/solvers"
out_dir = "out"
concurrency = 8
tokens_per_minute = 100000

[prompt]
include_interim_values = true
parts = [1, 2]
"#,
    );
    let c = PipelineConfig::load(&path).unwrap();
    assert_eq!(c.endpoint.max_attempts, 5);
    assert_eq!(c.endpoint.temperature, Some(0.2));
    assert_eq!(c.run.tasks_dir, dir.path().join("tasks"));
    assert_eq!(c.run.solvers_dir, std::path::PathBuf::from("/abs/solvers"));
    assert_eq!(c.run.concurrency, 8);
    let spec = c.prompt_spec();
    assert!(spec.include_interim_values);
    assert_eq!(spec.parts_requested, [1, 2]);
    assert_eq!(spec.template_version, "v1");
    assert_eq!(spec.model_id, "m1");
}

#[test]
fn unknown_keys_and_missing_credentials_are_errors() {
    let (_dir, path) = write("[endpoint]\nbase_url = \"x\"\nmodel_id = \"m\"\nbogus = 1\n[run]\ntasks_dir = \"t\"\nsolvers_dir = \"s\"\nout_dir = \"o\"\n");
    let err = PipelineConfig::load(&path).unwrap_err();
    assert!(err.to_string().contains("bogus"), "{err}");

    let (_dir, path) = write("[endpoint]\nbase_url = \"x\"\nmodel_id = \"m\"\napi_key_env = \"ARCDSL_UNSET_FOR_TEST\"\n[run]\ntasks_dir = \"t\"\nsolvers_dir = \"s\"\nout_dir = \"o\"\n");
    let c = PipelineConfig::load(&path).unwrap();
    assert!(matches!(c.endpoint.api_key(), Err(ConfigError::MissingCredential(v)) if v == "ARCDSL_UNSET_FOR_TEST"));
}
