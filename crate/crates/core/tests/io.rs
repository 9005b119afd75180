use contract_core::generate::{CostRegime, GenSpec};
use contract_core::instance::{FunctionClass, Instance};
use contract_core::Error;

#[test]
fn save_then_load() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("inst.json");
    let inst = GenSpec {
        n: 5,
        m: 2,
        class: FunctionClass::Coverage,
        costs: CostRegime::Random,
        seed: 3,
    }
    .generate()
    .unwrap();
    inst.save(&path).unwrap();
    assert_eq!(Instance::load(&path).unwrap(), inst);
}

#[test]
fn missing_file_is_io_error() {
    let dir = tempfile::tempdir().unwrap();
    assert!(matches!(Instance::load(dir.path().join("nope.json")), Err(Error::Io { .. })));
}

#[test]
fn missing_functions_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, r#"{"version": 1, "agents": 1, "projects": 1, "costs": [[0.0]]}"#).unwrap();
    assert!(matches!(Instance::load(&path), Err(Error::Parse { .. })));
}
