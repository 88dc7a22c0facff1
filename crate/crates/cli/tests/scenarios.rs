use std::path::Path;

use plasmon_cqed::config;

#[test]
fn bundled_scenarios_resolve() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios");
    let mut count = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().and_then(|e| e.to_str()) != Some("json") {
            continue;
        }
        let s = config::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        s.resolve(&dir).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        let stem = path.file_stem().unwrap().to_str().unwrap();
        assert_eq!(s.run.task.name(), stem);
        count += 1;
    }
    assert_eq!(count, 8);
}
