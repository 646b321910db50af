use std::path::{Path, PathBuf};

use panelcast::synth::SynthConfig;

fn merge(base: &mut toml::Table, over: toml::Table) {
    for (key, value) in over {
        match (base.get_mut(&key), value) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(key, v);
            }
        }
    }
}

/// Write the default benchmark under `dir/data` and return a run config
/// next to it with `overrides` (TOML text) merged in.
pub fn benchmark_config(dir: &Path, overrides: &str) -> PathBuf {
    let data = dir.join("data");
    panelcast::cli::synth(&SynthConfig::default(), &data).unwrap();
    let mut table: toml::Table = std::fs::read_to_string(data.join("run.toml")).unwrap().parse().unwrap();
    merge(&mut table, overrides.parse().unwrap());
    let path = data.join("custom.toml");
    std::fs::write(&path, toml::to_string(&table).unwrap()).unwrap();
    path
}

pub fn run(args: &[&str]) -> i32 {
    panelcast::cli::run(std::iter::once("panelcast").chain(args.iter().copied()))
}

pub fn s(path: &Path) -> &str {
    path.to_str().unwrap()
}
