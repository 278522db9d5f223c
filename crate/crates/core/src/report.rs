//! Report envelope shared by the command-line experiments: every report
//! embeds the resolved configuration and seed, so a run is reproducible
//! from its own output. Timing fields are the only nondeterministic parts.

use serde::Serialize;

/// A report body together with the configuration that produced it.
#[derive(Debug, Serialize)]
pub struct Envelope<T: Serialize> {
    pub command: String,
    pub config: serde_json::Value,
    pub caps: crate::error::Caps,
    pub seed: u64,
    #[serde(flatten)]
    pub body: T,
}

impl<T: Serialize> Envelope<T> {
    pub fn new(command: &str, config: serde_json::Value, seed: u64, body: T) -> Self {
        Envelope {
            command: command.to_string(),
            config,
            caps: crate::error::Caps::from_env(),
            seed,
            body,
        }
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("reports serialize")
    }
}

/// Serialize any report value to one JSON line.
pub fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("reports serialize")
}

/// Strip timing fields for byte-identity comparisons.
pub fn strip_timing(json_line: &str) -> String {
    match serde_json::from_str::<serde_json::Value>(json_line) {
        Ok(mut v) => {
            fn scrub(v: &mut serde_json::Value) {
                match v {
                    serde_json::Value::Object(map) => {
                        map.remove("elapsed_ms");
                        for (_, child) in map.iter_mut() {
                            scrub(child);
                        }
                    }
                    serde_json::Value::Array(items) => {
                        for item in items.iter_mut() {
                            scrub(item);
                        }
                    }
                    _ => {}
                }
            }
            scrub(&mut v);
            serde_json::to_string(&v).expect("reserialize")
        }
        Err(_) => json_line.to_string(),
    }
}
