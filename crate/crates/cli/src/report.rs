//! Rendering of command results, in two byte-deterministic styles: plain
//! text (`key: value` lines; single-value reports print the bare value) and
//! JSON (`--json`, keys in insertion order).

use serde_json::{Map, Number, Value as Json};

/// One printable value.
pub enum Item {
    /// Single-line string.
    Str(String),
    Bool(bool),
    Int(i64),
    Float(f64),
    /// Multi-line block, printed verbatim (word files, DOT graphs, …).
    Text(String),
    /// List of single-line strings.
    List(Vec<String>),
    /// List of integers.
    Ints(Vec<i64>),
    /// List of floats.
    Floats(Vec<f64>),
}

/// Floats are printed with the shortest representation that round-trips,
/// so output is byte-identical across runs; infinities print as `inf`.
fn fmt_float(v: f64) -> String {
    if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v}")
    }
}

impl Item {
    fn plain(&self) -> String {
        match self {
            Item::Str(s) => s.clone(),
            Item::Bool(b) => b.to_string(),
            Item::Int(i) => i.to_string(),
            Item::Float(v) => fmt_float(*v),
            Item::Text(t) => t.clone(),
            Item::List(items) => items.join("\n"),
            Item::Ints(items) => {
                let parts: Vec<String> = items.iter().map(|i| i.to_string()).collect();
                format!("[{}]", parts.join(","))
            }
            Item::Floats(items) => {
                let parts: Vec<String> = items.iter().map(|v| fmt_float(*v)).collect();
                format!("[{}]", parts.join(", "))
            }
        }
    }

    fn json(&self) -> Json {
        let float_json = |v: f64| {
            Number::from_f64(v).map_or_else(|| Json::String(fmt_float(v)), Json::Number)
        };
        match self {
            Item::Str(s) => Json::String(s.clone()),
            Item::Bool(b) => Json::Bool(*b),
            Item::Int(i) => Json::Number((*i).into()),
            Item::Float(v) => float_json(*v),
            Item::Text(t) => Json::String(t.trim_end().to_string()),
            Item::List(items) => {
                Json::Array(items.iter().map(|s| Json::String(s.clone())).collect())
            }
            Item::Ints(items) => {
                Json::Array(items.iter().map(|&i| Json::Number(i.into())).collect())
            }
            Item::Floats(items) => Json::Array(items.iter().map(|&v| float_json(v)).collect()),
        }
    }
}

/// An ordered list of labeled values; a `single` report prints only the
/// value in plain mode (and `{"result": …}` in JSON mode).
pub struct Report {
    entries: Vec<(String, Item)>,
    single: bool,
}

impl Report {
    pub fn new() -> Report {
        Report {
            entries: Vec::new(),
            single: false,
        }
    }

    pub fn single(item: Item) -> Report {
        Report {
            entries: vec![("result".into(), item)],
            single: true,
        }
    }

    pub fn push(&mut self, key: impl Into<String>, item: Item) {
        self.entries.push((key.into(), item));
    }

    /// Write the report to stdout.
    pub fn print(&self, json_mode: bool) {
        if json_mode {
            let mut map = Map::new();
            for (key, item) in &self.entries {
                map.insert(key.clone(), item.json());
            }
            println!("{}", serde_json::to_string_pretty(&Json::Object(map)).unwrap());
            return;
        }
        if self.single {
            let text = self.entries[0].1.plain();
            if text.is_empty() {
                // An identity word renders as zero generator lines.
                println!();
            } else {
                println!("{}", text.trim_end_matches('\n'));
            }
            return;
        }
        for (key, item) in &self.entries {
            match item {
                Item::Text(t) => {
                    println!("{key}:");
                    let trimmed = t.trim_end_matches('\n');
                    if !trimmed.is_empty() {
                        println!("{trimmed}");
                    }
                }
                Item::List(items) => {
                    println!("{key}:");
                    for line in items {
                        println!("  {line}");
                    }
                }
                other => println!("{key}: {}", other.plain()),
            }
        }
    }
}
