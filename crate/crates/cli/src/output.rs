use std::io::Write;
use std::path::Path;

use annealing_core::report::round_sig;
use serde::Serialize;
use serde_json::Value;

use crate::{usage, Format};

/// What a subcommand produced, rendered once in the requested format.
pub struct Output {
    json: Value,
    csv: Option<String>,
    /// Printed to stdout ahead of the document (e.g. a bare probability).
    line: Option<String>,
    /// Report numbers are rounded to 12 significant digits; data files are not.
    round: bool,
}

fn round_value(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = round_sig(n.as_f64().unwrap());
            serde_json::Number::from_f64(x).map(Value::Number).unwrap_or(Value::Null)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(round_value).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, round_value(v))).collect()),
        other => other,
    }
}

impl Output {
    pub fn report(value: &impl Serialize) -> anyhow::Result<Self> {
        Ok(Output { json: serde_json::to_value(value)?, csv: None, line: None, round: true })
    }

    pub fn data(value: &impl Serialize) -> anyhow::Result<Self> {
        Ok(Output { round: false, ..Self::report(value)? })
    }

    pub fn with_csv(mut self, header: &str, rows: impl IntoIterator<Item = String>) -> Self {
        let mut s = format!("{header}\n");
        for r in rows {
            s.push_str(&r);
            s.push('\n');
        }
        self.csv = Some(s);
        self
    }

    pub fn with_line(mut self, line: String) -> Self {
        self.line = Some(line);
        self
    }

    pub fn render(&self, format: Format) -> anyhow::Result<String> {
        match format {
            Format::Json => {
                let v = if self.round { round_value(self.json.clone()) } else { self.json.clone() };
                Ok(serde_json::to_string_pretty(&v)? + "\n")
            }
            Format::Csv => {
                self.csv.clone().ok_or_else(|| usage("this subcommand has no CSV output; use --format json"))
            }
        }
    }

    pub fn write(&self, format: Format, out: Option<&Path>) -> anyhow::Result<()> {
        let body = self.render(format)?;
        let mut stdout = std::io::stdout().lock();
        if let Some(line) = &self.line {
            writeln!(stdout, "{line}")?;
        }
        match out {
            Some(path) => std::fs::write(path, body)
                .map_err(|e| anyhow::anyhow!("cannot write {}: {e}", path.display()))?,
            None => stdout.write_all(body.as_bytes())?,
        }
        Ok(())
    }
}
