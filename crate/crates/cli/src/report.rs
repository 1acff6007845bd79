//! Command output: an ordered record of string fields plus an optional table,
//! rendered as JSON, CSV or text.

use std::io::Write;

use serde_json::{Map, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug)]
pub struct Table {
    pub name: &'static str,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

#[derive(Debug)]
pub struct Report {
    pub command: &'static str,
    fields: Map<String, Value>,
    table: Option<Table>,
    /// Set when an internal check failed; the report is still printed.
    pub check_failed: Option<String>,
}

impl Report {
    pub fn new(command: &'static str) -> Report {
        let mut fields = Map::new();
        fields.insert("command".into(), Value::String(command.into()));
        Report { command, fields, table: None, check_failed: None }
    }

    pub fn set(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.fields.insert(key.into(), Value::String(value.to_string()));
        self
    }

    pub fn set_bool(&mut self, key: &str, value: bool) -> &mut Self {
        self.fields.insert(key.into(), Value::Bool(value));
        self
    }

    pub fn set_opt(&mut self, key: &str, value: Option<impl ToString>) -> &mut Self {
        let v = value.map_or(Value::Null, |v| Value::String(v.to_string()));
        self.fields.insert(key.into(), v);
        self
    }

    pub fn set_list(&mut self, key: &str, values: impl IntoIterator<Item = impl ToString>) -> &mut Self {
        let v = values.into_iter().map(|s| Value::String(s.to_string())).collect();
        self.fields.insert(key.into(), Value::Array(v));
        self
    }

    pub fn set_value(&mut self, key: &str, value: Value) -> &mut Self {
        self.fields.insert(key.into(), value);
        self
    }

    pub fn table(&mut self, table: Table) -> &mut Self {
        self.table = Some(table);
        self
    }

    pub fn fail(&mut self, why: impl Into<String>) {
        let why = why.into();
        self.set("check_failure", &why);
        self.check_failed = Some(why);
    }

    pub fn to_json(&self) -> Value {
        let mut out = self.fields.clone();
        if let Some(t) = &self.table {
            let rows = t
                .rows
                .iter()
                .map(|r| {
                    let obj: Map<String, Value> =
                        t.columns.iter().zip(r).map(|(c, v)| (c.to_string(), Value::String(v.clone()))).collect();
                    Value::Object(obj)
                })
                .collect();
            out.insert(t.name.into(), Value::Array(rows));
        }
        Value::Object(out)
    }

    pub fn render(&self, format: Format, w: &mut dyn Write) -> std::io::Result<()> {
        match format {
            Format::Json => {
                serde_json::to_writer_pretty(&mut *w, &self.to_json())?;
                writeln!(w)
            }
            Format::Csv => self.render_csv(w),
            Format::Text => self.render_text(w),
        }
    }

    fn render_csv(&self, w: &mut dyn Write) -> std::io::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        match &self.table {
            Some(t) => {
                out.write_record(&t.columns)?;
                for r in &t.rows {
                    out.write_record(r)?;
                }
            }
            None => {
                out.write_record(["key", "value"])?;
                for (k, v) in &self.fields {
                    out.write_record([k.as_str(), &plain(v)])?;
                }
            }
        }
        out.flush()
    }

    fn render_text(&self, w: &mut dyn Write) -> std::io::Result<()> {
        let width = self.fields.keys().map(String::len).max().unwrap_or(0);
        for (k, v) in &self.fields {
            writeln!(w, "{k:width$}  {}", plain(v))?;
        }
        if let Some(t) = &self.table {
            writeln!(w)?;
            let widths: Vec<usize> = (0..t.columns.len())
                .map(|i| t.rows.iter().map(|r| r[i].len()).chain([t.columns[i].len()]).max().unwrap_or(0))
                .collect();
            let line = |cells: Vec<&str>| {
                cells.iter().zip(&widths).map(|(c, n)| format!("{c:>n$}")).collect::<Vec<_>>().join("  ")
            };
            writeln!(w, "{}", line(t.columns.clone()))?;
            for r in &t.rows {
                writeln!(w, "{}", line(r.iter().map(String::as_str).collect()))?;
            }
        }
        Ok(())
    }
}

fn plain(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => "-".into(),
        Value::Array(items) => items.iter().map(plain).collect::<Vec<_>>().join("; "),
        other => other.to_string(),
    }
}
