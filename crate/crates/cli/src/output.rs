//! Config resolution and payload writing.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::config::{ConfigFile, ExperimentConfig, Format};
use crate::{CliError, Overrides, SEED_ENV};

pub struct Resolved<P> {
    pub config: ExperimentConfig<P>,
    pub out: Option<PathBuf>,
}

/// Flag beats config file beats environment beats default.
pub fn resolve<P>(o: &Overrides, default_tol: f64) -> Result<Resolved<P>, CliError>
where
    P: DeserializeOwned + Default,
{
    let file: ConfigFile<P> = match &o.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?
        }
        None => ConfigFile::default(),
    };
    let env_seed = match std::env::var(SEED_ENV) {
        Ok(s) => Some(
            s.trim()
                .parse::<u64>()
                .map_err(|e| CliError::Usage(format!("{SEED_ENV}={s:?}: {e}")))?,
        ),
        Err(_) => None,
    };
    let seed = o.seed.or(file.seed).or(env_seed).unwrap_or(0);
    let tol = o.tol.or(file.tol).unwrap_or(default_tol);
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(CliError::Usage(format!("tol must be positive, got {tol}")));
    }
    Ok(Resolved {
        config: ExperimentConfig {
            seed,
            tol,
            format: o.format.or(file.format).unwrap_or(Format::Json),
            params: file.params.unwrap_or_default(),
        },
        out: o.out.clone().or(file.out),
    })
}

/// Rows of already formatted cells.
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Self {
        Self {
            header,
            rows: Vec::new(),
        }
    }

    pub fn push<I: IntoIterator<Item = String>>(&mut self, row: I) {
        self.rows.push(row.into_iter().collect());
    }
}

pub struct Payload {
    pub json: Value,
    pub table: Table,
    /// Written next to a CSV output as `<out>.summary.json`.
    pub summary: Option<Value>,
}

fn with_config<P: Serialize>(
    config: &ExperimentConfig<P>,
    body: &Value,
) -> Result<Value, CliError> {
    let mut map = Map::new();
    map.insert(
        "config".into(),
        serde_json::to_value(config).map_err(mereokit::Error::from)?,
    );
    if let Value::Object(fields) = body {
        for (k, v) in fields {
            map.insert(k.clone(), v.clone());
        }
    } else {
        map.insert("result".into(), body.clone());
    }
    Ok(Value::Object(map))
}

fn pretty(v: &Value) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(v).map_err(mereokit::Error::from)?;
    s.push('\n');
    Ok(s)
}

fn csv_text<P: Serialize>(config: &ExperimentConfig<P>, table: &Table) -> Result<String, CliError> {
    let header_line = serde_json::to_string(config).map_err(mereokit::Error::from)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Io(e.to_string());
    w.write_record(&table.header).map_err(io)?;
    for row in &table.rows {
        w.write_record(row).map_err(io)?;
    }
    let body = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    Ok(format!(
        "# config: {header_line}\n{}",
        String::from_utf8_lossy(&body)
    ))
}

fn write_to(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => std::io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Io(e.to_string())),
    }
}

pub fn emit<P: Serialize>(r: &Resolved<P>, payload: &Payload) -> Result<(), CliError> {
    match r.config.format {
        Format::Json => write_to(
            r.out.as_deref(),
            &pretty(&with_config(&r.config, &payload.json)?)?,
        ),
        Format::Csv => {
            write_to(r.out.as_deref(), &csv_text(&r.config, &payload.table)?)?;
            if let (Some(out), Some(summary)) = (&r.out, &payload.summary) {
                let mut name = out.as_os_str().to_owned();
                name.push(".summary.json");
                write_to(
                    Some(Path::new(&name)),
                    &pretty(&with_config(&r.config, summary)?)?,
                )?;
            }
            Ok(())
        }
    }
}

/// Shortest round-trip decimal form.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

pub fn status_body(status: &str, fields: Value) -> Value {
    let mut v = json!({ "status": status });
    if let (Value::Object(m), Value::Object(extra)) = (&mut v, fields) {
        m.extend(extra);
    }
    v
}
