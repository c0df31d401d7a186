//! Resolution of run parameters: flag, then config file, then default.

use std::path::Path;
use std::str::FromStr;

use serde_json::{Map, Value};

use crate::error::CliError;

/// Config-file values plus a record of every resolved parameter.
#[derive(Debug, Default)]
pub struct Source {
    file: Map<String, Value>,
    used: Vec<String>,
    resolved: Map<String, Value>,
}

fn number_value(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or_else(|| Value::String(x.to_string()), Value::Number)
}

impl Source {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Source::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        match serde_json::from_str::<Value>(&text) {
            Ok(Value::Object(file)) => Ok(Source { file, ..Source::default() }),
            Ok(_) => Err(CliError::Config(format!("{}: top level must be a JSON object", path.display()))),
            Err(e) => Err(CliError::Config(format!("{}: {e}", path.display()))),
        }
    }

    fn lookup(&mut self, key: &str) -> Option<Value> {
        self.used.push(key.to_string());
        self.file.get(key).cloned()
    }

    fn bad(key: &str, expected: &str, got: &Value) -> CliError {
        CliError::Config(format!("field '{key}': expected {expected}, got {got}"))
    }

    fn record(&mut self, key: &str, value: Value) {
        self.resolved.insert(key.to_string(), value);
    }

    /// Numbers may also be given as strings in the file (e.g. "inf").
    pub fn f64(&mut self, flag: Option<f64>, key: &str, default: f64) -> Result<f64, CliError> {
        let v = match (flag, self.lookup(key)) {
            (Some(x), _) => x,
            (None, Some(Value::Number(n))) => n.as_f64().unwrap_or(default),
            (None, Some(Value::String(s))) => {
                f64::from_str(s.trim()).map_err(|_| Self::bad(key, "a number", &Value::String(s)))?
            }
            (None, Some(other)) => return Err(Self::bad(key, "a number", &other)),
            (None, None) => default,
        };
        if v.is_nan() {
            return Err(CliError::Config(format!("field '{key}': NaN is not allowed")));
        }
        self.record(key, number_value(v));
        Ok(v)
    }

    pub fn u64(&mut self, flag: Option<u64>, key: &str, default: u64) -> Result<u64, CliError> {
        let v = match (flag, self.lookup(key)) {
            (Some(x), _) => x,
            (None, Some(Value::Number(n))) => {
                n.as_u64().ok_or_else(|| Self::bad(key, "a non-negative integer", &Value::Number(n)))?
            }
            (None, Some(other)) => return Err(Self::bad(key, "a non-negative integer", &other)),
            (None, None) => default,
        };
        self.record(key, Value::from(v));
        Ok(v)
    }

    pub fn usize(&mut self, flag: Option<usize>, key: &str, default: usize) -> Result<usize, CliError> {
        let v = self.u64(flag.map(|x| x as u64), key, default as u64)?;
        usize::try_from(v).map_err(|_| CliError::Config(format!("field '{key}': {v} is too large")))
    }

    pub fn string(&mut self, flag: Option<String>, key: &str, default: &str) -> Result<String, CliError> {
        let v = match (flag, self.lookup(key)) {
            (Some(x), _) => x,
            (None, Some(Value::String(s))) => s,
            (None, Some(other)) => return Err(Self::bad(key, "a string", &other)),
            (None, None) => default.to_string(),
        };
        self.record(key, Value::String(v.clone()));
        Ok(v)
    }

    pub fn optional_string(&mut self, flag: Option<String>, key: &str) -> Result<Option<String>, CliError> {
        let v = match (flag, self.lookup(key)) {
            (Some(x), _) => Some(x),
            (None, Some(Value::String(s))) => Some(s),
            (None, Some(Value::Null) | None) => None,
            (None, Some(other)) => return Err(Self::bad(key, "a string", &other)),
        };
        if let Some(s) = &v {
            self.record(key, Value::String(s.clone()));
        }
        Ok(v)
    }

    /// Boolean switches: a flag present on the command line wins.
    pub fn switch(&mut self, flag: bool, key: &str) -> Result<bool, CliError> {
        let v = match (flag, self.lookup(key)) {
            (true, _) => true,
            (false, Some(Value::Bool(b))) => b,
            (false, Some(other)) => return Err(Self::bad(key, "true or false", &other)),
            (false, None) => false,
        };
        self.record(key, Value::Bool(v));
        Ok(v)
    }

    /// Marks keys as known without resolving them (parameters of variants
    /// not selected by this run).
    pub fn accept(&mut self, keys: &[&str]) {
        self.used.extend(keys.iter().map(|k| k.to_string()));
    }

    /// Fails on config-file keys that no parameter consumed.
    pub fn finish(self) -> Result<Map<String, Value>, CliError> {
        let mut unknown: Vec<&String> = self.file.keys().filter(|k| !self.used.contains(k)).collect();
        unknown.sort();
        if let Some(k) = unknown.first() {
            return Err(CliError::Config(format!("unknown field '{k}' in config file")));
        }
        Ok(self.resolved)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn source(json: &str) -> Source {
        let Value::Object(file) = serde_json::from_str(json).unwrap() else { unreachable!() };
        Source { file, ..Source::default() }
    }

    #[test]
    fn precedence_is_flag_file_default() {
        let mut s = source(r#"{"g": 2.0, "sigma": 3.0}"#);
        assert_eq!(s.f64(Some(5.0), "g", 1.0).unwrap(), 5.0);
        assert_eq!(s.f64(None, "sigma", 1.0).unwrap(), 3.0);
        assert_eq!(s.f64(None, "t-max", 4.0).unwrap(), 4.0);
        let resolved = s.finish().unwrap();
        assert_eq!(resolved["g"], 5.0);
        assert_eq!(resolved["t-max"], 4.0);
    }

    #[test]
    fn diagnostics_name_the_field() {
        let mut s = source(r#"{"steps": -3}"#);
        let err = s.usize(None, "steps", 400).unwrap_err().to_string();
        assert!(err.contains("'steps'"), "{err}");
        let s = source(r#"{"sigma": 1, "sigmaa": 2}"#);
        let err = s.finish().unwrap_err().to_string();
        assert!(err.contains("'sigma'"), "{err}");
    }

    #[test]
    fn infinite_beta_from_string() {
        let mut s = source(r#"{"beta": "inf"}"#);
        assert_eq!(s.f64(None, "beta", 1.0).unwrap(), f64::INFINITY);
        assert_eq!(s.finish().unwrap()["beta"], "inf");
    }

    #[test]
    fn switches() {
        let mut s = source(r#"{"single-mode": true, "ohmic": 3}"#);
        assert!(s.switch(false, "single-mode").unwrap());
        assert!(s.switch(false, "ohmic").is_err());
    }
}
