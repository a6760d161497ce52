//! Flat key-value configuration with one section per pipeline stage.
//!
//! ```text
//! seed = 42
//!
//! [moment]
//! kappa = 1.0
//! rho = 0.5
//! ...
//! ```
//!
//! Sections may repeat; stages execute in file order. `#` starts a comment.

use crate::error::{Error, Result};
use std::collections::BTreeMap;

#[derive(Debug, Clone)]
pub struct Section {
    pub name: String,
    pub entries: BTreeMap<String, String>,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    /// Top-level keys before the first section header.
    pub globals: BTreeMap<String, String>,
    pub stages: Vec<Section>,
}

pub fn parse(text: &str) -> Result<RunConfig> {
    let mut globals = BTreeMap::new();
    let mut stages: Vec<Section> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| Error::Schema {
                    stage: "<config>".into(),
                    message: format!("line {}: unterminated section header", lineno + 1),
                })?
                .trim()
                .to_string();
            stages.push(Section { name, entries: BTreeMap::new() });
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::Schema {
            stage: stages.last().map(|s| s.name.clone()).unwrap_or_else(|| "<config>".into()),
            message: format!("line {}: expected `key = value`, got `{line}`", lineno + 1),
        })?;
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        match stages.last_mut() {
            Some(section) => {
                section.entries.insert(key, value);
            }
            None => {
                globals.insert(key, value);
            }
        }
    }
    Ok(RunConfig { globals, stages })
}

impl Section {
    pub fn require(&self, key: &str) -> Result<&str> {
        self.entries.get(key).map(|s| s.as_str()).ok_or_else(|| Error::Schema {
            stage: self.name.clone(),
            message: format!("missing required key `{key}`"),
        })
    }

    pub fn get_f64(&self, key: &str) -> Result<f64> {
        parse_value(&self.name, key, self.require(key)?)
    }

    pub fn get_f64_or(&self, key: &str, default: f64) -> Result<f64> {
        match self.entries.get(key) {
            Some(v) => parse_value(&self.name, key, v),
            None => Ok(default),
        }
    }

    pub fn get_usize(&self, key: &str) -> Result<usize> {
        parse_value(&self.name, key, self.require(key)?)
    }

    pub fn get_usize_or(&self, key: &str, default: usize) -> Result<usize> {
        match self.entries.get(key) {
            Some(v) => parse_value(&self.name, key, v),
            None => Ok(default),
        }
    }

    pub fn get_str_or<'a>(&'a self, key: &str, default: &'a str) -> &'a str {
        self.entries.get(key).map(|s| s.as_str()).unwrap_or(default)
    }

    pub fn get_list_f64(&self, key: &str) -> Result<Vec<f64>> {
        let raw = self.require(key)?;
        raw.split(',')
            .map(|s| parse_value(&self.name, key, s.trim()))
            .collect()
    }

    pub fn get_list_usize(&self, key: &str) -> Result<Vec<usize>> {
        let raw = self.require(key)?;
        raw.split(',')
            .map(|s| parse_value(&self.name, key, s.trim()))
            .collect()
    }
}

fn parse_value<T: std::str::FromStr>(stage: &str, key: &str, raw: &str) -> Result<T> {
    // allow `inf` for unbounded windows
    if std::any::type_name::<T>() == "f64" && (raw == "inf" || raw == "INF") {
        return "inf".parse().map_err(|_| Error::Schema {
            stage: stage.to_string(),
            message: format!("key `{key}`: cannot parse `{raw}`"),
        });
    }
    raw.parse().map_err(|_| Error::Schema {
        stage: stage.to_string(),
        message: format!("key `{key}`: cannot parse `{raw}`"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sections_in_order() {
        let cfg = parse("seed = 7\n[moment]\nkappa = 1.5\n[moment]\nkappa = 2.5\n").unwrap();
        assert_eq!(cfg.globals.get("seed").unwrap(), "7");
        assert_eq!(cfg.stages.len(), 2);
        assert_eq!(cfg.stages[0].get_f64("kappa").unwrap(), 1.5);
        assert_eq!(cfg.stages[1].get_f64("kappa").unwrap(), 2.5);
    }

    #[test]
    fn missing_key_is_a_named_schema_error() {
        let cfg = parse("[moment]\nrho = 0.5\n").unwrap();
        let err = cfg.stages[0].get_f64("kappa").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("moment") && msg.contains("kappa"), "{msg}");
    }

    #[test]
    fn comments_and_inf_values() {
        let cfg = parse("[polaron]\nkcut = inf # unbounded\n").unwrap();
        assert!(cfg.stages[0].get_f64("kcut").unwrap().is_infinite());
    }
}
