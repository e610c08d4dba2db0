//! `--config file.json` invocations, rewritten into ordinary arguments.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use serde_json::{Map, Value};

use crate::error::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub subcommand: String,
    #[serde(default)]
    pub parameters: Map<String, Value>,
    #[serde(default)]
    pub output_path: Option<PathBuf>,
    #[serde(default)]
    pub seed: Option<u64>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::from_json(path.display().to_string(), &e))
    }

    pub fn to_argv(&self, program: &str) -> Result<Vec<String>, CliError> {
        let mut argv = vec![program.to_string()];
        argv.extend(self.subcommand.split_whitespace().map(str::to_string));
        for (key, value) in &self.parameters {
            let flag = format!("--{}", key.replace('_', "-"));
            match value {
                Value::Bool(true) => argv.push(flag),
                Value::Bool(false) | Value::Null => {}
                Value::Number(n) => argv.extend([flag, n.to_string()]),
                Value::String(s) => argv.extend([flag, s.clone()]),
                Value::Array(_) | Value::Object(_) => {
                    return Err(CliError::Invalid(format!("config parameter `{key}` must be a scalar")))
                }
            }
        }
        if let Some(out) = &self.output_path {
            argv.extend(["--out".to_string(), out.display().to_string()]);
        }
        if let Some(seed) = self.seed {
            argv.extend(["--seed".to_string(), seed.to_string()]);
        }
        Ok(argv)
    }
}

/// Splits `--config PATH` (or `--config=PATH`) out of the raw arguments.
pub fn extract(args: &[String]) -> Result<Option<PathBuf>, CliError> {
    let mut found = None;
    let mut iter = args.iter().skip(1);
    while let Some(a) = iter.next() {
        let path = if a == "--config" {
            iter.next().ok_or_else(|| CliError::Usage("--config requires a path".into()))?.clone()
        } else if let Some(p) = a.strip_prefix("--config=") {
            p.to_string()
        } else {
            continue;
        };
        if found.is_some() || args.len() != 3 - usize::from(a.starts_with("--config=")) {
            return Err(CliError::Usage("--config cannot be combined with other arguments".into()));
        }
        found = Some(PathBuf::from(path));
    }
    Ok(found)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parameters_become_flags() {
        let cfg: ConfigFile = serde_json::from_str(
            r#"{"subcommand": "pi1-nogo", "parameters": {"g": 2, "n": 2, "d": 3}, "seed": 7}"#,
        )
        .unwrap();
        assert_eq!(cfg.to_argv("vml").unwrap(), ["vml", "pi1-nogo", "--d", "3", "--g", "2", "--n", "2", "--seed", "7"]);
    }

    #[test]
    fn unknown_fields_rejected() {
        assert!(serde_json::from_str::<ConfigFile>(r#"{"subcommand": "x", "extra": 1}"#).is_err());
    }

    #[test]
    fn config_must_stand_alone() {
        let argv = |v: &[&str]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        assert_eq!(extract(&argv(&["vml", "--config", "a.json"])).unwrap(), Some("a.json".into()));
        assert_eq!(extract(&argv(&["vml", "--config=a.json"])).unwrap(), Some("a.json".into()));
        assert!(extract(&argv(&["vml", "--config", "a.json", "pi1-nogo"])).is_err());
        assert_eq!(extract(&argv(&["vml", "pi1-nogo"])).unwrap(), None);
    }
}
