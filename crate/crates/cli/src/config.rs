//! JSON run configuration and flag merging.
//!
//! A config file holds any subset of the keys below. A value given on the
//! command line always wins over the file, and the file wins over the
//! built-in defaults.
//!
//! ```json
//! {
//!   "command": "batch",
//!   "method": "mm",
//!   "sigma": 1.0,
//!   "levels": 2,
//!   "threshold": "quantile:0.75",
//!   "injection": "mask",
//!   "renorm": "clamp",
//!   "format": "idx",
//!   "input": ["t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte"],
//!   "output": "out/mnist-mm",
//!   "workers": 4,
//!   "chunk_size": 128,
//!   "codec": "same"
//! }
//! ```

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Deserialize;
use wavedge::batch::Method;
use wavedge::mm::{EdgeInjection, MmConfig, ThresholdPolicy};
use wavedge::naive::{NaiveConfig, Renormalize};
use wavedge::{Error, Result};

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Paths {
    One(PathBuf),
    Many(Vec<PathBuf>),
}

impl Paths {
    fn into_vec(self) -> Vec<PathBuf> {
        match self {
            Paths::One(p) => vec![p],
            Paths::Many(v) => v,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<String>,
    pub method: Option<String>,
    pub sigma: Option<f64>,
    pub levels: Option<usize>,
    pub threshold: Option<String>,
    pub injection: Option<String>,
    pub renorm: Option<String>,
    pub format: Option<String>,
    pub input: Option<Paths>,
    pub output: Option<PathBuf>,
    pub dump: Option<PathBuf>,
    pub dump_stages: Option<PathBuf>,
    pub workers: Option<usize>,
    pub chunk_size: Option<usize>,
    pub codec: Option<String>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_slice(&bytes)
            .map_err(|e| Error::Param(format!("config {}: {e}", path.display())))
    }

    /// Rejects a file written for a different subcommand.
    pub fn check_command(&self, command: &str) -> Result<()> {
        match &self.command {
            Some(c) if c != command => Err(Error::Param(format!(
                "config file is for {c:?}, not {command:?}"
            ))),
            _ => Ok(()),
        }
    }

    pub fn inputs(&self, flags: Vec<PathBuf>) -> Vec<PathBuf> {
        if flags.is_empty() {
            self.input.clone().map(Paths::into_vec).unwrap_or_default()
        } else {
            flags
        }
    }

    pub fn single_input(&self, flag: Option<PathBuf>) -> Result<PathBuf> {
        let mut all = self.inputs(flag.into_iter().collect());
        match all.len() {
            1 => Ok(all.remove(0)),
            0 => Err(Error::Param("no input image given".into())),
            n => Err(Error::Param(format!("expected one input image, got {n}"))),
        }
    }

    pub fn output(&self, flag: Option<PathBuf>) -> Result<PathBuf> {
        flag.or_else(|| self.output.clone())
            .ok_or_else(|| Error::Param("no output path given (use -o)".into()))
    }
}

/// Method parameters as they arrive from the command line.
#[derive(Debug, Clone, Default)]
pub struct MethodFlags {
    pub sigma: Option<f64>,
    pub levels: Option<usize>,
    pub threshold: Option<String>,
    pub injection: Option<String>,
    pub renorm: Option<String>,
}

fn parsed<T: FromStr<Err = Error>>(
    flag: &Option<String>,
    file: &Option<String>,
) -> Result<Option<T>> {
    flag.as_ref()
        .or(file.as_ref())
        .map(|s| s.parse())
        .transpose()
}

impl MethodFlags {
    pub fn naive(&self, file: &RunConfig) -> Result<NaiveConfig> {
        let mut cfg = NaiveConfig::default();
        if let Some(levels) = self.levels.or(file.levels) {
            cfg.levels = levels;
        }
        if let Some(r) = parsed::<Renormalize>(&self.renorm, &file.renorm)? {
            cfg.renormalize = r;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn mm(&self, file: &RunConfig) -> Result<MmConfig> {
        let mut cfg = MmConfig::default();
        if let Some(sigma) = self.sigma.or(file.sigma) {
            cfg.sigma = sigma;
        }
        if let Some(t) = parsed::<ThresholdPolicy>(&self.threshold, &file.threshold)? {
            cfg.threshold = t;
        }
        if let Some(i) = parsed::<EdgeInjection>(&self.injection, &file.injection)? {
            cfg.injection = i;
        }
        if let Some(r) = parsed::<Renormalize>(&self.renorm, &file.renorm)? {
            cfg.renormalize = r;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn method(&self, name: Option<&str>, file: &RunConfig) -> Result<Method> {
        match name.or(file.method.as_deref()).unwrap_or("mm") {
            "identity" => Ok(Method::Identity),
            "naive" => Ok(Method::Naive(self.naive(file)?)),
            "mm" => Ok(Method::Mm(self.mm(file)?)),
            other => Err(Error::Param(format!(
                "unknown method {other:?} (expected identity, naive or mm)"
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn file(json: &str) -> RunConfig {
        serde_json::from_str(json).unwrap()
    }

    #[test]
    fn flags_beat_file_beat_defaults() {
        let f = file(r#"{"sigma": 2.0, "threshold": "fixed:0.1", "renorm": "rescale"}"#);
        let flags = MethodFlags {
            sigma: Some(0.5),
            ..Default::default()
        };
        let cfg = flags.mm(&f).unwrap();
        assert_eq!(cfg.sigma, 0.5);
        assert_eq!(cfg.threshold, ThresholdPolicy::Fixed(0.1));
        assert_eq!(cfg.renormalize, Renormalize::Rescale);
        assert_eq!(cfg.injection, EdgeInjection::MaskDetails);
        let cfg = MethodFlags::default().mm(&RunConfig::default()).unwrap();
        assert_eq!(cfg, MmConfig::default());
    }

    #[test]
    fn input_forms() {
        let f = file(r#"{"input": "a.pgm"}"#);
        assert_eq!(f.single_input(None).unwrap(), PathBuf::from("a.pgm"));
        let f = file(r#"{"input": ["a", "b"]}"#);
        assert_eq!(f.inputs(vec![]).len(), 2);
        assert!(f.single_input(None).is_err());
        assert_eq!(f.inputs(vec!["c".into()]), vec![PathBuf::from("c")]);
    }

    #[test]
    fn bad_values_are_parameter_errors() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"sigmaa": 1}"#).is_err());
        let f = file(r#"{"threshold": "median"}"#);
        assert!(matches!(
            MethodFlags::default().mm(&f),
            Err(Error::Param(_))
        ));
        assert!(matches!(
            MethodFlags::default().method(Some("sharpen"), &f),
            Err(Error::Param(_))
        ));
        assert!(file(r#"{"command": "batch"}"#)
            .check_command("decompose")
            .is_err());
    }
}
