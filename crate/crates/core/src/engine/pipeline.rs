//! Batch runs: an optional ingest step, a list of actions and a list of
//! artifacts to write. All artifacts are computed before anything touches
//! the output directory.

use std::fs;
use std::path::{Component, Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eventbox::{render_svg, SvgStyle};
use crate::ingest::IngestConfig;
use crate::stats::{render_markdown, ReportConfig};

use super::action::{Action, EventBoxRequest};
use super::panels::{panel, Page, PanelKind};
use super::session::Engine;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    /// Shorthand for a leading `load` action.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ingest: Option<IngestConfig>,
    #[serde(default)]
    pub actions: Vec<Action>,
    pub outputs: Vec<Output>,
}

/// One artifact. Paths are relative to the output directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Output {
    Report {
        #[serde(default)]
        config: ReportConfig,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        json: Option<PathBuf>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        markdown: Option<PathBuf>,
    },
    Eventbox {
        #[serde(flatten)]
        request: EventBoxRequest,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        json: Option<PathBuf>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        svg: Option<PathBuf>,
        /// Also write one file per breakdown child, suffixed with its value.
        #[serde(default)]
        breakdown: bool,
    },
    Quality {
        path: PathBuf,
    },
    State {
        path: PathBuf,
    },
    ActionLog {
        path: PathBuf,
    },
    Panel {
        panel: PanelKind,
        path: PathBuf,
    },
}

impl Output {
    fn paths(&self) -> Vec<&Path> {
        match self {
            Output::Report { json: a, markdown: b, .. } | Output::Eventbox { json: a, svg: b, .. } => {
                a.iter().chain(b).map(PathBuf::as_path).collect()
            }
            Output::Quality { path } | Output::State { path } | Output::ActionLog { path } | Output::Panel { path, .. } => {
                vec![path]
            }
        }
    }
}

impl PipelineConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("pipeline config: {e}")))
    }

    pub fn read(path: &Path) -> Result<Self> {
        PipelineConfig::from_json(&fs::read_to_string(path)?)
    }

    /// Output paths must be relative, stay inside the output directory and
    /// be distinct.
    pub fn validate(&self) -> Result<()> {
        if self.outputs.is_empty() {
            return Err(Error::Config("pipeline declares no outputs".into()));
        }
        let mut seen = std::collections::BTreeSet::new();
        for o in &self.outputs {
            let paths = o.paths();
            if paths.is_empty() {
                return Err(Error::Config("output declares no file".into()));
            }
            for p in paths {
                if p.as_os_str().is_empty()
                    || !p.components().all(|c| matches!(c, Component::Normal(_) | Component::CurDir))
                {
                    return Err(Error::Config(format!("output path `{}` must be relative to --out", p.display())));
                }
                if !seen.insert(p.to_path_buf()) {
                    return Err(Error::Config(format!("output path `{}` declared twice", p.display())));
                }
            }
        }
        Ok(())
    }

    /// The full action list, with the seed of every synthetic step replaced
    /// when `seed` is given.
    pub fn actions(&self, seed: Option<u64>) -> Vec<Action> {
        let mut out: Vec<Action> = self.ingest.iter().cloned().map(Action::Load).collect();
        out.extend(self.actions.iter().cloned());
        if let Some(seed) = seed {
            for a in &mut out {
                if let Action::Synthetic(c) = a {
                    c.seed = seed;
                }
            }
        }
        out
    }
}

/// File name with `-suffix` inserted before the extension.
fn suffixed(path: &Path, suffix: &str) -> PathBuf {
    let clean: String =
        suffix.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' }).collect();
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}-{clean}.{}", ext.to_string_lossy()),
        None => format!("{stem}-{clean}"),
    };
    path.with_file_name(name)
}

fn pretty<T: Serialize>(v: &T) -> Result<Vec<u8>> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s.into_bytes())
}

/// Artifacts of a run, keyed by path relative to the output directory.
#[derive(Debug)]
pub struct PipelineRun {
    pub engine: Engine,
    pub artifacts: Vec<(PathBuf, Vec<u8>)>,
}

/// Runs every action and renders every declared output in memory.
/// `base_dir` anchors relative input paths.
pub fn execute_pipeline(config: &PipelineConfig, base_dir: Option<PathBuf>, seed: Option<u64>) -> Result<PipelineRun> {
    config.validate()?;
    let mut engine = Engine::new(base_dir);
    for a in config.actions(seed) {
        engine.apply(&a, None)?;
    }
    let state = engine.state();
    let mut artifacts = Vec::new();
    for o in &config.outputs {
        match o {
            Output::Report { config, json, markdown } => {
                let r = state.report(config)?;
                if let Some(p) = json {
                    artifacts.push((p.clone(), pretty(&r)?));
                }
                if let Some(p) = markdown {
                    artifacts.push((p.clone(), render_markdown(&r).into_bytes()));
                }
            }
            Output::Eventbox { request, json, svg, breakdown } => {
                let types = state.dataset()?.event_types();
                let style = SvgStyle::for_type_index(types.iter().position(|t| *t == request.event_type).unwrap_or(0));
                let mut boxes = vec![(None, state.eventbox(request)?)];
                if *breakdown {
                    for child in state.breakdown(request)? {
                        boxes.push((child.breakdown_value.clone(), child));
                    }
                }
                for (suffix, bx) in boxes {
                    let name = |p: &Path| match &suffix {
                        Some(s) => suffixed(p, s),
                        None => p.to_path_buf(),
                    };
                    if let Some(p) = json {
                        artifacts.push((name(p), pretty(&bx)?));
                    }
                    if let Some(p) = svg {
                        artifacts.push((name(p), render_svg(&bx, &style).into_bytes()));
                    }
                }
            }
            Output::Quality { path } => {
                let q = state
                    .quality
                    .as_ref()
                    .ok_or_else(|| Error::State("no quality report: the dataset was not loaded from files".into()))?;
                artifacts.push((path.clone(), pretty(q)?));
            }
            Output::State { path } => {
                let mut s = state.canonical_json()?;
                s.push('\n');
                artifacts.push((path.clone(), s.into_bytes()));
            }
            Output::ActionLog { path } => artifacts.push((path.clone(), pretty(&engine.log())?)),
            Output::Panel { panel: kind, path } => {
                artifacts.push((path.clone(), pretty(&panel(&state, *kind, Page::default())?)?));
            }
        }
    }
    let mut names = std::collections::BTreeSet::new();
    for (p, _) in &artifacts {
        if !names.insert(p) {
            return Err(Error::Config(format!("two outputs write `{}`", p.display())));
        }
    }
    Ok(PipelineRun { engine, artifacts })
}

/// Writes artifacts under `out_dir`. On failure every file written so far
/// is removed again.
pub fn write_artifacts(out_dir: &Path, artifacts: &[(PathBuf, Vec<u8>)]) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    let result = (|| -> Result<()> {
        for (rel, bytes) in artifacts {
            let path = out_dir.join(rel);
            if let Some(parent) = path.parent() {
                fs::create_dir_all(parent)?;
            }
            fs::write(&path, bytes)?;
            written.push(path);
        }
        Ok(())
    })();
    match result {
        Ok(()) => Ok(written),
        Err(e) => {
            for p in &written {
                let _ = fs::remove_file(p);
            }
            Err(e)
        }
    }
}

/// Reads the config at `config_path`, runs it and writes its outputs.
/// Relative input paths resolve against the config file's directory.
pub fn run_pipeline(config_path: &Path, out_dir: &Path, seed: Option<u64>) -> Result<Vec<PathBuf>> {
    let config = PipelineConfig::read(config_path)?;
    let base = config_path.parent().map(Path::to_path_buf);
    let run = execute_pipeline(&config, base, seed)?;
    write_artifacts(out_dir, &run.artifacts)
}

#[cfg(test)]
mod tests {
    use super::*;

    const CONFIG: &str = r#"{
        "actions": [
            {"action": "synthetic", "params": {"n_sequences": 150, "seed": 3}},
            {"action": "cluster", "params": {"k": 3}}
        ],
        "outputs": [
            {"kind": "report", "config": {"continuous": ["duration"], "categorical": ["urgency", "clinic"], "response": "duration", "factors": ["urgency"], "event_type": "consult"}, "json": "report.json", "markdown": "report.md"},
            {"kind": "eventbox", "event_type": "consult", "config": {"b": "urgency"}, "json": "box.json", "svg": "box.svg", "breakdown": true},
            {"kind": "state", "path": "state.json"},
            {"kind": "action_log", "path": "log.json"},
            {"kind": "panel", "panel": "events", "path": "panels/events.json"}
        ]
    }"#;

    #[test]
    fn writes_every_output() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("run.json");
        fs::write(&cfg, CONFIG).unwrap();
        let out = dir.path().join("out");
        let files = run_pipeline(&cfg, &out, None).unwrap();
        for name in ["report.json", "report.md", "box.json", "box.svg", "box-High.svg", "state.json", "log.json"] {
            assert!(out.join(name).is_file(), "{name}");
        }
        assert!(out.join("panels/events.json").is_file());
        assert_eq!(files.len(), 13);
    }

    #[test]
    fn deterministic_and_seed_override() {
        let c = PipelineConfig::from_json(CONFIG).unwrap();
        let a = execute_pipeline(&c, None, None).unwrap().artifacts;
        let b = execute_pipeline(&c, None, None).unwrap().artifacts;
        assert_eq!(a, b);
        let s = execute_pipeline(&c, None, Some(99)).unwrap();
        assert_ne!(a, s.artifacts);
        assert!(matches!(&s.engine.log()[0], Action::Synthetic(c) if c.seed == 99));
    }

    #[test]
    fn unknown_attribute_writes_nothing() {
        let text = CONFIG.replace("\"factors\": [\"urgency\"]", "\"factors\": [\"ward\"]");
        let c = PipelineConfig::from_json(&text).unwrap();
        let err = execute_pipeline(&c, None, None).unwrap_err();
        assert!(matches!(err, Error::Name(_)));
        assert!(err.is_validation());
    }

    #[test]
    fn rejects_escaping_or_duplicate_paths() {
        let esc = CONFIG.replace("\"state.json\"", "\"../state.json\"");
        assert_eq!(PipelineConfig::from_json(&esc).unwrap().validate().unwrap_err().code(), "ConfigError");
        let dup = CONFIG.replace("\"log.json\"", "\"state.json\"");
        assert_eq!(PipelineConfig::from_json(&dup).unwrap().validate().unwrap_err().code(), "ConfigError");
        assert_eq!(PipelineConfig::from_json("{\"outputs\": 3}").unwrap_err().code(), "ConfigError");
    }

    #[test]
    fn failed_write_removes_partial_outputs() {
        let dir = tempfile::tempdir().unwrap();
        // A regular file where a directory is needed makes the second write fail.
        fs::write(dir.path().join("blocker"), b"x").unwrap();
        let artifacts = vec![
            (PathBuf::from("a.json"), b"{}".to_vec()),
            (PathBuf::from("blocker/b.json"), b"{}".to_vec()),
        ];
        assert!(write_artifacts(dir.path(), &artifacts).is_err());
        assert!(!dir.path().join("a.json").exists());
    }
}
