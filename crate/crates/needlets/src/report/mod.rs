//! Report generation: configuration schemas, CSV/SVG rendering, and the
//! command runners behind the command-line interface.
//!
//! Runners are pure: they consume a configuration plus a seed and return a
//! [`RunOutput`] holding every file in memory together with a manifest that
//! echoes the fully resolved configuration. Writing to disk is a separate
//! final step ([`write_outputs`]) so a failed run never leaves partial
//! output behind.

pub mod config;
pub mod csv_out;
pub mod runners;
pub mod svg;

use crate::cubature::CubatureError;
use crate::field::FieldError;
use crate::gof::GofError;
use crate::needlet::NeedletError;
use crate::scale::ScaleError;
use crate::window::WindowError;
use std::path::Path;

/// One output file, staged in memory.
#[derive(Debug, Clone)]
pub struct OutputFile {
    /// File name relative to the output directory.
    pub name: String,
    /// Full file contents.
    pub contents: String,
}

/// The complete result of one command run.
#[derive(Debug, Clone)]
pub struct RunOutput {
    /// Data and figure files.
    pub files: Vec<OutputFile>,
    /// Manifest value: resolved configuration, seed, and summary fields.
    pub manifest: serde_json::Value,
}

impl RunOutput {
    /// Serializes the manifest (with the output file list appended) and
    /// returns all files including `manifest.json`.
    pub fn into_files(mut self) -> Vec<OutputFile> {
        let mut names: Vec<&str> = self.files.iter().map(|f| f.name.as_str()).collect();
        names.sort_unstable();
        if let serde_json::Value::Object(map) = &mut self.manifest {
            map.insert(
                "outputs".to_string(),
                serde_json::json!(names
                    .iter()
                    .map(|n| n.to_string())
                    .chain(std::iter::once("manifest.json".to_string()))
                    .collect::<Vec<_>>()),
            );
        }
        let mut manifest_text =
            serde_json::to_string_pretty(&self.manifest).expect("manifest serializes");
        manifest_text.push('\n');
        self.files.push(OutputFile {
            name: "manifest.json".to_string(),
            contents: manifest_text,
        });
        self.files
    }
}

/// Classified failure of a command run, mapped to the process exit code.
#[derive(Debug, thiserror::Error)]
pub enum RunError {
    /// Invalid configuration or arguments → exit code 2.
    #[error("configuration error: {0}")]
    Config(String),
    /// The request is valid but numerically out of reach → exit code 3.
    #[error("feasibility error: {0}")]
    Feasibility(String),
    /// A broken internal invariant or a failed write → exit code 4.
    #[error("internal error: {0}")]
    Internal(String),
}

impl RunError {
    /// Process exit code for this failure class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 2,
            Self::Feasibility(_) => 3,
            Self::Internal(_) => 4,
        }
    }
}

impl From<ScaleError> for RunError {
    fn from(e: ScaleError) -> Self {
        match e {
            ScaleError::Overflow { .. } => Self::Feasibility(e.to_string()),
            _ => Self::Config(e.to_string()),
        }
    }
}

impl From<WindowError> for RunError {
    fn from(e: WindowError) -> Self {
        match e {
            WindowError::SupportTooLarge { .. } => Self::Feasibility(e.to_string()),
            _ => Self::Config(e.to_string()),
        }
    }
}

impl From<CubatureError> for RunError {
    fn from(e: CubatureError) -> Self {
        Self::Config(e.to_string())
    }
}

impl From<NeedletError> for RunError {
    fn from(e: NeedletError) -> Self {
        match e {
            NeedletError::Window(inner) => inner.into(),
            NeedletError::Cubature(inner) => inner.into(),
            NeedletError::UncoveredEnergy { .. }
            | NeedletError::CoefficientShape { .. }
            | NeedletError::CoefficientLength { .. }
            | NeedletError::NonFiniteCoefficient { .. } => Self::Internal(e.to_string()),
            _ => Self::Config(e.to_string()),
        }
    }
}

impl From<FieldError> for RunError {
    fn from(e: FieldError) -> Self {
        match e {
            FieldError::Needlet(inner) => inner.into(),
            FieldError::BandlimitTooLarge { .. } => Self::Feasibility(e.to_string()),
            _ => Self::Config(e.to_string()),
        }
    }
}

impl From<GofError> for RunError {
    fn from(e: GofError) -> Self {
        match e {
            GofError::Scale(inner) => inner.into(),
            GofError::Needlet(inner) => inner.into(),
            GofError::Cubature(inner) => inner.into(),
            GofError::Field(inner) => inner.into(),
            GofError::BandlimitInfeasible { .. } | GofError::EmptySubsample { .. } => {
                Self::Feasibility(e.to_string())
            }
            GofError::SeparationViolated { .. } => Self::Internal(e.to_string()),
            GofError::SeparationNotSatisfied { .. } | GofError::BadConfig { .. } => {
                Self::Config(e.to_string())
            }
        }
    }
}

/// Writes all staged files into `dir`, creating it if needed.
///
/// On any write failure the files created by this call are removed again,
/// so the directory never holds a partial result set.
pub fn write_outputs(dir: &Path, output: RunOutput) -> Result<(), RunError> {
    let files = output.into_files();
    std::fs::create_dir_all(dir)
        .map_err(|e| RunError::Internal(format!("cannot create {}: {e}", dir.display())))?;
    let mut written: Vec<std::path::PathBuf> = Vec::new();
    for file in &files {
        let path = dir.join(&file.name);
        match std::fs::write(&path, &file.contents) {
            Ok(()) => written.push(path),
            Err(e) => {
                for w in &written {
                    let _ = std::fs::remove_file(w);
                }
                return Err(RunError::Internal(format!(
                    "cannot write {}: {e}",
                    path.display()
                )));
            }
        }
    }
    Ok(())
}
