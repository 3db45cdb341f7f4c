use std::fmt;
use std::path::Path;

use manifold_deconv::Error as CoreError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Config,
    Generate,
    Degrade,
    Reconstruct,
    Evaluate,
    Render,
    Bench,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Stage::Config => "config",
            Stage::Generate => "generate",
            Stage::Degrade => "degrade",
            Stage::Reconstruct => "reconstruct",
            Stage::Evaluate => "evaluate",
            Stage::Render => "render",
            Stage::Bench => "bench",
        };
        f.write_str(s)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("{stage}: {path}: {message}")]
    File {
        stage: Stage,
        path: String,
        message: String,
    },
    #[error("{stage}: {source}")]
    Core {
        stage: Stage,
        #[source]
        source: CoreError,
    },
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn io(stage: Stage, path: &Path, e: impl fmt::Display) -> Self {
        CliError::File {
            stage,
            path: path.display().to_string(),
            message: e.to_string(),
        }
    }

    pub fn core(stage: Stage) -> impl FnOnce(CoreError) -> Self {
        move |source| CliError::Core { stage, source }
    }

    /// 2 for configuration and input problems, 3 for numeric failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::File { .. } => 2,
            CliError::Core { source, .. } => match source.root() {
                CoreError::NoConvergence { .. }
                | CoreError::ConjugatePoint(_)
                | CoreError::SingularL { .. }
                | CoreError::SingularGradient(_)
                | CoreError::AntipodalPoint
                | CoreError::ZeroDirection => 3,
                _ => 2,
            },
        }
    }
}
