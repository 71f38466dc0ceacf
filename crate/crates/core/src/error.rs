use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("duplicate pose for element `{id}` at frame {frame}")]
    DuplicateSample { id: String, frame: usize },

    #[error("recording must contain exactly one hand, found {0}")]
    HandCount(usize),

    #[error("recording is empty")]
    EmptyRecording,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("unknown element `{0}`")]
    UnknownElement(String),

    #[error("window of {window} samples around frame {frame} does not fit a recording of {duration} frames")]
    WindowOutOfRange {
        frame: usize,
        window: usize,
        duration: usize,
    },

    #[error("element `{id}` is absent inside the window around frame {frame}")]
    ElementAbsent { id: String, frame: usize },

    #[error("empty sample list")]
    EmptySamples,

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("co-information needs at least 3 signals, got {0}")]
    TooFewSignals(usize),

    #[error("trend needs {needed} values ending at frame {frame}")]
    InsufficientHistory { frame: usize, needed: usize },

    #[error("segmentation: {0}")]
    Segmentation(String),

    #[error("graphs belong to different activities (HO targets `{0}` and `{1}`)")]
    CrossActivityDiff(String, String),

    #[error("release of `{0}` without a prior grasp")]
    ReleaseWithoutGrasp(String),

    #[error("cannot build a plan from zero activities")]
    NoActivities,

    #[error("plan schema violation: {0}")]
    Schema(String),

    #[error("scenario: {0}")]
    Scenario(String),

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}
