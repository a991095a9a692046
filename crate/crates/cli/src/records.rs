//! Line formats of the run artifacts.

use araoc_core::{Family, Grid, TaskScore, Variant};
use serde::{Deserialize, Serialize};

pub const SKIPPED_NO_RULE: &str = "SkippedNoRule";

/// One model (or oracle) answer. `raw_response` is stored verbatim; it is
/// absent when the request failed after all retries.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResponseRecord {
    pub task_id: String,
    pub raw_response: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Output of the oracle solver. Readable as a [`ResponseRecord`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub task_id: String,
    pub raw_response: Option<String>,
    pub parsed: Option<Grid>,
    pub failure_reason: Option<String>,
    pub exact: bool,
    pub shape_match: bool,
}

/// One scored task as written by `eval`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub task_id: String,
    #[serde(default)]
    pub family: Option<Family>,
    #[serde(default)]
    pub variant: Option<Variant>,
    pub exact: bool,
    pub shape_match: bool,
    pub parse_ok: bool,
    #[serde(default)]
    pub failure_reason: Option<String>,
}

impl ResultRecord {
    pub fn from_score(score: &TaskScore, failure_reason: Option<String>) -> Self {
        ResultRecord {
            task_id: score.task_id.clone(),
            family: score.family,
            variant: score.variant,
            exact: score.exact,
            shape_match: score.shape_match,
            parse_ok: score.parse_ok,
            failure_reason,
        }
    }
}
