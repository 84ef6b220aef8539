use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParam { name: &'static str, reason: String },

    /// Integration produced NaN or infinity; `time` is the first step at which
    /// it was observed.
    #[error("state became non-finite at t = {time}")]
    NonFinite { time: f64 },

    #[error("phase undefined at the origin of phase space{}", fmt_time(*.time))]
    DegeneratePhase { time: Option<f64> },

    #[error("measure denominator {value:e} is not positive (unphysical covariance)")]
    NonPositiveDenominator { value: f64 },

    #[error("averaging window is empty")]
    EmptyWindow,

    #[error("trajectory too short: need {needed} time units, have {available}")]
    TooShort { needed: f64, available: f64 },

    #[error("unknown recipe `{0}`")]
    UnknownRecipe(String),

    #[error("config error{}{}: {msg}", fmt_line(*.line), fmt_key(.key.as_deref()))]
    ConfigParse {
        line: Option<usize>,
        key: Option<String>,
        msg: String,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

fn fmt_time(t: Option<f64>) -> String {
    t.map(|t| format!(" at t = {t}")).unwrap_or_default()
}

fn fmt_line(line: Option<usize>) -> String {
    line.map(|l| format!(" at line {l}")).unwrap_or_default()
}

fn fmt_key(key: Option<&str>) -> String {
    key.map(|k| format!(" (key `{k}`)")).unwrap_or_default()
}

impl Error {
    /// Short stable identifier, used in sweep status columns.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidParam { .. } => "invalid_param",
            Error::NonFinite { .. } => "non_finite",
            Error::DegeneratePhase { .. } => "degenerate_phase",
            Error::NonPositiveDenominator { .. } => "non_positive_denominator",
            Error::EmptyWindow => "empty_window",
            Error::TooShort { .. } => "too_short",
            Error::UnknownRecipe(_) => "unknown_recipe",
            Error::ConfigParse { .. } => "config_parse",
            Error::Io(_) => "io",
            Error::Csv(_) => "csv",
            Error::Json(_) => "json",
        }
    }

    pub(crate) fn config(line: Option<usize>, key: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::ConfigParse {
            line,
            key: Some(key.into()),
            msg: msg.into(),
        }
    }
}
