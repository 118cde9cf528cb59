use serde::Serialize;
use sublaser_core::ErrorKind;

/// A failure reported on stderr as JSON; `kind` selects the exit code.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CliError {
    pub code: String,
    pub message: String,
    #[serde(serialize_with = "kind_name")]
    pub kind: ErrorKind,
}

fn kind_name<S: serde::Serializer>(kind: &ErrorKind, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(match kind {
        ErrorKind::Validation => "validation",
        ErrorKind::Numerical => "numerical",
    })
}

impl CliError {
    pub fn new(code: &str, message: impl Into<String>) -> Self {
        CliError {
            code: code.to_owned(),
            message: message.into(),
            kind: ErrorKind::Validation,
        }
    }

    pub fn config(message: impl Into<String>) -> Self {
        Self::new("invalid_config", message)
    }

    pub fn io(message: impl Into<String>) -> Self {
        Self::new("io_error", message)
    }

    pub fn exit_code(&self) -> u8 {
        match self.kind {
            ErrorKind::Validation => 1,
            ErrorKind::Numerical => 2,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::json!({ "error": self }).to_string()
    }
}

impl From<sublaser_core::Error> for CliError {
    fn from(e: sublaser_core::Error) -> Self {
        CliError {
            code: e.code().to_owned(),
            message: e.to_string(),
            kind: e.kind(),
        }
    }
}

macro_rules! via_core {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                sublaser_core::Error::from(e).into()
            }
        }
    )*};
}

via_core!(
    sublaser_core::ModelError,
    sublaser_core::spectra::SpectraError,
    sublaser_core::langevin::SimError,
    sublaser_core::protocols::ProtocolError
);
