use std::path::PathBuf;

use thiserror::Error;

use crate::annotate::AnnotateError;
use crate::assets::AssetError;
use crate::audit::AuditError;
use crate::config::ConfigError;
use crate::demography::DemographyError;
use crate::typeset::TypesetError;
use crate::warp::WarpError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Demography(#[from] DemographyError),
    #[error(transparent)]
    Typeset(#[from] TypesetError),
    #[error(transparent)]
    Asset(#[from] AssetError),
    #[error(transparent)]
    Annotate(#[from] AnnotateError),
    #[error(transparent)]
    Warp(#[from] WarpError),
    #[error(transparent)]
    Audit(#[from] AuditError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("sample {sample_id} failed annotation validation: {details}")]
    InvalidAnnotation { sample_id: String, details: String },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub fn image(path: impl Into<PathBuf>, source: image::ImageError) -> Self {
        Error::Image { path: path.into(), source }
    }

    pub fn json(path: impl Into<PathBuf>, source: serde_json::Error) -> Self {
        Error::Json { path: path.into(), source }
    }

    /// True for configuration problems (bad requirements, templates or asset
    /// databases) as opposed to runtime or I/O failures.
    pub fn is_config(&self) -> bool {
        let config = matches!(self, Error::Config(e) if !matches!(e, ConfigError::Io { .. }));
        config
            || matches!(self, Error::Typeset(TypesetError::Template { .. }))
            || matches!(self, Error::Demography(DemographyError::Database { .. }))
    }

    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. } | Error::Image { .. } | Error::Json { .. })
            || matches!(self, Error::Config(ConfigError::Io { .. }))
            || matches!(self, Error::Audit(AuditError::Io { .. }))
            || matches!(self, Error::Asset(AssetError::Io { .. }))
    }
}
