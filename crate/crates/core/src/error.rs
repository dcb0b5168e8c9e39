use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation (bad label,
    /// wrong parity, mismatched screen sizes, ...).
    #[error("{0}")]
    Domain(String),
    /// A file did not match the expected layout.
    #[error("format error: {0}")]
    Format(String),
    /// A numerical self-check failed; this points at a bug, not at bad input.
    #[error("numerical consistency error: {0}")]
    Consistency(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("image codec: {0}")]
    Codec(#[from] image::ImageError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

impl Error {
    /// True when the operating system failed the request, as opposed to the
    /// file contents being wrong.
    pub fn is_io(&self) -> bool {
        match self {
            Self::Io(_) | Self::Codec(image::ImageError::IoError(_)) => true,
            Self::Csv(e) => matches!(e.kind(), csv::ErrorKind::Io(_)),
            _ => false,
        }
    }
}
