//! File formats, reports, seeded sampling and parallel verification on top of
//! `kmslab-core`, and the library side of the `kmslab` binary.

pub mod commands;
pub mod formats;
pub mod report;
pub mod sampling;
pub mod verify;

pub use kmslab_core as core;

use kmslab_core::Error;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("input error: {0}")]
    Input(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("{0}")]
    Core(#[from] Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::Domain(_) => EXIT_DOMAIN,
            CliError::Core(e) => match e {
                Error::Format(_)
                | Error::InvalidWord(_)
                | Error::InvalidArgument(_)
                | Error::Resolution { .. }
                | Error::NegativeCoefficient
                | Error::NotHomogeneous
                | Error::DimensionCap { .. }
                | Error::TooManyPaths { .. } => EXIT_INPUT,
                Error::Sink { .. }
                | Error::NoCycle
                | Error::SubcriticalTemperature { .. }
                | Error::NoAdmissibleSplit { .. }
                | Error::ZeroMeasure
                | Error::NoCriticalVertex { .. }
                | Error::TailBoundUnavailable { .. } => EXIT_DOMAIN,
                Error::Singular => EXIT_FAILURE,
            },
        }
    }
}

/// Thread cap from `KMSLAB_THREADS`; unset or unparsable means rayon's default.
pub fn thread_cap() -> Option<usize> {
    std::env::var("KMSLAB_THREADS").ok()?.trim().parse().ok().filter(|&n: &usize| n > 0)
}
