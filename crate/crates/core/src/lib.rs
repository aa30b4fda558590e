pub mod channel;
pub mod cli;
pub mod config;
pub mod detectors;
pub mod error;
pub mod io;
pub mod linalg;
pub mod montecarlo;
pub mod waveform;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/signal-formats.md")]
    mod signal_formats {}
    #[doc = include_str!("../../../book/src/eigenproblems.md")]
    mod eigenproblems {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    mod simulation {}
    #[doc = include_str!("../../../book/src/detectors.md")]
    mod detectors {}
    #[doc = include_str!("../../../book/src/monte-carlo.md")]
    mod monte_carlo {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
