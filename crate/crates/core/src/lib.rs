//! Neural-network text-to-speech pipeline: lexicon and tagging, letter-to-sound
//! and post-lexical networks, duration and acoustic networks, and an LPC
//! vocoder with mixed pulse/noise excitation.

pub mod acoustic;
pub mod align;
pub mod corpus;
pub mod error;
pub mod lexicon;
pub mod lingnets;
pub mod nn;
pub mod phonology;
pub mod pipeline;
pub mod prosody;
pub mod vocoder;

pub use error::{Error, Result};
