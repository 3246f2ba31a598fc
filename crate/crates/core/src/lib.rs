pub mod comonad;
pub mod ef;
pub mod equiv;
pub mod error;
pub mod game;
pub mod lawcheck;
pub mod modal;
pub mod params;
pub mod pebble;
pub mod structure;

pub use error::{Error, Result};
