//! Brainwave band names and frequency ranges.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// The four brainwave bands.
///
/// Declaration order (`alpha < beta < delta < theta`) defines `Ord` and the
/// band order of every feature-vector layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BandName {
    Alpha,
    Beta,
    Delta,
    Theta,
}

impl BandName {
    /// All bands in layout order.
    pub const ALL: [BandName; 4] = [BandName::Alpha, BandName::Beta, BandName::Delta, BandName::Theta];

    pub fn name(&self) -> &'static str {
        match self {
            BandName::Alpha => "alpha",
            BandName::Beta => "beta",
            BandName::Delta => "delta",
            BandName::Theta => "theta",
        }
    }
}

impl fmt::Display for BandName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BandName {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        BandName::ALL
            .iter()
            .copied()
            .find(|b| b.name() == s)
            .ok_or_else(|| format!("unknown band `{s}`"))
    }
}

/// A band with its pass edges in Hz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandDefinition {
    pub name: BandName,
    pub low_hz: f64,
    pub high_hz: f64,
}

impl BandDefinition {
    /// The conventional range for one band: δ 0.5–4, θ 4–8, α 8–12, β 12–30 Hz.
    pub fn canonical(name: BandName) -> Self {
        let (low_hz, high_hz) = match name {
            BandName::Delta => (0.5, 4.0),
            BandName::Theta => (4.0, 8.0),
            BandName::Alpha => (8.0, 12.0),
            BandName::Beta => (12.0, 30.0),
        };
        Self { name, low_hz, high_hz }
    }

    /// True when `freq_hz` lies strictly inside the band.
    pub fn contains_strict(&self, freq_hz: f64) -> bool {
        freq_hz > self.low_hz && freq_hz < self.high_hz
    }
}
