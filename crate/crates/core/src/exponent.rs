use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Interaction exponent `x` of the energy `F(a) = a^x`.
///
/// Restricted to even values so that the energy is invariant under a global
/// spin flip.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct Exponent(u32);

impl Exponent {
    pub fn new(x: u32) -> Result<Self> {
        if x < 2 || !x.is_multiple_of(2) {
            return Err(Error::InvalidExponent(x));
        }
        Ok(Self(x))
    }

    pub fn get(self) -> u32 {
        self.0
    }

    /// `x - 1`, the power appearing in the local field.
    pub fn field_power(self) -> i32 {
        self.0 as i32 - 1
    }
}

impl TryFrom<u32> for Exponent {
    type Error = Error;

    fn try_from(x: u32) -> Result<Self> {
        Self::new(x)
    }
}

impl From<Exponent> for u32 {
    fn from(x: Exponent) -> u32 {
        x.0
    }
}

impl std::fmt::Display for Exponent {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}
