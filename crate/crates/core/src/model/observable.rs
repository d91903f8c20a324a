use crate::error::{invalid_argument, Error, Result};
use crate::model::ReactionNetwork;

/// The test function `f` whose expectation at the horizon is estimated.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Observable {
    /// `x_i`
    Component(usize),
    /// `x_i * x_j`; `Product(i, i)` gives a second moment.
    Product(usize, usize),
    /// `1` if `lo <= x_i <= hi`, else `0`.
    Indicator { species: usize, lo: f64, hi: f64 },
}

impl Observable {
    pub fn component(network: &ReactionNetwork, i: usize) -> Result<Self> {
        check_index(network, i)?;
        Ok(Observable::Component(i))
    }

    pub fn product(network: &ReactionNetwork, i: usize, j: usize) -> Result<Self> {
        check_index(network, i)?;
        check_index(network, j)?;
        Ok(Observable::Product(i, j))
    }

    pub fn indicator(network: &ReactionNetwork, i: usize, lo: f64, hi: f64) -> Result<Self> {
        check_index(network, i)?;
        if !(lo <= hi) {
            return Err(invalid_argument("indicator interval needs lo <= hi"));
        }
        Ok(Observable::Indicator { species: i, lo, hi })
    }

    /// Checks that every index refers to a species of `network`.
    pub fn validate(&self, network: &ReactionNetwork) -> Result<()> {
        match *self {
            Observable::Component(i) => check_index(network, i),
            Observable::Product(i, j) => check_index(network, i).and(check_index(network, j)),
            Observable::Indicator { species, lo, hi } => {
                check_index(network, species)?;
                if lo <= hi {
                    Ok(())
                } else {
                    Err(invalid_argument("indicator interval needs lo <= hi"))
                }
            }
        }
    }

    #[inline]
    pub fn evaluate(&self, counts: &[i64]) -> f64 {
        match *self {
            Observable::Component(i) => counts[i] as f64,
            Observable::Product(i, j) => counts[i] as f64 * counts[j] as f64,
            Observable::Indicator { species, lo, hi } => {
                let x = counts[species] as f64;
                if lo <= x && x <= hi {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

fn check_index(network: &ReactionNetwork, i: usize) -> Result<()> {
    if i < network.dimension() {
        Ok(())
    } else {
        Err(Error::IndexOutOfRange {
            index: i,
            limit: network.dimension(),
        })
    }
}
