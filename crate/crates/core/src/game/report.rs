use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_rational::BigRational;
use num_traits::ToPrimitive;

use super::{Estimate, PlayerId};
use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    ExactSubset,
    ExactPermutation,
    ExactPoly,
    McAdditive,
    McMultiplicative,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::ExactSubset => "exact-subset",
            Method::ExactPermutation => "exact-permutation",
            Method::ExactPoly => "exact-poly",
            Method::McAdditive => "mc-additive",
            Method::McMultiplicative => "mc-multiplicative",
        }
    }

    pub fn is_exact(self) -> bool {
        matches!(
            self,
            Method::ExactSubset | Method::ExactPermutation | Method::ExactPoly
        )
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        [
            Method::ExactSubset,
            Method::ExactPermutation,
            Method::ExactPoly,
            Method::McAdditive,
            Method::McMultiplicative,
        ]
        .into_iter()
        .find(|m| m.as_str() == s)
        .ok_or_else(|| Error::InvalidParameter(format!("unknown method `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PlayerValue {
    Exact(BigRational),
    Sampled(Estimate),
}

impl PlayerValue {
    pub fn to_f64(&self) -> f64 {
        match self {
            PlayerValue::Exact(r) => r.to_f64().unwrap_or(f64::NAN),
            PlayerValue::Sampled(e) => e.value,
        }
    }

    pub fn exact(&self) -> Option<&BigRational> {
        match self {
            PlayerValue::Exact(r) => Some(r),
            PlayerValue::Sampled(_) => None,
        }
    }

    fn compare(&self, other: &Self) -> Ordering {
        match (self, other) {
            (PlayerValue::Exact(a), PlayerValue::Exact(b)) => a.cmp(b),
            _ => self.to_f64().total_cmp(&other.to_f64()),
        }
    }
}

impl fmt::Display for PlayerValue {
    /// Exact values as reduced `num/den` (integers without denominator),
    /// sampled values as the shortest round-tripping decimal.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PlayerValue::Exact(r) => write!(f, "{r}"),
            PlayerValue::Sampled(e) => write!(f, "{}", e.value),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlayerReport {
    pub id: PlayerId,
    pub value: PlayerValue,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShapleyReport {
    pub method: Method,
    pub players: Vec<PlayerReport>,
    pub flags: Vec<String>,
}

impl ShapleyReport {
    pub fn new(method: Method, players: Vec<PlayerReport>, flags: Vec<String>) -> Self {
        let mut report = ShapleyReport {
            method,
            players,
            flags,
        };
        report.sort();
        report
    }

    /// Descending value, then ascending id.
    pub fn sort(&mut self) {
        self.players
            .sort_by(|a, b| b.value.compare(&a.value).then_with(|| a.id.cmp(&b.id)));
    }

    pub fn get(&self, id: &str) -> Option<&PlayerValue> {
        self.players
            .iter()
            .find(|p| p.id.as_str() == id)
            .map(|p| &p.value)
    }

    pub fn exact_total(&self) -> Option<BigRational> {
        self.players
            .iter()
            .map(|p| p.value.exact().cloned())
            .sum::<Option<BigRational>>()
    }
}
