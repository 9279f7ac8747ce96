//! Solver parameters and the two named profiles.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// An exact non-negative fraction, used as a multiple of the order n.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Fraction {
    pub num: u64,
    pub den: u64,
}

impl Fraction {
    pub const fn new(num: u64, den: u64) -> Self {
        assert!(den > 0, "zero denominator");
        Fraction { num, den }
    }

    pub fn value(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// `self * n` as a float, for the preflight arithmetic.
    pub fn times(self, n: usize) -> f64 {
        self.num as f64 * n as f64 / self.den as f64
    }

    /// Exact test `count <= self * n`.
    pub fn bounds(self, count: usize, n: usize) -> bool {
        (count as u128) * (self.den as u128) <= (self.num as u128) * (n as u128)
    }

    /// Exact test `count > self * n`.
    pub fn exceeded_by(self, count: usize, n: usize) -> bool {
        !self.bounds(count, n)
    }

    pub fn floor_times(self, n: usize) -> usize {
        ((self.num as u128 * n as u128) / self.den as u128) as usize
    }
}

impl fmt::Display for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl FromStr for Fraction {
    type Err = Error;

    /// Accepts `a/b`, integers, and plain decimals such as `0.05`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("not a fraction: {s:?}"));
        let s = s.trim();
        if let Some((a, b)) = s.split_once('/') {
            let num: u64 = a.trim().parse().map_err(|_| bad())?;
            let den: u64 = b.trim().parse().map_err(|_| bad())?;
            if den == 0 {
                return Err(bad());
            }
            return Ok(Fraction::new(num, den));
        }
        let (int, frac) = s.split_once('.').unwrap_or((s, ""));
        if frac.len() > 15 || !frac.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let den = 10u64.pow(frac.len() as u32);
        let int: u64 = if int.is_empty() { 0 } else { int.parse().map_err(|_| bad())? };
        let frac_v: u64 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| bad())? };
        let num = int.checked_mul(den).and_then(|x| x.checked_add(frac_v)).ok_or_else(bad)?;
        Ok(Fraction::new(num, den))
    }
}

impl Serialize for Fraction {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Fraction {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// `max(min, floor(slope * n))`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LinearFloor {
    pub slope: Fraction,
    pub min: usize,
}

impl LinearFloor {
    pub const fn new(slope: Fraction, min: usize) -> Self {
        LinearFloor { slope, min }
    }

    pub fn eval(&self, n: usize) -> usize {
        self.slope.floor_times(n).max(self.min)
    }
}

/// `mul * n + add`; the default is the 3n+7 exceptional-cell budget.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AffineBudget {
    pub mul: usize,
    pub add: usize,
}

impl AffineBudget {
    pub fn eval(&self, n: usize) -> usize {
        self.mul * n + self.add
    }
}

impl Default for AffineBudget {
    fn default() -> Self {
        AffineBudget { mul: 3, add: 7 }
    }
}

/// What the pipeline does when a step's guarantee is not met.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FallbackPolicy {
    /// Any unmet guarantee ends the solve with GaveUp.
    Strict,
    /// Accept the best scramble seen; trade predicates stay strict.
    BestEffort,
    /// Accept the best scramble and relax trade predicates tier by tier.
    Relaxed,
}

impl FromStr for FallbackPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "strict" => Ok(FallbackPolicy::Strict),
            "best-effort" => Ok(FallbackPolicy::BestEffort),
            "relaxed" => Ok(FallbackPolicy::Relaxed),
            _ => Err(Error::Parse(format!("unknown fallback policy {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Params {
    pub alpha: Fraction,
    pub beta: Fraction,
    pub epsilon: Fraction,
    pub k: Fraction,
    pub d: Fraction,
    pub c_of_n: LinearFloor,
    pub f_of_n: LinearFloor,
    pub exceptional_budget: AffineBudget,
    pub max_scramble_tries: usize,
    /// Extra scrambles tried when the fix loop gets stuck (non-strict policies).
    pub max_restarts: usize,
    pub rng_seed: u64,
    pub fallback_policy: FallbackPolicy,
    /// Orders up to this value are solved by exhaustive search.
    pub oracle_threshold: usize,
    pub oracle_max_nodes: u64,
}

impl Params {
    /// The constants of the asymptotic proof.
    pub fn paper() -> Self {
        Params {
            alpha: Fraction::new(1, 100_000),
            beta: Fraction::new(1, 100_000),
            epsilon: Fraction::new(1, 10_000),
            k: Fraction::new(1, 500),
            d: Fraction::new(1, 20),
            c_of_n: LinearFloor::new(Fraction::new(1, 35_000), 0),
            f_of_n: LinearFloor::new(Fraction::new(1, 17_500), 0),
            exceptional_budget: AffineBudget::default(),
            max_scramble_tries: 200,
            max_restarts: 0,
            rng_seed: 0,
            fallback_policy: FallbackPolicy::Strict,
            oracle_threshold: 8,
            oracle_max_nodes: 50_000_000,
        }
    }

    /// Constants sized so that the choice sets are non-empty from n ≈ 30.
    /// No completion guarantee holds under this profile.
    pub fn desk() -> Self {
        Params {
            alpha: Fraction::new(1, 20),
            beta: Fraction::new(1, 20),
            epsilon: Fraction::new(1, 10),
            k: Fraction::new(1, 10),
            d: Fraction::new(1, 4),
            c_of_n: LinearFloor::new(Fraction::new(1, 20), 1),
            f_of_n: LinearFloor::new(Fraction::new(1, 10), 1),
            exceptional_budget: AffineBudget::default(),
            max_scramble_tries: 200,
            max_restarts: 3,
            rng_seed: 0,
            fallback_policy: FallbackPolicy::Relaxed,
            oracle_threshold: 8,
            oracle_max_nodes: 50_000_000,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.rng_seed = seed;
        self
    }

    pub fn c(&self, n: usize) -> usize {
        self.c_of_n.eval(n)
    }

    pub fn f(&self, n: usize) -> usize {
        self.f_of_n.eval(n)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, x) in [
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("epsilon", self.epsilon),
            ("k", self.k),
            ("d", self.d),
        ] {
            if x.num > x.den {
                return Err(Error::PreconditionViolated(format!("{name} = {x} exceeds 1")));
            }
        }
        Ok(())
    }
}

impl Default for Params {
    fn default() -> Self {
        Params::desk()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_forms() {
        assert_eq!("1/20".parse::<Fraction>().unwrap(), Fraction::new(1, 20));
        assert_eq!("0.05".parse::<Fraction>().unwrap(), Fraction::new(5, 100));
        assert_eq!("2".parse::<Fraction>().unwrap(), Fraction::new(2, 1));
        assert!("1/0".parse::<Fraction>().is_err());
        assert!("x".parse::<Fraction>().is_err());
    }

    #[test]
    fn exact_bounds() {
        let tenth = Fraction::new(1, 10);
        assert!(tenth.bounds(1, 10));
        assert!(!tenth.bounds(2, 10));
        assert!(Fraction::new(1, 20).bounds(3, 60));
    }

    #[test]
    fn profile_functions() {
        let p = Params::paper();
        assert_eq!(p.c(100), 0);
        assert_eq!(p.c(1_000_000), 28);
        assert_eq!(p.f(1_000_000), 57);
        let d = Params::desk();
        assert_eq!(d.c(10), 1);
        assert_eq!(d.c(60), 3);
        assert_eq!(d.f(60), 6);
        assert_eq!(d.exceptional_budget.eval(9), 34);
    }

    #[test]
    fn serde_uses_strings() {
        let s = serde_json::to_string(&Fraction::new(1, 20)).unwrap();
        assert_eq!(s, "\"1/20\"");
    }
}
