//! Primitive two-letter substitutions whose tile endpoints give exact test patches.

use std::str::FromStr;

use super::{BoxRegion, PointSample};
use crate::error::{Error, Result};
use crate::exact_arith::QuadExt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubstitutionRule {
    /// `a → ab`, `b → a`; tiles of length τ and 1.
    Fibonacci,
    /// `a → aab`, `b → a`; tiles of length 1+√2 and 1.
    Silver,
}

impl FromStr for SubstitutionRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fibonacci" => Ok(SubstitutionRule::Fibonacci),
            "silver" => Ok(SubstitutionRule::Silver),
            other => Err(Error::UnknownRule(other.to_string())),
        }
    }
}

impl SubstitutionRule {
    fn image(self, letter: u8) -> &'static [u8] {
        match (self, letter) {
            (SubstitutionRule::Fibonacci, b'a') => b"ab",
            (SubstitutionRule::Silver, b'a') => b"aab",
            _ => b"a",
        }
    }

    /// Length of the `a` tile; the `b` tile has length 1.
    pub fn long_tile(self) -> QuadExt {
        match self {
            SubstitutionRule::Fibonacci => QuadExt::golden(),
            SubstitutionRule::Silver => QuadExt::silver(),
        }
    }

    /// The word obtained from `a` after `iterations` substitutions.
    pub fn word(self, iterations: u32) -> Vec<u8> {
        let mut w = vec![b'a'];
        for _ in 0..iterations {
            w = w.iter().flat_map(|&c| self.image(c).iter().copied()).collect();
        }
        w
    }
}

pub const MAX_ITERATIONS: u32 = 40;

/// Left endpoints of the tiles of the iterated word, starting at 0.
///
/// The sample is exact over the generators `{1, λ}` with `λ` the long tile;
/// a point's coordinates count the short and long tiles to its left.
pub fn substitution_generate(rule: &str, iterations: u32) -> Result<PointSample> {
    let rule: SubstitutionRule = rule.parse()?;
    if iterations == 0 || iterations > MAX_ITERATIONS {
        return Err(Error::InvalidArgument(format!(
            "iterations must lie in 1..={MAX_ITERATIONS}, got {iterations}"
        )));
    }
    let word = rule.word(iterations);
    let mut coords = Vec::with_capacity(word.len());
    let (mut short, mut long) = (0i64, 0i64);
    for &c in &word {
        coords.push(vec![short, long]);
        if c == b'a' {
            long += 1;
        } else {
            short += 1;
        }
    }
    let lambda = rule.long_tile();
    let total = QuadExt::int(short) + QuadExt::int(long) * lambda.clone();
    let region = BoxRegion::interval(0.0, total.to_f64().ceil())?;
    PointSample::exact(vec![vec![QuadExt::int(1)], vec![lambda]], coords, region)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_fibonacci_step() {
        let s = substitution_generate("fibonacci", 1).unwrap();
        assert_eq!(s.coords().unwrap(), &[vec![0, 0], vec![0, 1]]);
        assert_eq!(s.exact_position(1).unwrap()[0], QuadExt::golden());
    }

    #[test]
    fn fibonacci_counts_follow_the_fibonacci_numbers() {
        let (mut a, mut b) = (1usize, 2usize);
        for k in 1..=15 {
            assert_eq!(substitution_generate("fibonacci", k).unwrap().len(), b);
            (a, b) = (b, a + b);
        }
    }

    #[test]
    fn word_matches_direct_expansion() {
        assert_eq!(SubstitutionRule::Fibonacci.word(5), b"abaababaabaab".to_vec());
        assert_eq!(SubstitutionRule::Silver.word(2), b"aabaaba".to_vec());
    }

    #[test]
    fn unknown_rule_and_bounds() {
        assert!(matches!(substitution_generate("thue", 3), Err(Error::UnknownRule(_))));
        assert!(substitution_generate("silver", 0).is_err());
        assert!(substitution_generate("silver", 41).is_err());
    }
}
