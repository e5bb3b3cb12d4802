//! Closed-form optimal flipping sequences for `-I_n` when `n ≡ 1 (mod 4)`.
//!
//! Each sequence is three parts: `W` (wastes splitting the stack into clans of
//! size two, then a full flip), `A` (improves turning clans into blocks) and
//! `B` (improves merging blocks into `I_n`). Which closed form applies depends
//! on `n mod 12`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    /// `n ≡ 1 (mod 12)`, `n ≥ 37`.
    S1,
    /// `n ≡ 5 (mod 12)`, `n ≥ 29`.
    S5,
    /// `n ≡ 9 (mod 12)`, `n ≥ 33`.
    S9,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::S1, Family::S5, Family::S9];

    pub fn min_n(self) -> usize {
        match self {
            Family::S1 => 37,
            Family::S5 => 29,
            Family::S9 => 33,
        }
    }

    pub fn residue(self) -> usize {
        match self {
            Family::S1 => 1,
            Family::S5 => 5,
            Family::S9 => 9,
        }
    }

    /// `(|W|, |A|, |B|)` at `s = 0`; each part grows by `6s`.
    fn base_lengths(self) -> (usize, usize, usize) {
        match self {
            Family::S1 => (20, 19, 18),
            Family::S5 => (16, 15, 14),
            Family::S9 => (18, 17, 16),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::S1 => "S1",
            Family::S5 => "S5",
            Family::S9 => "S9",
        })
    }
}

impl FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "S1" | "s1" => Ok(Family::S1),
            "S5" | "s5" => Ok(Family::S5),
            "S9" | "s9" => Ok(Family::S9),
            other => Err(format!("unknown family tag {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum FamilyError {
    #[error("even n: T(n) ∈ {{3n/2+1, 3n/2+2}}, no sequence family")]
    EvenN { n: usize },
    #[error("n = {n} ≡ 3 (mod 4): not covered by the S1/S5/S9 families")]
    ResidueThreeMod4NotCovered { n: usize },
    #[error("n = {n} is below the minimum {min} of family {family}")]
    BelowMinimum { n: usize, family: Family, min: usize },
}

pub fn family_of(n: usize) -> Result<Family, FamilyError> {
    if n % 2 == 0 {
        return Err(FamilyError::EvenN { n });
    }
    if n % 4 == 3 {
        return Err(FamilyError::ResidueThreeMod4NotCovered { n });
    }
    let family = match n % 12 {
        1 => Family::S1,
        5 => Family::S5,
        9 => Family::S9,
        _ => unreachable!("odd n ≡ 1 (mod 4) is 1, 5 or 9 mod 12"),
    };
    if n < family.min_n() {
        return Err(FamilyError::BelowMinimum { n, family, min: family.min_n() });
    }
    Ok(family)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenParams {
    pub n: usize,
    pub family: Family,
    pub s: usize,
}

impl GenParams {
    pub fn new(n: usize) -> Result<Self, FamilyError> {
        let family = family_of(n)?;
        Ok(Self { n, family, s: (n - family.min_n()) / 12 })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Phase {
    W1,
    W2,
    W3,
    W4,
    W5,
    W6,
    A1,
    A2,
    A3,
    A4,
    A5,
    B1,
    B2,
    B3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Part {
    W,
    A,
    B,
}

impl Phase {
    pub fn part(self) -> Part {
        use Phase::*;
        match self {
            W1 | W2 | W3 | W4 | W5 | W6 => Part::W,
            A1 | A2 | A3 | A4 | A5 => Part::A,
            B1 | B2 | B3 => Part::B,
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl FromStr for Phase {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        use Phase::*;
        Ok(match s {
            "W1" => W1,
            "W2" => W2,
            "W3" => W3,
            "W4" => W4,
            "W5" => W5,
            "W6" => W6,
            "A1" => A1,
            "A2" => A2,
            "A3" => A3,
            "A4" => A4,
            "A5" => A5,
            "B1" => B1,
            "B2" => B2,
            "B3" => B3,
            other => return Err(format!("unknown phase tag {other:?}")),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotatedSeq {
    pub n: usize,
    pub family: Family,
    pub items: Vec<(usize, Phase)>,
}

impl AnnotatedSeq {
    pub fn flips(&self) -> Vec<usize> {
        self.items.iter().map(|&(k, _)| k).collect()
    }

    pub fn phases(&self) -> Vec<Phase> {
        self.items.iter().map(|&(_, p)| p).collect()
    }

    pub fn part(&self, part: Part) -> Vec<usize> {
        self.items.iter().filter(|(_, p)| p.part() == part).map(|&(k, _)| k).collect()
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

/// `(|W|, |A|, |B|)` for the sequence of size `n`.
pub fn expected_lengths(n: usize) -> Result<(usize, usize, usize), FamilyError> {
    let p = GenParams::new(n)?;
    let (w, a, b) = p.family.base_lengths();
    Ok((w + 6 * p.s, a + 6 * p.s, b + 6 * p.s))
}

struct Emitter {
    n: i64,
    items: Vec<(usize, Phase)>,
}

impl Emitter {
    fn push(&mut self, phase: Phase, flips: &[i64]) {
        for &k in flips {
            assert!((1..=self.n).contains(&k), "generated flip {k} outside 1..={} in {phase}", self.n);
            self.items.push((k as usize, phase));
        }
    }
}

/// Exact quotient; the family residues guarantee divisibility.
fn exact_div(num: i64, den: i64) -> i64 {
    assert_eq!(num % den, 0, "{num} is not divisible by {den}");
    num / den
}

pub fn generate(n: usize) -> Result<AnnotatedSeq, FamilyError> {
    use Phase::*;
    let p = GenParams::new(n)?;
    let s = p.s as i64;
    let n = n as i64;
    let h = exact_div(n - 1, 2);
    let mut e = Emitter { n, items: Vec::with_capacity((3 * n as usize + 3) / 2) };

    match p.family {
        Family::S1 => {
            e.push(W1, &[n, n - 9, n - 21, n - 13, n - 15]);
            for i in 0..2 * s {
                e.push(W2, &[n - 39 - 6 * i]);
            }
            for i in 0..s {
                e.push(W3, &[6 + 12 * i]);
            }
            e.push(W4, &[n - 19, 10, n - 1, n - 13, n - 15, 14, n - 9, n - 19, n - 15, 12, n - 3, 2, 14, n - 17]);
            for i in 0..s {
                e.push(W5, &[6, 4, n - 39 - 12 * i]);
            }
            e.push(W6, &[n]);

            e.push(A1, &[6, 32, 14, 20, 10, 2, 28, 4, 30, 8]);
            for i in 0..s {
                e.push(A2, &[44 + 12 * i, 4, 6]);
            }
            e.push(A3, &[n - 1]);
            for i in 0..s {
                e.push(A4, &[n - 9 - 6 * i, n - 11 - 12 * i, n - 5 - 6 * i]);
            }
            e.push(A5, &[h, h + 4, h - 2, 10, h - 4, h + 2, h + 8, n]);

            let t = exact_div(2 * n + 1, 3);
            e.push(B1, &[t + 3]);
            for i in 0..s {
                e.push(B2, &[t - 3 - 8 * i, t - 1 - 8 * i, t + 7 + 4 * i, 6 + 12 * i, 4 + 12 * i, t + 3 + 4 * i]);
            }
            e.push(
                B3,
                &[10, 24, 2, n - 3, n - 15, n - 19, n - 17, n - 11, n - 27, n - 9, n - 1, n - 21, n - 9, 4, 6, 18, 14],
            );
        }
        Family::S5 => {
            e.push(W1, &[n, n - 9, 4, 10, n - 3, n - 15, n - 25]);
            for i in 0..2 * s {
                e.push(W2, &[n - 31 - 6 * i]);
            }
            for i in 0..s {
                e.push(W3, &[6 + 12 * i]);
            }
            e.push(W4, &[n - 7, n - 1, n - 11, 6, 4, n - 5, 10, n - 15]);
            for i in 0..s {
                e.push(W5, &[6, 4, n - 31 - 12 * i]);
            }
            e.push(W6, &[n]);

            e.push(A1, &[18, 20, 12, 4, 6, 24, 16, 26, 16, 4, 18]);
            for i in 0..s {
                e.push(A2, &[36 + 12 * i, 4, 6]);
            }
            e.push(A3, &[n - 1]);
            for i in 0..s {
                e.push(A4, &[n - 9 - 6 * i, n - 11 - 12 * i, n - 5 - 6 * i]);
            }
            e.push(A5, &[h - 6, h + 6, n]);

            let t = exact_div(2 * n - 1, 3);
            e.push(B1, &[t - 3]);
            for i in 0..s {
                e.push(B2, &[t - 9 - 8 * i, t - 7 - 8 * i, t + 1 + 4 * i, 6 + 12 * i, 4 + 12 * i, t - 3 + 4 * i]);
            }
            e.push(B3, &[12, n - 5, 4, n - 13, n - 15, n - 21, n - 25, n - 11, n - 9, n - 1, 6, 4, 14]);
        }
        Family::S9 => {
            e.push(W1, &[n, 14, 4, 10, n - 7, n - 29]);
            for i in 0..2 * s {
                e.push(W2, &[n - 35 - 6 * i]);
            }
            for i in 0..s {
                e.push(W3, &[6 + 12 * i]);
            }
            e.push(W4, &[n - 11, n - 1, n - 9, 4, n - 13, n - 11, 8, 10, n - 5, 10, n - 19]);
            for i in 0..s {
                e.push(W5, &[6, 4, n - 35 - 12 * i]);
            }
            e.push(W6, &[n]);

            e.push(A1, &[24, 16, 14, 4]);
            for i in 0..s {
                e.push(A2, &[40 + 12 * i, 4, 6]);
            }
            e.push(A3, &[n - 1]);
            for i in 0..s {
                e.push(A4, &[n - 9 - 6 * i, n - 11 - 12 * i, n - 5 - 6 * i]);
            }
            e.push(A5, &[h + 10, 12, 10, 4, 14, 22, 6, 24, h + 14, h - 6, h, n]);

            let t = exact_div(2 * n, 3);
            e.push(B1, &[t]);
            for i in 0..s {
                e.push(B2, &[t - 6 - 8 * i, t - 4 - 8 * i, t + 4 + 4 * i, 6 + 12 * i, 4 + 12 * i, t + 4 * i]);
            }
            e.push(B3, &[18, n - 5, n - 19, n - 13, 8, n - 19, n - 29, n - 9, 14, n - 1, n - 17, n - 13, 10, 4, n - 9]);
        }
    }

    Ok(AnnotatedSeq { n: p.n, family: p.family, items: e.items })
}

/// Every `n` in `lo..=hi` that has a sequence family.
pub fn valid_sizes(lo: usize, hi: usize) -> impl Iterator<Item = usize> {
    (lo..=hi).filter(|&n| family_of(n).is_ok())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_examples() {
        assert_eq!(family_of(53), Ok(Family::S5));
        assert_eq!(family_of(61), Ok(Family::S1));
        assert_eq!(family_of(57), Ok(Family::S9));
        assert_eq!(family_of(23), Err(FamilyError::ResidueThreeMod4NotCovered { n: 23 }));
        assert_eq!(family_of(24), Err(FamilyError::EvenN { n: 24 }));
        assert_eq!(family_of(25), Err(FamilyError::BelowMinimum { n: 25, family: Family::S1, min: 37 }));
        assert_eq!(family_of(17), Err(FamilyError::BelowMinimum { n: 17, family: Family::S5, min: 29 }));
        assert_eq!(family_of(29), Ok(Family::S5));
        assert_eq!(family_of(33), Ok(Family::S9));
        assert_eq!(family_of(37), Ok(Family::S1));
    }

    #[test]
    fn opening_flips() {
        assert_eq!(generate(53).unwrap().flips()[..7], [53, 44, 4, 10, 50, 38, 28]);
        assert_eq!(generate(61).unwrap().flips()[..5], [61, 52, 40, 48, 46]);
        assert_eq!(generate(57).unwrap().flips()[..6], [57, 14, 4, 10, 50, 28]);
    }

    #[test]
    fn length_formulas() {
        assert_eq!(expected_lengths(37), Ok((20, 19, 18)));
        assert_eq!(expected_lengths(29), Ok((16, 15, 14)));
        assert_eq!(expected_lengths(53), Ok((28, 27, 26)));
        assert_eq!(expected_lengths(33), Ok((18, 17, 16)));
        for n in valid_sizes(29, 400) {
            let (w, a, b) = expected_lengths(n).unwrap();
            assert_eq!(w + a + b, (3 * n + 3) / 2, "n = {n}");
            let seq = generate(n).unwrap();
            assert_eq!(seq.part(Part::W).len(), w, "n = {n}");
            assert_eq!(seq.part(Part::A).len(), a, "n = {n}");
            assert_eq!(seq.part(Part::B).len(), b, "n = {n}");
        }
    }

    #[test]
    fn empty_indexed_steps_at_s0() {
        for n in [29, 33, 37] {
            let seq = generate(n).unwrap();
            for phase in [Phase::W2, Phase::W3, Phase::W5, Phase::A2, Phase::A4, Phase::B2] {
                assert!(seq.items.iter().all(|&(_, p)| p != phase), "n = {n}, {phase}");
            }
        }
    }

    #[test]
    fn phase_tags_round_trip_text() {
        for p in [Phase::W1, Phase::A5, Phase::B3] {
            assert_eq!(p.to_string().parse::<Phase>(), Ok(p));
        }
        assert_eq!("S9".parse::<Family>(), Ok(Family::S9));
        assert!("S3".parse::<Family>().is_err());
    }
}
