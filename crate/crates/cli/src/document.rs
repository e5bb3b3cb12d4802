//! Sequence documents: JSON, or a line-oriented text form.
//!
//! ```text
//! # comments are ignored
//! n 53
//! family S5
//! provenance pancake 0.1.0 generate
//! W1: 53 44 4 10
//! W2: ...
//! ```
//!
//! Consecutive flips with the same phase share a line. A document without
//! phases uses a single `flips:` line.

use std::fmt::Write as _;

use anyhow::{bail, ensure, Context, Result};
use serde::{Deserialize, Serialize};

use pancake_core::{AnnotatedSeq, Family, Phase};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SequenceDocument {
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<Family>,
    pub flips: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phases: Option<Vec<Phase>>,
    #[serde(default)]
    pub provenance: String,
}

impl SequenceDocument {
    pub fn from_generated(seq: &AnnotatedSeq, provenance: String) -> Self {
        Self {
            n: seq.n,
            family: Some(seq.family),
            flips: seq.flips(),
            phases: Some(seq.phases()),
            provenance,
        }
    }

    /// Flip lengths in `1..=n`, phases parallel to flips.
    pub fn check(&self) -> Result<()> {
        ensure!(self.n >= 1, "n must be at least 1");
        if let Some(i) = self.flips.iter().position(|&k| k == 0 || k > self.n) {
            bail!("flip #{i} has length {}, outside 1..={}", self.flips[i], self.n);
        }
        if let Some(p) = &self.phases {
            ensure!(p.len() == self.flips.len(), "{} phase tags for {} flips", p.len(), self.flips.len());
        }
        Ok(())
    }

    /// JSON when the first non-blank character is `{`, text otherwise.
    pub fn parse(input: &str) -> Result<Self> {
        let doc = if input.trim_start().starts_with('{') {
            serde_json::from_str(input).context("malformed JSON document")?
        } else {
            Self::parse_text(input)?
        };
        doc.check()?;
        Ok(doc)
    }

    fn parse_text(input: &str) -> Result<Self> {
        let mut n = None;
        let mut family = None;
        let mut provenance = String::new();
        let mut flips = Vec::new();
        let mut phases = Vec::new();
        let mut untagged = false;
        for (i, raw) in input.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let at = || format!("line {}", i + 1);
            if let Some(rest) = line.strip_prefix("provenance") {
                provenance = rest.trim().to_string();
            } else if let Some((tag, values)) = line.split_once(':') {
                let tag = tag.trim();
                let phase = if tag == "flips" {
                    untagged = true;
                    None
                } else {
                    Some(tag.parse::<Phase>().map_err(anyhow::Error::msg).with_context(at)?)
                };
                for v in values.split(|c: char| c.is_whitespace() || c == ',').filter(|v| !v.is_empty()) {
                    flips.push(v.parse::<usize>().with_context(|| format!("{}: bad flip {v:?}", at()))?);
                    phases.extend(phase);
                }
            } else if let Some((key, value)) = line.split_once(char::is_whitespace) {
                match key {
                    "n" => n = Some(value.trim().parse::<usize>().with_context(|| format!("{}: bad n", at()))?),
                    "family" => family = Some(value.trim().parse::<Family>().map_err(anyhow::Error::msg).with_context(at)?),
                    _ => bail!("{}: unknown key {key:?}", at()),
                }
            } else {
                bail!("{}: cannot parse {line:?}", at());
            }
        }
        let n = n.context("document has no `n` line")?;
        ensure!(!(untagged && !phases.is_empty()), "document mixes tagged and untagged flips");
        let phases = (!untagged && !phases.is_empty()).then_some(phases);
        Ok(Self { n, family, flips, phases, provenance })
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        if !self.provenance.is_empty() {
            let _ = writeln!(out, "provenance {}", self.provenance);
        }
        let _ = writeln!(out, "n {}", self.n);
        if let Some(f) = self.family {
            let _ = writeln!(out, "family {f}");
        }
        let join = |ks: &[usize]| ks.iter().map(usize::to_string).collect::<Vec<_>>().join(" ");
        match &self.phases {
            None => {
                let _ = writeln!(out, "flips: {}", join(&self.flips));
            }
            Some(phases) => {
                let mut i = 0;
                while i < self.flips.len() {
                    let j = i + phases[i..].iter().take_while(|&&p| p == phases[i]).count();
                    let _ = writeln!(out, "{}: {}", phases[i], join(&self.flips[i..j]));
                    i = j;
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_and_json_round_trip() {
        let seq = pancake_core::generate(29).unwrap();
        let doc = SequenceDocument::from_generated(&seq, "test".into());
        assert_eq!(SequenceDocument::parse(&doc.to_text()).unwrap(), doc);
        assert_eq!(SequenceDocument::parse(&serde_json::to_string(&doc).unwrap()).unwrap(), doc);
    }

    #[test]
    fn untagged_flips() {
        let doc = SequenceDocument::parse("n 5\nflips: 5, 5\n").unwrap();
        assert_eq!(doc.flips, [5, 5]);
        assert_eq!(doc.phases, None);
    }

    #[test]
    fn rejects_bad_documents() {
        assert!(SequenceDocument::parse("flips: 1 2").is_err());
        assert!(SequenceDocument::parse("n 3\nflips: 4").is_err());
        assert!(SequenceDocument::parse("n 3\nX9: 1").is_err());
        assert!(SequenceDocument::parse("{\"n\": 3, \"flips\": [1], \"phases\": [\"W1\", \"W1\"]}").is_err());
        assert!(SequenceDocument::parse("{ not json").is_err());
    }
}
