//! Fixed-point-free involutions on endpoint labels.
//!
//! One type covers strand permutations, state permutations, closure
//! permutations and gluing permutations: all of them pair up labels.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

/// Globally unique endpoint label.
pub type Label = u32;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PairingError {
    #[error("label {0} is paired with itself")]
    FixedPoint(Label),
    #[error("label {0} appears in more than one transposition")]
    Repeated(Label),
    #[error("malformed transposition list: {0}")]
    Malformed(String),
    #[error("an odd number of labels ({0}) cannot be perfectly paired")]
    OddCount(usize),
}

/// A set of disjoint transpositions, stored canonically as `(low, high)`
/// pairs sorted by `low`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pairing {
    pairs: Vec<(Label, Label)>,
}

impl Pairing {
    pub fn new<I>(pairs: I) -> Result<Self, PairingError>
    where
        I: IntoIterator<Item = (Label, Label)>,
    {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for (a, b) in pairs {
            if a == b {
                return Err(PairingError::FixedPoint(a));
            }
            for l in [a, b] {
                if !seen.insert(l) {
                    return Err(PairingError::Repeated(l));
                }
            }
            out.push((a.min(b), a.max(b)));
        }
        out.sort_unstable();
        Ok(Self { pairs: out })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    /// Builds from a partner table over `labels`: `labels[i]` is paired with
    /// `labels[partner[i]]`. The table must be an involution without fixed
    /// points; this is not rechecked.
    pub(crate) fn from_partner_table(labels: &[Label], partner: &[u16]) -> Self {
        let mut pairs = Vec::with_capacity(labels.len() / 2);
        for (i, &j) in partner.iter().enumerate() {
            if i < j as usize {
                let (a, b) = (labels[i], labels[j as usize]);
                pairs.push((a.min(b), a.max(b)));
            }
        }
        pairs.sort_unstable();
        Self { pairs }
    }

    /// Uniformly random perfect matching of `labels`.
    pub fn random<R: Rng + ?Sized>(labels: &[Label], rng: &mut R) -> Result<Self, PairingError> {
        if !labels.len().is_multiple_of(2) {
            return Err(PairingError::OddCount(labels.len()));
        }
        let mut ls = labels.to_vec();
        ls.shuffle(rng);
        Self::new(ls.chunks(2).map(|c| (c[0], c[1])))
    }

    /// Every perfect matching of `labels`, in lexicographic order.
    pub fn all_on(labels: &[Label]) -> Vec<Pairing> {
        fn rec(rest: &[Label], acc: &mut Vec<(Label, Label)>, out: &mut Vec<Pairing>) {
            if rest.is_empty() {
                let mut pairs = acc.clone();
                pairs.sort_unstable();
                out.push(Pairing { pairs });
                return;
            }
            let first = rest[0];
            for k in 1..rest.len() {
                let mut next: Vec<Label> = rest[1..].to_vec();
                let partner = next.remove(k - 1);
                acc.push((first.min(partner), first.max(partner)));
                rec(&next, acc, out);
                acc.pop();
            }
        }
        let mut sorted = labels.to_vec();
        sorted.sort_unstable();
        let mut out = Vec::new();
        if sorted.len().is_multiple_of(2) {
            rec(&sorted, &mut Vec::new(), &mut out);
        }
        out
    }

    pub fn pairs(&self) -> &[(Label, Label)] {
        &self.pairs
    }

    /// Number of transpositions.
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn partner(&self, l: Label) -> Option<Label> {
        self.pairs.iter().find_map(|&(a, b)| {
            if a == l {
                Some(b)
            } else if b == l {
                Some(a)
            } else {
                None
            }
        })
    }

    /// Moved labels, ascending.
    pub fn labels(&self) -> Vec<Label> {
        let mut v: Vec<Label> = self.pairs.iter().flat_map(|&(a, b)| [a, b]).collect();
        v.sort_unstable();
        v
    }

    /// True when the moved labels are exactly `labels` (any order).
    pub fn covers_exactly(&self, labels: &[Label]) -> bool {
        let mut want = labels.to_vec();
        want.sort_unstable();
        self.labels() == want
    }

    /// Relabels every label through `f`.
    pub fn map_labels(&self, mut f: impl FnMut(Label) -> Label) -> Result<Self, PairingError> {
        Self::new(self.pairs.iter().map(|&(a, b)| (f(a), f(b))))
    }

    /// The conjugate `sigma . self . sigma`, restricted to the labels that
    /// `sigma` sends into the support of `self`.
    pub fn conjugate_by(&self, sigma: &Pairing) -> Result<Self, PairingError> {
        let image: Vec<(Label, Label)> = self
            .pairs
            .iter()
            .map(|&(a, b)| (sigma.partner(a).unwrap_or(a), sigma.partner(b).unwrap_or(b)))
            .collect();
        Self::new(image)
    }

    pub fn union(&self, other: &Pairing) -> Result<Self, PairingError> {
        Self::new(self.pairs.iter().chain(other.pairs.iter()).copied())
    }
}

impl fmt::Display for Pairing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.pairs.is_empty() {
            return f.write_str("()");
        }
        for (a, b) in &self.pairs {
            write!(f, "({a} {b})")?;
        }
        Ok(())
    }
}

/// Parses the command-line form `"a-b,c-d,..."`.
impl FromStr for Pairing {
    type Err = PairingError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() {
            return Ok(Self::empty());
        }
        let mut pairs = Vec::new();
        for part in s.split(',') {
            let (a, b) = part
                .split_once('-')
                .ok_or_else(|| PairingError::Malformed(part.to_string()))?;
            let a: Label = a
                .trim()
                .parse()
                .map_err(|_| PairingError::Malformed(part.to_string()))?;
            let b: Label = b
                .trim()
                .parse()
                .map_err(|_| PairingError::Malformed(part.to_string()))?;
            pairs.push((a, b));
        }
        Self::new(pairs)
    }
}
