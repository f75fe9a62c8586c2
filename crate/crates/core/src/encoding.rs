//! The link-id sequence language.
//!
//! Each transmission becomes the id of the link it crossed, in event order.
//! Token 0 means "no activity" (padding or masked), and the last id of the
//! vocabulary is reserved for the classification marker.

use std::ops::Range;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::traffic::{Link, LinkId, LinkMap, Trace};

/// Sequence lengths a dataset may use.
pub const SEQUENCE_LENGTHS: [usize; 5] = [256, 512, 1024, 2048, 4096];

pub const NO_ACTIVITY: u32 = 0;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenSequence {
    tokens: Vec<u32>,
    vocab_size: u32,
}

impl TokenSequence {
    pub fn new(tokens: Vec<u32>, vocab_size: u32) -> Result<Self> {
        if !SEQUENCE_LENGTHS.contains(&tokens.len()) {
            return Err(Error::BadLength(tokens.len()));
        }
        if let Some(t) = tokens.iter().find(|&&t| t >= vocab_size) {
            return Err(Error::config(format!("token {t} outside vocabulary of {vocab_size}")));
        }
        Ok(TokenSequence { tokens, vocab_size })
    }

    pub fn zeros(len: usize, vocab_size: u32) -> Result<Self> {
        TokenSequence::new(vec![NO_ACTIVITY; len], vocab_size)
    }

    pub fn tokens(&self) -> &[u32] {
        &self.tokens
    }

    pub fn into_tokens(self) -> Vec<u32> {
        self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn vocab_size(&self) -> u32 {
        self.vocab_size
    }

    pub fn cls_token(&self) -> u32 {
        self.vocab_size - 1
    }

    /// Positions carrying a transmission.
    pub fn active(&self) -> usize {
        let cls = self.cls_token();
        self.tokens.iter().filter(|&&t| t != NO_ACTIVITY && t != cls).count()
    }
}

/// A contiguous run of trace events.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub start: usize,
    pub len: usize,
}

impl Window {
    pub fn new(start: usize, len: usize) -> Self {
        Window { start, len }
    }

    pub fn range(&self) -> Range<usize> {
        self.start..self.start + self.len
    }
}

/// Encodes the events in `window` as a sequence of `length` tokens, padding
/// with zeros if the window is shorter.
pub fn encode(trace: &Trace, window: Window, length: usize, links: &LinkMap) -> Result<TokenSequence> {
    if !SEQUENCE_LENGTHS.contains(&length) {
        return Err(Error::BadLength(length));
    }
    let r = window.range();
    if r.end > trace.events.len() || window.len > length {
        return Err(Error::WindowOutOfRange { start: r.start, end: r.end, len: trace.events.len() });
    }
    let mut tokens = vec![NO_ACTIVITY; length];
    for (slot, ev) in tokens.iter_mut().zip(&trace.events[r]) {
        *slot = ev.link.0;
    }
    TokenSequence::new(tokens, links.vocab_size())
}

/// Recovers the adversary-visible link sequence, skipping inactive and
/// marker positions.
pub fn decode(seq: &TokenSequence, links: &LinkMap) -> Result<Vec<Link>> {
    let cls = seq.cls_token();
    seq.tokens
        .iter()
        .filter(|&&t| t != NO_ACTIVITY && t != cls)
        .map(|&t| links.link(LinkId(t)).ok_or_else(|| Error::config(format!("unknown link id {t}"))))
        .collect()
}

/// Zeroes everything outside `keep`; the length is unchanged.
pub fn mask_outside(seq: &TokenSequence, keep: Range<usize>) -> TokenSequence {
    let tokens = seq
        .tokens
        .iter()
        .enumerate()
        .map(|(i, &t)| if keep.contains(&i) { t } else { NO_ACTIVITY })
        .collect();
    TokenSequence { tokens, vocab_size: seq.vocab_size }
}

/// Picks the start of a uniformly random region of `target` positions in a
/// sequence of `len`.
pub fn mask_region<R: Rng>(len: usize, target: usize, rng: &mut R) -> Result<Range<usize>> {
    if target > len {
        return Err(Error::MaskTooLong { target, len });
    }
    let start = rng.random_range(0..=len - target);
    Ok(start..start + target)
}

/// Keeps a uniformly random contiguous region of `target` positions and
/// masks the rest with zeros. Returns the masked sequence and the region.
pub fn mask_to_length<R: Rng>(
    seq: &TokenSequence,
    target: usize,
    rng: &mut R,
) -> Result<(TokenSequence, Range<usize>)> {
    let region = mask_region(seq.len(), target, rng)?;
    Ok((mask_outside(seq, region.clone()), region))
}

/// Replaces the first token with the classification marker.
pub fn prepend_cls(seq: &TokenSequence) -> TokenSequence {
    let mut out = seq.clone();
    if let Some(first) = out.tokens.first_mut() {
        *first = seq.cls_token();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed;

    fn seq(tokens: &[u32], len: usize, vocab: u32) -> TokenSequence {
        let mut v = tokens.to_vec();
        v.resize(len, 0);
        TokenSequence::new(v, vocab).unwrap()
    }

    #[test]
    fn rejects_bad_lengths_and_tokens() {
        assert!(matches!(TokenSequence::new(vec![0; 100], 10), Err(Error::BadLength(100))));
        assert!(TokenSequence::new(vec![10; 256], 10).is_err());
    }

    #[test]
    fn empty_window_is_all_zero() {
        let trace = Trace::default();
        let links = crate::traffic::Topology::single(3, crate::mix::MixStrategy::threshold(2))
            .unwrap()
            .links()
            .clone();
        let s = encode(&trace, Window::new(0, 0), 256, &links).unwrap();
        assert!(s.tokens().iter().all(|&t| t == 0));
        assert!(encode(&trace, Window::new(0, 1), 256, &links).is_err());
    }

    #[test]
    fn cls_replaces_first_token() {
        let s = seq(&[5, 7, 7], 256, 9);
        let c = prepend_cls(&s);
        assert_eq!(&c.tokens()[..3], &[8, 7, 7]);
        assert_eq!(prepend_cls(&c), c);
        assert_eq!(c.active(), 2);
    }

    #[test]
    fn full_length_mask_is_identity() {
        let s = seq(&[1, 2, 3, 4], 4096, 9);
        let mut rng = seed::rng(1);
        let (m, r) = mask_to_length(&s, 4096, &mut rng).unwrap();
        assert_eq!(m, s);
        assert_eq!(r, 0..4096);
        assert!(matches!(mask_to_length(&s, 8192, &mut rng), Err(Error::MaskTooLong { .. })));
    }

    #[test]
    fn mask_keeps_exact_region() {
        let s = TokenSequence::new((0..4096).map(|i| 1 + i % 7).collect(), 9).unwrap();
        let mut rng = seed::rng(3);
        for target in [256, 512, 1024, 2048] {
            let (m, r) = mask_to_length(&s, target, &mut rng).unwrap();
            assert_eq!(m.len(), 4096);
            assert_eq!(m.tokens().iter().filter(|&&t| t != 0).count(), target);
            assert_eq!(&m.tokens()[r.clone()], &s.tokens()[r]);
        }
    }

    #[test]
    fn mask_region_is_uniform() {
        // start is uniform on 0..=4096-2048; check the mean
        let mut rng = seed::rng(9);
        let n = 20_000;
        let mean = (0..n).map(|_| mask_region(4096, 2048, &mut rng).unwrap().start as f64).sum::<f64>() / n as f64;
        // sd of U{0..2048} is ~591, standard error ~4.2
        assert!((mean - 1024.0).abs() < 20.0, "{mean}");
    }
}
