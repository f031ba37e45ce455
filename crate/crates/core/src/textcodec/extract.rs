use alloc::vec::Vec;

use super::{decode, CodecConfig, CodecError, SignalKind, TextSignal};

/// A span of model output that looked like a signal but did not decode.
#[derive(Debug, Clone, PartialEq)]
pub struct SkippedSpan {
    /// Byte offset of the span in the scanned text.
    pub offset: usize,
    pub kind: SignalKind,
    pub reason: SkipReason,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SkipReason {
    /// Opening tag with no closing tag before the next signal or the end.
    Unterminated,
    Invalid(CodecError),
}

impl core::fmt::Display for SkippedSpan {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match &self.reason {
            SkipReason::Unterminated => write!(f, "unterminated {} span at byte {}", self.kind, self.offset),
            SkipReason::Invalid(e) => write!(f, "invalid {} span at byte {}: {e}", self.kind, self.offset),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Extraction {
    pub signals: Vec<TextSignal>,
    pub skipped: Vec<SkippedSpan>,
}

impl Extraction {
    pub fn first(&self, kind: SignalKind) -> Option<&TextSignal> {
        self.signals.iter().find(|s| s.kind() == kind)
    }
}

fn next_open(text: &str, from: usize) -> Option<(usize, SignalKind)> {
    SignalKind::ALL
        .into_iter()
        .filter_map(|k| text[from..].find(k.open_tag()).map(|i| (from + i, k)))
        .min_by_key(|&(i, _)| i)
}

/// Pulls every decodable signal out of free text, in document order.
///
/// A tag pair may hold several `;`-separated values, each becoming its own
/// signal. Spans that fail to decode are reported in `skipped`.
pub fn extract_signals(text: &str, cfg: &CodecConfig) -> Extraction {
    let mut out = Extraction::default();
    let mut pos = 0;
    while let Some((start, kind)) = next_open(text, pos) {
        let content_start = start + kind.open_tag().len();
        let close = text[content_start..].find(kind.close_tag()).map(|i| content_start + i);
        let next = next_open(text, content_start).map(|(i, _)| i);
        let end = match (close, next) {
            (Some(c), Some(n)) if n < c => None,
            (c, _) => c,
        };
        let Some(end) = end else {
            out.skipped.push(SkippedSpan { offset: start, kind, reason: SkipReason::Unterminated });
            pos = content_start;
            continue;
        };

        let mut group_start = content_start;
        for group in text[content_start..end].split(';') {
            let offset = group_start;
            group_start += group.len() + 1;
            let trimmed = group.trim();
            let signal = TextSignal::wrap(kind, trimmed);
            match decode(&signal, cfg) {
                Ok(_) => out.signals.push(signal),
                Err(e) => out.skipped.push(SkippedSpan { offset, kind, reason: SkipReason::Invalid(e) }),
            }
        }
        pos = end + kind.close_tag().len();
    }
    out
}
