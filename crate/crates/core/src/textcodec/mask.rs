use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use super::{CodecConfig, CodecError, SignalKind, TextSignal};
use crate::geometry::GridMask;

/// Run-length form of one row: `v*k` runs joined by `,`.
pub fn rle_row(row: &[bool]) -> String {
    let mut out = String::new();
    let mut i = 0;
    while i < row.len() {
        let v = row[i];
        let start = i;
        while i < row.len() && row[i] == v {
            i += 1;
        }
        if !out.is_empty() {
            out.push(',');
        }
        let _ = write!(out, "{}*{}", u8::from(v), i - start);
    }
    out
}

fn raw_row(row: &[bool]) -> String {
    row.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

fn body(grid: &GridMask, rle: bool) -> String {
    let n = grid.n();
    let mut out = String::new();
    for r in 0..n {
        if r > 0 {
            out.push('|');
        }
        let raw = raw_row(grid.row(r));
        if rle {
            let runs = rle_row(grid.row(r));
            out.push_str(if runs.len() <= raw.len() { &runs } else { &raw });
        } else {
            out.push_str(&raw);
        }
    }
    out
}

/// Character count of the mask body (without tags) in either form.
pub fn mask_body_len(grid: &GridMask, rle: bool) -> usize {
    body(grid, rle).len()
}

/// With RLE on, each row uses whichever of its run-length and raw forms is
/// shorter, so the compressed payload is never longer than the raw one.
pub fn encode_mask(grid: &GridMask, cfg: &CodecConfig) -> Result<TextSignal, CodecError> {
    if grid.n() != cfg.mask_resolution {
        return Err(CodecError::ResolutionMismatch { expected: cfg.mask_resolution, found: grid.n() });
    }
    Ok(TextSignal::wrap(SignalKind::Mask, &body(grid, cfg.rle)))
}

pub fn decode_mask(signal: &TextSignal, cfg: &CodecConfig) -> Result<GridMask, CodecError> {
    let body = signal.expect(SignalKind::Mask)?;
    let base = SignalKind::Mask.open_tag().len();
    let n = cfg.mask_resolution;
    let rows: Vec<&str> = body.split('|').collect();
    if rows.len() != n {
        return Err(CodecError::RowCount { expected: n, found: rows.len() });
    }
    let mut cells = Vec::with_capacity(n * n);
    let mut offset = base;
    for (index, row) in rows.iter().enumerate() {
        if row.contains('*') {
            decode_runs(row, index, offset, n, &mut cells)?;
        } else {
            decode_raw(row, index, offset, n, &mut cells)?;
        }
        offset += row.len() + 1;
    }
    Ok(GridMask::new(n, cells)?)
}

fn decode_raw(row: &str, index: usize, offset: usize, n: usize, cells: &mut Vec<bool>) -> Result<(), CodecError> {
    for (i, ch) in row.char_indices() {
        match ch {
            '0' => cells.push(false),
            '1' => cells.push(true),
            _ => return Err(CodecError::IllegalChar { offset: offset + i, ch }),
        }
    }
    let found = row.chars().count();
    if found != n {
        return Err(CodecError::RowLength { row: index, expected: n, found });
    }
    Ok(())
}

fn decode_runs(row: &str, index: usize, offset: usize, n: usize, cells: &mut Vec<bool>) -> Result<(), CodecError> {
    let mut total = 0usize;
    let mut pos = offset;
    for run in row.split(',') {
        let (value, count) = run
            .split_once('*')
            .ok_or(CodecError::Malformed { offset: pos, reason: "run without '*'" })?;
        let v = match value {
            "0" => false,
            "1" => true,
            _ => {
                let ch = value.chars().next().unwrap_or('*');
                return Err(CodecError::IllegalChar { offset: pos, ch });
            }
        };
        let count_offset = pos + value.len() + 1;
        if let Some((i, ch)) = count.char_indices().find(|(_, c)| !c.is_ascii_digit()) {
            return Err(CodecError::IllegalChar { offset: count_offset + i, ch });
        }
        let k: usize = count.parse().map_err(|_| CodecError::InvalidNumber { offset: count_offset })?;
        if k == 0 {
            return Err(CodecError::Malformed { offset: count_offset, reason: "zero-length run" });
        }
        total = total.saturating_add(k);
        if total > n {
            return Err(CodecError::RunSum { row: index, expected: n, found: total });
        }
        cells.extend(core::iter::repeat(v).take(k));
        pos += run.len() + 1;
    }
    if total != n {
        return Err(CodecError::RunSum { row: index, expected: n, found: total });
    }
    Ok(())
}
