use std::io::Write;

use anyhow::{bail, Result};
use groundsig_core::eval::{disappearance_rate, length_stats};
use groundsig_core::geometry::{downsample, PixelMask, Resample};
use serde::Serialize;

use crate::cli::{AnalyzeArgs, ReportFormat, ResampleMode};
use crate::commands::evaluate::write_csv;
use crate::formats::{AnnotationLine, Provenance};
use crate::io::{open_output, read_records, Diagnostic};
use crate::parallel::ordered_map;

impl From<ResampleMode> for Resample {
    fn from(m: ResampleMode) -> Self {
        match m {
            ResampleMode::MaxPool => Resample::MaxPool,
            ResampleMode::Nearest => Resample::Nearest,
        }
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct RateRow {
    pub n: usize,
    pub mode: ResampleMode,
    pub rate: f64,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct LengthRow {
    pub n: usize,
    pub raw_mean: f64,
    pub raw_max: usize,
    pub rle_mean: f64,
    pub rle_max: usize,
    pub mean_ratio: f64,
    pub pooled_ratio: f64,
}

/// Disappearance rate per `(n, mode)` and mask text lengths per `n` (over
/// max-pooled grids).
pub fn tables(
    masks: &[PixelMask],
    ns: &[usize],
    modes: &[ResampleMode],
    workers: usize,
) -> Result<(Vec<RateRow>, Vec<LengthRow>)> {
    if masks.is_empty() {
        bail!("no masks to analyze");
    }
    let mut rates = Vec::new();
    for &n in ns {
        for &mode in modes {
            rates.push(RateRow { n, mode, rate: disappearance_rate(masks, n, mode.into())? });
        }
    }
    let mut lengths = Vec::new();
    for &n in ns {
        let grids = ordered_map(masks, workers, |_, m| downsample(m, n, Resample::MaxPool));
        let grids = grids.into_iter().collect::<Result<Vec<_>, _>>()?;
        let s = length_stats(&grids);
        lengths.push(LengthRow {
            n,
            raw_mean: s.raw_mean,
            raw_max: s.raw_max,
            rle_mean: s.rle_mean,
            rle_max: s.rle_max,
            mean_ratio: s.mean_ratio,
            pooled_ratio: s.pooled_ratio,
        });
    }
    Ok((rates, lengths))
}

pub fn analyze(args: &AnalyzeArgs) -> Result<Vec<Diagnostic>> {
    let mut diags = Vec::new();
    let records = read_records(&args.input)?;
    let parsed = ordered_map(&records, args.workers, |_, (_, line)| {
        let a: AnnotationLine = serde_json::from_str(line)?;
        Ok::<_, anyhow::Error>(a.pixel_mask()?)
    });
    let mut masks = Vec::new();
    for ((no, _), m) in records.iter().zip(parsed) {
        match m {
            Ok(Some(m)) => masks.push(m),
            Ok(None) => diags.push(Diagnostic::at(*no, "annotation has no mask")),
            Err(e) => diags.push(Diagnostic::at(*no, e.to_string())),
        }
    }
    let (rates, lengths) = tables(&masks, &args.n, &args.mode, args.workers)?;
    let provenance = Provenance::new("analyze", serde_json::to_value(args)?);
    let mut out = open_output(&args.output)?;
    match args.format {
        ReportFormat::Json => {
            let report = serde_json::json!({
                "provenance": provenance,
                "masks": masks.len(),
                "disappearance": rates,
                "lengths": lengths,
            });
            writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?;
        }
        ReportFormat::Csv => {
            let mut rows = vec![vec!["n".to_string(), "mode".into(), "rate".into()]];
            for r in &rates {
                let mode = serde_json::to_value(r.mode)?.as_str().unwrap_or_default().to_string();
                rows.push(vec![r.n.to_string(), mode, r.rate.to_string()]);
            }
            write_csv(&mut *out, &provenance, &rows)?;
        }
    }
    out.flush()?;
    Ok(diags)
}
