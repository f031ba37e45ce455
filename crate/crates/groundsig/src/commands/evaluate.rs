use std::collections::BTreeSet;
use std::io::Write;

use anyhow::{anyhow, bail, Context, Result};
use groundsig_core::eval::{self, MaskPrediction, PredictionTriple, Scores};
use groundsig_core::geometry::{obb_to_hbb, GridMask, Hbb, Obb, PixelMask};
use groundsig_core::textcodec::{decode_hbb, decode_mask, decode_obb, extract_signals};
use groundsig_core::{CodecConfig, SignalKind};
use serde::Serialize;
use serde_json::{json, Value};

use crate::cli::{EvalArgs, EvalMode, ReportFormat};
use crate::formats::{grid_from_rows, hbb_from_array, obb_from_array, AnnotationLine, Provenance, SignalLine};
use crate::io::{open_output, read_records, Diagnostic};
use crate::parallel::ordered_map;

/// Every signal a prediction line yields. Explicit fields win over
/// signals extracted from `raw_text`; the first signal of each kind is used.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParsedPrediction {
    pub hbb: Option<Hbb>,
    pub obb: Option<Obb>,
    pub mask: Option<GridMask>,
}

pub fn parse_prediction(line: &SignalLine, cfg: &CodecConfig) -> ParsedPrediction {
    let mut p = ParsedPrediction {
        hbb: line.hbb.and_then(|a| hbb_from_array(a).ok()),
        obb: line.obb.and_then(|a| obb_from_array(a).ok()),
        mask: line.mask.as_deref().and_then(|rows| grid_from_rows(rows).ok()),
    };
    if let Some(text) = &line.raw_text {
        let found = extract_signals(text, cfg);
        if p.hbb.is_none() {
            p.hbb = found.first(SignalKind::Hbb).and_then(|t| decode_hbb(t, cfg).ok());
        }
        if p.obb.is_none() {
            p.obb = found.first(SignalKind::Obb).and_then(|t| decode_obb(t, cfg).ok());
        }
        if p.mask.is_none() {
            p.mask = found.first(SignalKind::Mask).and_then(|t| decode_mask(t, cfg).ok());
        }
    }
    p
}

/// Prediction lines keyed by sample id. Lines that are not valid JSON or
/// carry no id are reported and otherwise ignored, so their samples score
/// as missing.
pub fn load_predictions(
    records: &[(usize, String)],
    cfg: &CodecConfig,
    workers: usize,
    diags: &mut Vec<Diagnostic>,
) -> Vec<(String, ParsedPrediction)> {
    let parsed = ordered_map(records, workers, |_, (_, line)| {
        let s: SignalLine = serde_json::from_str(line).map_err(|e| format!("invalid prediction: {e}"))?;
        let id = s.id.clone().ok_or_else(|| "prediction has no sample_id".to_string())?;
        Ok::<_, String>((id, parse_prediction(&s, cfg)))
    });
    let mut out = Vec::with_capacity(parsed.len());
    for ((no, _), p) in records.iter().zip(parsed) {
        match p {
            Ok(p) => out.push(p),
            Err(msg) => diags.push(Diagnostic::at(*no, msg)),
        }
    }
    out
}

fn load_truth(path: &std::path::Path, workers: usize) -> Result<Vec<(usize, String, AnnotationLine)>> {
    let records = read_records(path)?;
    let parsed = ordered_map(&records, workers, |_, (no, line)| {
        let a: AnnotationLine =
            serde_json::from_str(line).with_context(|| format!("ground truth line {no}"))?;
        let id = a.id.clone().ok_or_else(|| anyhow!("ground truth line {no} has no id"))?;
        Ok::<_, anyhow::Error>((*no, id, a))
    });
    parsed.into_iter().collect()
}

fn truth_signal<T>(
    gts: &[(usize, String, AnnotationLine)],
    what: &str,
    workers: usize,
    f: impl Fn(&AnnotationLine) -> Result<Option<T>> + Sync + Send,
) -> Result<Vec<(String, T)>>
where
    T: Send,
{
    let values = ordered_map(gts, workers, |_, (no, id, a)| {
        let v = f(a).with_context(|| format!("ground truth line {no}"))?;
        let v = v.ok_or_else(|| anyhow!("ground truth line {no} has no {what}"))?;
        Ok::<_, anyhow::Error>((id.clone(), v))
    });
    values.into_iter().collect()
}

fn truth_hbb(a: &AnnotationLine) -> Result<Option<Hbb>> {
    let ann = a.to_annotation()?;
    if let Some(h) = ann.hbb {
        return Ok(Some(h));
    }
    if let Some(o) = ann.obb {
        return Ok(Some(obb_to_hbb(&o)));
    }
    match a.pixel_mask()? {
        Some(p) if !p.is_empty() => {
            let (mut x1, mut y1, mut x2, mut y2) = (usize::MAX, usize::MAX, 0, 0);
            for y in 0..p.height() {
                for x in 0..p.width() {
                    if p.get(x, y) {
                        x1 = x1.min(x);
                        y1 = y1.min(y);
                        x2 = x2.max(x + 1);
                        y2 = y2.max(y + 1);
                    }
                }
            }
            let (w, h) = (p.width() as f64, p.height() as f64);
            Ok(Some(Hbb::new(x1 as f64 / w, y1 as f64 / h, x2 as f64 / w, y2 as f64 / h)?))
        }
        _ => Ok(None),
    }
}

#[derive(Debug, Serialize)]
struct SummaryJson {
    total: usize,
    hits: usize,
    accuracy: f64,
    mean_iou: f64,
    failures: usize,
    unmatched_predictions: usize,
    corrupt_lines: usize,
}

fn scores_report(scores: &Scores, corrupt: usize) -> (Value, Vec<Vec<String>>) {
    let summary = SummaryJson {
        total: scores.total(),
        hits: scores.hits(),
        accuracy: scores.accuracy(),
        mean_iou: scores.mean_iou(),
        failures: scores.failures(),
        unmatched_predictions: scores.unmatched,
        corrupt_lines: corrupt,
    };
    let rows: Vec<Value> = scores
        .rows
        .iter()
        .map(|r| json!({"sample_id": r.sample_id, "iou": r.iou, "hit": r.hit, "note": r.note.map(|n| n.label())}))
        .collect();
    let csv_rows = scores
        .rows
        .iter()
        .map(|r| {
            vec![
                r.sample_id.clone(),
                r.iou.to_string(),
                r.hit.to_string(),
                r.note.map(|n| n.label().to_string()).unwrap_or_default(),
            ]
        })
        .collect();
    (json!({"summary": summary, "rows": rows}), csv_rows)
}

fn row_diagnostics(scores: &Scores, diags: &mut Vec<Diagnostic>) {
    for r in &scores.rows {
        if let Some(note) = r.note {
            diags.push(Diagnostic::general(format!("sample {}: {}", r.sample_id, note.label())));
        }
    }
    if scores.unmatched > 0 {
        diags.push(Diagnostic::general(format!("{} predictions match no ground-truth sample", scores.unmatched)));
    }
}

fn check_unique(preds: &[(String, ParsedPrediction)]) -> Result<()> {
    let mut seen = BTreeSet::new();
    for (id, _) in preds {
        if !seen.insert(id.as_str()) {
            bail!("duplicate prediction sample_id {id:?}");
        }
    }
    Ok(())
}

/// Scores one mode; returns the report body and CSV rows (header first).
pub fn evaluate(
    args: &EvalArgs,
    preds: &[(String, ParsedPrediction)],
    corrupt: usize,
    diags: &mut Vec<Diagnostic>,
) -> Result<(Value, Vec<Vec<String>>)> {
    check_unique(preds)?;
    let gts = match (&args.gts, args.mode) {
        (_, EvalMode::Bcs) => Vec::new(),
        (Some(p), _) => load_truth(p, args.workers)?,
        (None, _) => bail!("--gts is required for this mode"),
    };
    let w = args.workers;
    let header = |cols: &[&str]| cols.iter().map(|c| c.to_string()).collect::<Vec<_>>();
    let score_cols = header(&["sample_id", "iou", "hit", "note"]);
    let scores = match args.mode {
        EvalMode::Hbb => {
            let gt = truth_signal(&gts, "box", w, truth_hbb)?;
            let p: Vec<_> = preds.iter().map(|(id, p)| (id.clone(), p.hbb)).collect();
            eval::acc_at_05_hbb(&p, &gt)?
        }
        EvalMode::Obb => {
            let gt = truth_signal(&gts, "oriented box", w, |a| Ok(a.to_annotation()?.obb))?;
            let p: Vec<_> = preds.iter().map(|(id, p)| (id.clone(), p.obb)).collect();
            eval::acc_at_05_obb(&p, &gt)?
        }
        EvalMode::ObbAsHbb => {
            let gt = truth_signal(&gts, "box", w, truth_hbb)?;
            let p: Vec<_> = preds.iter().map(|(id, p)| (id.clone(), p.obb)).collect();
            eval::acc_at_05_obb_as_hbb(&p, &gt)?
        }
        EvalMode::Mask => {
            let gt: Vec<(String, PixelMask)> = truth_signal(&gts, "mask", w, |a| Ok(a.pixel_mask()?))?;
            let p: Vec<_> =
                preds.iter().map(|(id, p)| (id.clone(), p.mask.clone().map(MaskPrediction::Grid))).collect();
            eval::miou(&p, &gt)?
        }
        EvalMode::Bcs => return Ok(bcs_report(preds, diags)),
    };
    row_diagnostics(&scores, diags);
    let (body, mut rows) = scores_report(&scores, corrupt);
    rows.insert(0, score_cols);
    Ok((body, rows))
}

fn bcs_report(preds: &[(String, ParsedPrediction)], diags: &mut Vec<Diagnostic>) -> (Value, Vec<Vec<String>>) {
    let mut rows = Vec::new();
    let mut csv = vec![["sample_id", "bcs", "iou_hbb_obb", "iou_hbb_mask", "iou_obb_mask", "note"]
        .iter()
        .map(|s| s.to_string())
        .collect::<Vec<_>>()];
    let (mut sum, mut complete, mut empty) = (0.0, 0usize, 0usize);
    for (id, p) in preds {
        let t = PredictionTriple { sample_id: id.clone(), hbb: p.hbb, obb: p.obb, mask: p.mask.clone() };
        match eval::bcs(&t) {
            Ok(c) => {
                sum += c.score;
                complete += 1;
                let note = c.empty_mask.then_some("empty-mask");
                if c.empty_mask {
                    empty += 1;
                    diags.push(Diagnostic::general(format!("sample {id}: empty-mask")));
                }
                rows.push(json!({"sample_id": id, "bcs": c.score, "pairs": c.pairs, "note": note}));
                let mut r = vec![id.clone(), c.score.to_string()];
                r.extend(c.pairs.iter().map(f64::to_string));
                r.push(note.unwrap_or_default().to_string());
                csv.push(r);
            }
            Err(_) => {
                diags.push(Diagnostic::general(format!("sample {id}: incomplete-triple")));
                rows.push(json!({"sample_id": id, "bcs": null, "note": "incomplete-triple"}));
                csv.push(vec![id.clone(), String::new(), String::new(), String::new(), String::new(), "incomplete-triple".into()]);
            }
        }
    }
    let mean = if complete == 0 { 0.0 } else { sum / complete as f64 };
    let summary = json!({
        "predictions": preds.len(),
        "complete": complete,
        "incomplete": preds.len() - complete,
        "empty_masks": empty,
        "mean_bcs": mean,
    });
    (json!({"summary": summary, "rows": rows}), csv)
}

pub fn write_csv(out: &mut dyn Write, provenance: &Provenance, rows: &[Vec<String>]) -> Result<()> {
    writeln!(out, "# {}", serde_json::to_string(provenance)?)?;
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn eval(args: &EvalArgs) -> Result<Vec<Diagnostic>> {
    let cfg = args.codec.config(true)?;
    let mut diags = Vec::new();
    let records = read_records(&args.preds)?;
    let preds = load_predictions(&records, &cfg, args.workers, &mut diags);
    let corrupt = diags.len();
    let (body, rows) = evaluate(args, &preds, corrupt, &mut diags)?;

    let provenance = Provenance::new("eval", serde_json::to_value(args)?);
    match args.format {
        ReportFormat::Json => {
            let mut report = json!({"provenance": provenance, "mode": args.mode});
            report.as_object_mut().expect("object").extend(body.as_object().expect("object").clone());
            let mut out = open_output(&args.output)?;
            writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?;
            out.flush()?;
        }
        ReportFormat::Csv => write_csv(&mut *open_output(&args.output)?, &provenance, &rows)?,
    }
    if let Some(path) = &args.csv {
        write_csv(&mut *open_output(path)?, &provenance, &rows)?;
    }
    Ok(diags)
}
