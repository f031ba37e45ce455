use anyhow::Result;
use groundsig_core::textcodec::{decode as decode_signal, extract_signals};
use groundsig_core::{CodecConfig, Signal};
use serde::Serialize;
use serde_json::json;

use crate::cli::{DecodeArgs, EncodeArgs, MaskFormat};
use crate::formats::{grid_from_rows, grid_to_rows, hbb_from_array, obb_from_array, Provenance, SignalLine};
use crate::io::{open_output, read_records, write_jsonl, Diagnostic};

#[derive(Debug, Serialize)]
struct Encoded {
    #[serde(skip_serializing_if = "Option::is_none")]
    id: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    hbb: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    obb: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mask: Option<String>,
}

fn encode_line(line: &str, cfg: &CodecConfig) -> Result<Encoded> {
    let s: SignalLine = serde_json::from_str(line)?;
    if s.hbb.is_none() && s.obb.is_none() && s.mask.is_none() {
        anyhow::bail!("no hbb, obb or mask to encode");
    }
    let hbb = s.hbb.map(hbb_from_array).transpose()?;
    let obb = s.obb.map(obb_from_array).transpose()?;
    let mask = s.mask.as_deref().map(grid_from_rows).transpose()?;
    Ok(Encoded {
        id: s.id,
        hbb: hbb.map(|h| Signal::Hbb(h).encode(cfg)).transpose()?.map(|t| t.into_payload()),
        obb: obb.map(|o| Signal::Obb(o).encode(cfg)).transpose()?.map(|t| t.into_payload()),
        mask: mask.map(|g| Signal::Mask(g).encode(cfg)).transpose()?.map(|t| t.into_payload()),
    })
}

pub fn encode(args: &EncodeArgs) -> Result<Vec<Diagnostic>> {
    let cfg = args.codec.config(args.format == MaskFormat::Rle)?;
    let mut diags = Vec::new();
    let mut out = Vec::new();
    for (no, line) in read_records(&args.input)? {
        match encode_line(&line, &cfg) {
            Ok(e) => out.push(serde_json::to_string(&e)?),
            Err(e) => diags.push(Diagnostic::at(no, e.to_string())),
        }
    }
    let header = Provenance::new("encode", serde_json::to_value(args)?).header_line();
    write_jsonl(&mut *open_output(&args.output)?, &header, &out)?;
    Ok(diags)
}

/// JSON value of a decoded signal in normalized form.
pub fn signal_json(signal: &Signal) -> serde_json::Value {
    match signal {
        Signal::Hbb(h) => json!({"kind": "hbb", "value": h.to_array()}),
        Signal::Obb(o) => json!({"kind": "obb", "value": o.to_array()}),
        Signal::Mask(g) => json!({"kind": "mask", "value": grid_to_rows(g)}),
    }
}

pub fn decode(args: &DecodeArgs) -> Result<Vec<Diagnostic>> {
    let cfg = args.codec.config(true)?;
    let mut diags = Vec::new();
    let mut out = Vec::new();
    for (no, line) in read_records(&args.input)? {
        let s: SignalLine = match serde_json::from_str(&line) {
            Ok(s) => s,
            Err(e) => {
                diags.push(Diagnostic::at(no, format!("invalid JSON: {e}")));
                continue;
            }
        };
        let Some(text) = s.raw_text.as_deref() else {
            diags.push(Diagnostic::at(no, "no text to decode"));
            continue;
        };
        let found = extract_signals(text, &cfg);
        let signals: Vec<_> = found
            .signals
            .iter()
            .map(|t| decode_signal(t, &cfg).map(|s| signal_json(&s)))
            .collect::<Result<_, _>>()?;
        let skipped: Vec<_> = found
            .skipped
            .iter()
            .map(|sk| {
                diags.push(Diagnostic::at(no, sk.to_string()));
                json!({"offset": sk.offset, "kind": sk.kind.name(), "reason": sk.to_string()})
            })
            .collect();
        out.push(json!({"id": s.id, "signals": signals, "skipped": skipped}).to_string());
    }
    let header = Provenance::new("decode", serde_json::to_value(args)?).header_line();
    write_jsonl(&mut *open_output(&args.output)?, &header, &out)?;
    Ok(diags)
}
