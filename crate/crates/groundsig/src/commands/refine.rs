use anyhow::{anyhow, Result};
use groundsig_core::geometry::GridMask;
use groundsig_core::refine::make_prompt;
use groundsig_core::textcodec::{decode_hbb, decode_mask, extract_signals};
use groundsig_core::{derive_seed, CodecConfig, SignalKind};

use crate::cli::RefineArgs;
use crate::formats::{grid_from_rows, hbb_from_array, PromptBundle, Provenance, RefineLine};
use crate::io::{open_output, read_records, write_jsonl, Diagnostic};
use crate::parallel::ordered_map;

/// Prompt bundle for one input line. A missing or undecodable mask counts
/// as empty (box-only fallback); a missing box is an error.
pub fn bundle(line: &RefineLine, cfg: &CodecConfig, seed: u64) -> Result<PromptBundle> {
    let found = line.raw_text.as_deref().map(|t| extract_signals(t, cfg));
    let hbb = match line.hbb {
        Some(a) => Some(hbb_from_array(a)?),
        None => found.as_ref().and_then(|f| f.first(SignalKind::Hbb)).map(|t| decode_hbb(t, cfg)).transpose()?,
    };
    let hbb = hbb.ok_or_else(|| anyhow!("no predicted box"))?;
    let grid = match &line.mask {
        Some(rows) => grid_from_rows(rows)?,
        None => match found.as_ref().and_then(|f| f.first(SignalKind::Mask)) {
            Some(t) => decode_mask(t, cfg)?,
            None => GridMask::empty(cfg.mask_resolution)?,
        },
    };
    let p = make_prompt(&grid, &hbb, line.width, line.height, seed)?;
    Ok(PromptBundle {
        id: line.id.clone(),
        image: line.image.clone(),
        box_px: p.box_px,
        point_coords: p.point_coords(),
        point_labels: p.point_labels(),
        fallback_box_only: p.fallback_box_only,
    })
}

pub fn refine_prompts(args: &RefineArgs) -> Result<Vec<Diagnostic>> {
    let cfg = args.codec.config(true)?;
    let records = read_records(&args.input)?;
    // seeds are keyed by record position, not by worker scheduling
    let results = ordered_map(&records, args.workers, |i, (_, line)| {
        let l: RefineLine = serde_json::from_str(line)?;
        let b = bundle(&l, &cfg, derive_seed(args.seed, i as u64))?;
        Ok::<_, anyhow::Error>(serde_json::to_string(&b)?)
    });
    let mut diags = Vec::new();
    let mut out = Vec::new();
    for ((no, _), r) in records.iter().zip(results) {
        match r {
            Ok(s) => out.push(s),
            Err(e) => diags.push(Diagnostic::at(*no, e.to_string())),
        }
    }
    let header = Provenance::new("refine-prompts", serde_json::to_value(args)?).header_line();
    write_jsonl(&mut *open_output(&args.output)?, &header, &out)?;
    Ok(diags)
}
