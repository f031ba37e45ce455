use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, Write};

use anyhow::{bail, Context, Result};
use groundsig_core::instruct::{
    annotation_outcomes, detection_outcomes, filter_leakage, Annotation, BuildOptions, DatasetPlan,
    ImageKeyed, InstructionRecord, Outcome, Task,
};
use serde::Serialize;

use crate::cli::{BuildArgs, MaskFormat};
use crate::formats::{AnnotationLine, InstructionLine, Provenance};
use crate::io::{open_input, open_output, read_records, write_jsonl, Diagnostic};
use crate::parallel::ordered_map;

pub const DEFAULT_TASKS: &str =
    "rec,rec_obb,res,det,pal:hbb->obb,pal:hbb->mask,pal:obb->mask,ggl:obb->hbb,ggl:mask->hbb";

pub fn parse_tasks(spec: &str) -> Result<Vec<Task>> {
    let mut tasks = Vec::new();
    for t in spec.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let task: Task = t.parse()?;
        if !tasks.contains(&task) {
            tasks.push(task);
        }
    }
    if tasks.is_empty() {
        bail!("no tasks selected");
    }
    Ok(tasks)
}

/// `task=weight` pairs, aligned to `tasks`.
pub fn parse_weights(spec: &str, tasks: &[Task]) -> Result<Vec<f64>> {
    let mut weights = vec![1.0; tasks.len()];
    for item in spec.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let (name, w) = item.rsplit_once('=').with_context(|| format!("weight {item:?} is not task=value"))?;
        let task: Task = name.trim().parse()?;
        let w: f64 = w.trim().parse().with_context(|| format!("bad weight in {item:?}"))?;
        if !(0.0..=1.0).contains(&w) {
            bail!("weight for {task} must be in [0, 1]");
        }
        let i = tasks.iter().position(|t| *t == task).with_context(|| format!("{task} is not a selected task"))?;
        weights[i] = w;
    }
    Ok(weights)
}

fn read_holdout(path: &std::path::Path) -> Result<BTreeSet<String>> {
    let mut ids = BTreeSet::new();
    for line in open_input(path)?.lines() {
        let line = line?;
        let id = line.trim();
        if !id.is_empty() && !id.starts_with('#') {
            ids.insert(id.to_string());
        }
    }
    Ok(ids)
}

#[derive(Debug, Default, Serialize)]
pub struct Summary {
    pub annotations: usize,
    pub schema_errors: usize,
    pub emitted: BTreeMap<String, usize>,
    /// task → reason → count
    pub skipped: BTreeMap<String, BTreeMap<String, usize>>,
    pub leakage_dropped: usize,
}

struct Keyed {
    id: String,
    record: InstructionRecord,
}

impl ImageKeyed for Keyed {
    fn image_id(&self) -> &str {
        &self.record.image_id
    }
}

/// Generates records for parsed annotations; `ids` names each annotation.
pub fn generate(
    anns: &[Annotation],
    ids: &[String],
    plan: &DatasetPlan,
    seed: u64,
    workers: usize,
    summary: &mut Summary,
) -> Vec<(String, InstructionRecord)> {
    let per_ann: Vec<Vec<Outcome>> = ordered_map(anns, workers, |i, a| annotation_outcomes(i, a, plan, seed));
    let mut out = Vec::new();
    let flat = per_ann.into_iter().flatten().chain(detection_outcomes(anns, plan, seed));
    for outcome in flat {
        match outcome {
            Ok(r) => {
                *summary.emitted.entry(r.task.to_string()).or_default() += 1;
                out.push(r);
            }
            Err(skip) => {
                *summary
                    .skipped
                    .entry(skip.task.to_string())
                    .or_default()
                    .entry(skip.reason.label().to_string())
                    .or_default() += 1;
            }
        }
    }
    // record id: source annotation id plus task
    out.into_iter().map(|r| (format!("{}:{}", ids[r.source], r.task), r)).collect()
}

pub fn build(args: &BuildArgs) -> Result<Vec<Diagnostic>> {
    let codec = args.codec.config(args.format == MaskFormat::Rle)?;
    let tasks = parse_tasks(&args.tasks)?;
    let weights = match &args.weights {
        Some(w) => parse_weights(w, &tasks)?,
        None => vec![1.0; tasks.len()],
    };
    let plan = DatasetPlan {
        tasks,
        weights,
        options: BuildOptions { codec, synthesize_masks: args.synthesize_masks, allow_mask_to_obb: args.allow_mask_to_obb },
    };
    let held_out = args.holdout.as_deref().map(read_holdout).transpose()?.unwrap_or_default();

    let mut diags = Vec::new();
    let mut summary = Summary::default();
    let mut anns = Vec::new();
    let mut ids = Vec::new();
    for (no, line) in read_records(&args.input)? {
        let parsed = serde_json::from_str::<AnnotationLine>(&line)
            .map_err(anyhow::Error::from)
            .and_then(|a| Ok((a.id.clone(), a.to_annotation()?)));
        match parsed {
            Ok((id, a)) => {
                ids.push(id.unwrap_or_else(|| format!("L{no}")));
                anns.push(a);
            }
            Err(e) => {
                summary.schema_errors += 1;
                diags.push(Diagnostic::at(no, e.to_string()));
            }
        }
    }
    summary.annotations = anns.len();

    let records = generate(&anns, &ids, &plan, args.seed, args.workers, &mut summary);
    let keyed: Vec<Keyed> = records.into_iter().map(|(id, record)| Keyed { id, record }).collect();
    let (kept, dropped) = filter_leakage(keyed, &held_out);
    summary.leakage_dropped = dropped;

    let lines: Vec<String> = kept
        .iter()
        .map(|k| serde_json::to_string(&InstructionLine::from_record(k.id.clone(), &k.record)))
        .collect::<Result<_, _>>()?;
    let header = Provenance::new("build-dataset", serde_json::to_value(args)?).header_line();
    write_jsonl(&mut *open_output(&args.output)?, &header, &lines)?;

    let summary_json = serde_json::to_string_pretty(&summary)?;
    match &args.summary {
        Some(p) => writeln!(open_output(p)?, "{summary_json}")?,
        None => eprintln!("{summary_json}"),
    }
    Ok(diags)
}
