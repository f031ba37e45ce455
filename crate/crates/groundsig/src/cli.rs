use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use groundsig_core::CodecConfig;
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "groundsig", version, about = "Grounding-signal codec, dataset builder and evaluator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Encode normalized signals into their tagged text form.
    Encode(EncodeArgs),
    /// Extract and decode every signal found in text.
    Decode(DecodeArgs),
    /// Generate instruction samples from annotations.
    BuildDataset(BuildArgs),
    /// Score predictions against ground truth.
    Eval(EvalArgs),
    /// Disappearance rates and mask text lengths over a mask corpus.
    Analyze(AnalyzeArgs),
    /// Build point/box prompt bundles for a promptable segmenter.
    RefinePrompts(RefineArgs),
    /// Project 3D boxes through a camera onto the image.
    Project(ProjectArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CodecArgs {
    /// Quantization bins for box coordinates.
    #[arg(long, default_value_t = 1000)]
    pub hbb_res: u32,
    /// Quantization bins for oriented-box center and sides.
    #[arg(long, default_value_t = 100)]
    pub obb_res: u32,
    /// Mask grid size.
    #[arg(long, default_value_t = 32)]
    pub mask_res: usize,
}

impl CodecArgs {
    pub fn config(&self, rle: bool) -> anyhow::Result<CodecConfig> {
        let cfg = CodecConfig {
            hbb_resolution: self.hbb_res,
            obb_resolution: self.obb_res,
            mask_resolution: self.mask_res,
            rle,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MaskFormat {
    Rle,
    Raw,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReportFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EncodeArgs {
    #[arg(short, long, default_value = "-")]
    pub input: PathBuf,
    #[arg(short, long, default_value = "-")]
    pub output: PathBuf,
    #[command(flatten)]
    pub codec: CodecArgs,
    #[arg(long, value_enum, default_value = "rle")]
    pub format: MaskFormat,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DecodeArgs {
    #[arg(short, long, default_value = "-")]
    pub input: PathBuf,
    #[arg(short, long, default_value = "-")]
    pub output: PathBuf,
    #[command(flatten)]
    pub codec: CodecArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BuildArgs {
    /// Annotation JSONL.
    #[arg(short, long, default_value = "-")]
    pub input: PathBuf,
    #[arg(short, long, default_value = "-")]
    pub output: PathBuf,
    /// Where to write the JSON summary (stderr when absent).
    #[arg(long)]
    pub summary: Option<PathBuf>,
    #[command(flatten)]
    pub codec: CodecArgs,
    #[arg(long, value_enum, default_value = "rle")]
    pub format: MaskFormat,
    /// Comma-separated tasks: rec, rec_obb, res, det, pal:A->B, ggl:A->B.
    #[arg(long, default_value = crate::commands::dataset::DEFAULT_TASKS)]
    pub tasks: String,
    /// Keep probabilities, e.g. `pal:hbb->obb=0.5,det=0.2`; unlisted tasks keep everything.
    #[arg(long)]
    pub weights: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// File of held-out image ids, one per line.
    #[arg(long)]
    pub holdout: Option<PathBuf>,
    /// Rasterize oriented boxes when an annotation has no mask.
    #[arg(long)]
    pub synthesize_masks: bool,
    /// Allow the minimum-area-rectangle mask→obb conversion.
    #[arg(long)]
    pub allow_mask_to_obb: bool,
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EvalMode {
    /// Acc@0.5 on horizontal boxes.
    Hbb,
    /// Acc@0.5 on oriented boxes with rotated IoU.
    Obb,
    /// Oriented-box predictions scored against horizontal boxes.
    ObbAsHbb,
    /// mIoU and mask Acc@0.5 at image resolution.
    Mask,
    /// Box consistency between each prediction's three signals.
    Bcs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EvalArgs {
    /// Prediction JSONL.
    #[arg(long)]
    pub preds: PathBuf,
    /// Ground-truth annotation JSONL (ids required); unused for `bcs`.
    #[arg(long)]
    pub gts: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "hbb")]
    pub mode: EvalMode,
    #[arg(short, long, default_value = "-")]
    pub output: PathBuf,
    /// Also write per-sample rows as CSV here.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: ReportFormat,
    #[command(flatten)]
    pub codec: CodecArgs,
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ResampleMode {
    MaxPool,
    Nearest,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct AnalyzeArgs {
    /// Annotation JSONL with masks.
    #[arg(short, long, default_value = "-")]
    pub input: PathBuf,
    #[arg(short, long, default_value = "-")]
    pub output: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "16,24,32,100")]
    pub n: Vec<usize>,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "max-pool,nearest")]
    pub mode: Vec<ResampleMode>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: ReportFormat,
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct RefineArgs {
    #[arg(short, long, default_value = "-")]
    pub input: PathBuf,
    #[arg(short, long, default_value = "-")]
    pub output: PathBuf,
    #[command(flatten)]
    pub codec: CodecArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ProjectArgs {
    /// Camera parameter JSON.
    #[arg(long)]
    pub camera: PathBuf,
    /// 3D box JSONL.
    #[arg(short, long, default_value = "-")]
    pub input: PathBuf,
    #[arg(short, long, default_value = "-")]
    pub output: PathBuf,
}
