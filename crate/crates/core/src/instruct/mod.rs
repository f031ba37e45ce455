//! Instruction-sample generation.
//!
//! Besides the plain grounding tasks (box, oriented box, mask, multi-object
//! detection) two mixed-signal sample types are built:
//!
//! - prompt-assisted (PAL): the query carries a sparser signal of the same
//!   object and the answer is a denser one;
//! - geometry-guided (GGL): a two-turn exchange where the second answer is
//!   computed purely geometrically from the first answer's text, with no
//!   reference to the image.

pub mod templates;

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::geometry::{
    downsample, mask_to_hbb, mask_to_obb, obb_to_hbb, rasterize_obb, GeometryError, GridMask, Hbb,
    Obb, PixelMask, Resample,
};
use crate::textcodec::{
    decode, encode_hbb, encode_mask, encode_obb, CodecConfig, CodecError, Signal, SignalKind, TextSignal,
};

/// Mask attached to an annotation.
#[derive(Debug, Clone, PartialEq)]
pub enum AnnotatedMask {
    Pixels(PixelMask),
    Grid(GridMask),
}

/// One referred object in one image. Geometry is normalized.
#[derive(Debug, Clone, PartialEq)]
pub struct Annotation {
    pub image_id: String,
    pub image_width: u32,
    pub image_height: u32,
    pub expression: String,
    pub hbb: Option<Hbb>,
    pub obb: Option<Obb>,
    pub mask: Option<AnnotatedMask>,
    pub category: Option<String>,
}

impl Annotation {
    pub fn validate(&self) -> Result<(), BuildError> {
        if self.expression.trim().is_empty() {
            return Err(BuildError::EmptyExpression);
        }
        if self.hbb.is_none() && self.obb.is_none() && self.mask.is_none() {
            return Err(BuildError::NoSignal);
        }
        if self.image_width == 0 || self.image_height == 0 {
            return Err(BuildError::Geometry(GeometryError::InvalidDimensions));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PalPair {
    sparse: SignalKind,
    dense: SignalKind,
}

impl PalPair {
    /// Accepts hbb→obb, hbb→mask and obb→mask.
    pub fn new(sparse: SignalKind, dense: SignalKind) -> Result<Self, BuildError> {
        use SignalKind::*;
        match (sparse, dense) {
            (Hbb, Obb) | (Hbb, Mask) | (Obb, Mask) => Ok(Self { sparse, dense }),
            _ => Err(BuildError::UnsupportedPair { task: TaskKind::Pal, from: sparse, to: dense }),
        }
    }
    pub fn sparse(&self) -> SignalKind {
        self.sparse
    }
    pub fn dense(&self) -> SignalKind {
        self.dense
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GglPair {
    dense: SignalKind,
    sparse: SignalKind,
}

impl GglPair {
    /// Accepts obb→hbb, mask→hbb and mask→obb.
    pub fn new(dense: SignalKind, sparse: SignalKind) -> Result<Self, BuildError> {
        use SignalKind::*;
        match (dense, sparse) {
            (Obb, Hbb) | (Mask, Hbb) | (Mask, Obb) => Ok(Self { dense, sparse }),
            _ => Err(BuildError::UnsupportedPair { task: TaskKind::Ggl, from: dense, to: sparse }),
        }
    }
    pub fn dense(&self) -> SignalKind {
        self.dense
    }
    pub fn sparse(&self) -> SignalKind {
        self.sparse
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TaskKind {
    Rec,
    RecObb,
    Res,
    Det,
    Pal,
    Ggl,
}

impl TaskKind {
    pub fn name(self) -> &'static str {
        match self {
            TaskKind::Rec => "rec",
            TaskKind::RecObb => "rec_obb",
            TaskKind::Res => "res",
            TaskKind::Det => "det",
            TaskKind::Pal => "pal",
            TaskKind::Ggl => "ggl",
        }
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Task {
    Rec,
    RecObb,
    Res,
    Det,
    Pal(PalPair),
    Ggl(GglPair),
}

impl Task {
    pub fn kind(&self) -> TaskKind {
        match self {
            Task::Rec => TaskKind::Rec,
            Task::RecObb => TaskKind::RecObb,
            Task::Res => TaskKind::Res,
            Task::Det => TaskKind::Det,
            Task::Pal(_) => TaskKind::Pal,
            Task::Ggl(_) => TaskKind::Ggl,
        }
    }

    fn code(&self) -> u64 {
        let pair = |a: SignalKind, b: SignalKind| (a as u64) * 3 + b as u64;
        match self {
            Task::Rec => 1,
            Task::RecObb => 2,
            Task::Res => 3,
            Task::Det => 4,
            Task::Pal(p) => 16 + pair(p.sparse, p.dense),
            Task::Ggl(p) => 32 + pair(p.dense, p.sparse),
        }
    }
}

/// Formats as `rec`, `rec_obb`, `res`, `det`, `pal:hbb->obb`, `ggl:mask->hbb`.
impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Task::Pal(p) => write!(f, "pal:{}->{}", p.sparse, p.dense),
            Task::Ggl(p) => write!(f, "ggl:{}->{}", p.dense, p.sparse),
            other => f.write_str(other.kind().name()),
        }
    }
}

impl FromStr for Task {
    type Err = BuildError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || BuildError::UnknownTask(s.to_string());
        match s {
            "rec" => return Ok(Task::Rec),
            "rec_obb" => return Ok(Task::RecObb),
            "res" => return Ok(Task::Res),
            "det" => return Ok(Task::Det),
            _ => {}
        }
        let (head, pair) = s.split_once(':').ok_or_else(bad)?;
        let (from, to) = pair.split_once("->").ok_or_else(bad)?;
        let from = SignalKind::from_name(from).ok_or_else(bad)?;
        let to = SignalKind::from_name(to).ok_or_else(bad)?;
        match head {
            "pal" => Ok(Task::Pal(PalPair::new(from, to)?)),
            "ggl" => Ok(Task::Ggl(GglPair::new(from, to)?)),
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Human,
    Model,
}

impl Role {
    pub fn name(self) -> &'static str {
        match self {
            Role::Human => "human",
            Role::Model => "model",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Turn {
    pub role: Role,
    pub text: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaskSource {
    Annotated,
    RasterizedObb,
}

impl MaskSource {
    pub fn name(self) -> &'static str {
        match self {
            MaskSource::Annotated => "annotated",
            MaskSource::RasterizedObb => "rasterized_obb",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstructionRecord {
    pub image_id: String,
    pub task: Task,
    pub conversations: Vec<Turn>,
    pub template_index: usize,
    /// Set when the record carries a mask signal.
    pub mask_source: Option<MaskSource>,
    /// Index of the source annotation (first member for detection groups)
    /// as set by the dataset drivers; 0 from the single-record builders.
    pub source: usize,
}

impl InstructionRecord {
    pub fn model_turns(&self) -> impl Iterator<Item = &str> {
        self.conversations.iter().filter(|t| t.role == Role::Model).map(|t| t.text.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BuildError {
    #[error("annotation has an empty referring expression")]
    EmptyExpression,
    #[error("annotation carries no signal")]
    NoSignal,
    #[error("{task} needs a {needed} signal the annotation cannot provide")]
    MissingSignal { task: TaskKind, needed: SignalKind },
    #[error("the object disappears at the configured mask resolution")]
    DisappearedObject,
    #[error("{task} does not support {from}->{to}")]
    UnsupportedPair { task: TaskKind, from: SignalKind, to: SignalKind },
    #[error("mask->obb conversion is disabled")]
    MaskToObbDisabled,
    #[error("unknown task {0:?}")]
    UnknownTask(String),
    #[error("detection group is empty")]
    EmptyGroup,
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

impl BuildError {
    /// Short stable label used in summaries.
    pub fn label(&self) -> &'static str {
        match self {
            BuildError::EmptyExpression => "empty-expression",
            BuildError::NoSignal => "no-signal",
            BuildError::MissingSignal { .. } => "missing-signal",
            BuildError::DisappearedObject => "disappeared-object",
            BuildError::UnsupportedPair { .. } => "unsupported-pair",
            BuildError::MaskToObbDisabled => "mask-to-obb-disabled",
            BuildError::UnknownTask(_) => "unknown-task",
            BuildError::EmptyGroup => "empty-group",
            BuildError::Codec(_) => "codec",
            BuildError::Geometry(_) => "geometry",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BuildOptions {
    pub codec: CodecConfig,
    /// Fill in missing masks by rasterizing the oriented box.
    pub synthesize_masks: bool,
    /// Permit the minimum-area-rectangle mask→obb conversion.
    pub allow_mask_to_obb: bool,
}

impl Default for BuildOptions {
    fn default() -> Self {
        Self { codec: CodecConfig::default(), synthesize_masks: false, allow_mask_to_obb: false }
    }
}

fn grid_of(a: &Annotation, opts: &BuildOptions) -> Result<Option<(GridMask, MaskSource)>, BuildError> {
    let n = opts.codec.mask_resolution;
    let found = match &a.mask {
        Some(AnnotatedMask::Pixels(m)) => Some((downsample(m, n, Resample::MaxPool)?, MaskSource::Annotated)),
        Some(AnnotatedMask::Grid(g)) if g.n() == n => Some((g.clone(), MaskSource::Annotated)),
        Some(AnnotatedMask::Grid(g)) => {
            return Err(CodecError::ResolutionMismatch { expected: n, found: g.n() }.into())
        }
        None => match (&a.obb, opts.synthesize_masks) {
            (Some(obb), true) => {
                let pixels = rasterize_obb(obb, a.image_width as usize, a.image_height as usize)?;
                Some((downsample(&pixels, n, Resample::MaxPool)?, MaskSource::RasterizedObb))
            }
            _ => None,
        },
    };
    match found {
        Some((g, _)) if g.is_empty() => Err(BuildError::DisappearedObject),
        other => Ok(other),
    }
}

fn hbb_of(a: &Annotation, opts: &BuildOptions) -> Result<Option<Hbb>, BuildError> {
    if let Some(h) = a.hbb {
        return Ok(Some(h));
    }
    if let Some(o) = &a.obb {
        return Ok(Some(obb_to_hbb(o)));
    }
    match grid_of(a, opts)? {
        Some((g, _)) => Ok(Some(mask_to_hbb(&g)?)),
        None => Ok(None),
    }
}

fn obb_of(a: &Annotation, opts: &BuildOptions) -> Result<Option<Obb>, BuildError> {
    if let Some(o) = a.obb {
        return Ok(Some(o));
    }
    if opts.allow_mask_to_obb {
        if let Some((g, _)) = grid_of(a, opts)? {
            return Ok(Some(mask_to_obb(&g)?));
        }
    }
    Ok(None)
}

/// Encoded signal of `kind` for the annotation, with the mask source when
/// the signal is a mask.
fn signal_of(
    a: &Annotation,
    kind: SignalKind,
    task: TaskKind,
    opts: &BuildOptions,
) -> Result<(TextSignal, Option<MaskSource>), BuildError> {
    let missing = BuildError::MissingSignal { task, needed: kind };
    match kind {
        SignalKind::Hbb => Ok((encode_hbb(&hbb_of(a, opts)?.ok_or(missing)?, &opts.codec), None)),
        SignalKind::Obb => Ok((encode_obb(&obb_of(a, opts)?.ok_or(missing)?, &opts.codec), None)),
        SignalKind::Mask => {
            let (g, src) = grid_of(a, opts)?.ok_or(missing)?;
            Ok((encode_mask(&g, &opts.codec)?, Some(src)))
        }
    }
}

fn pick_template(rng: &mut ChaCha8Rng) -> usize {
    rng.gen_range(0..5)
}

fn human(text: String) -> Turn {
    Turn { role: Role::Human, text }
}

fn model(text: String) -> Turn {
    Turn { role: Role::Model, text }
}

/// Plain grounding sample: `rec`, `rec_obb`, `res`, or `det` over this one
/// annotation (use [`build_det`] for multi-object groups).
pub fn build_basic(a: &Annotation, task: Task, opts: &BuildOptions, seed: u64) -> Result<InstructionRecord, BuildError> {
    a.validate()?;
    let (set, kind) = match task {
        Task::Rec => (&templates::REC, SignalKind::Hbb),
        Task::RecObb => (&templates::REC_OBB, SignalKind::Obb),
        Task::Res => (&templates::RES, SignalKind::Mask),
        Task::Det => return build_det(&[a], opts, seed),
        Task::Pal(pair) => return build_pal(a, pair, opts, seed),
        Task::Ggl(pair) => return build_ggl(a, pair, opts, seed),
    };
    let (signal, mask_source) = signal_of(a, kind, task.kind(), opts)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let template_index = pick_template(&mut rng);
    let query = templates::fill(set[template_index], &[("prompt", a.expression.trim())]);
    Ok(InstructionRecord {
        image_id: a.image_id.clone(),
        task,
        conversations: alloc::vec![human(query), model(signal.into_payload())],
        template_index,
        mask_source,
        source: 0,
    })
}

/// Multi-object detection sample over annotations sharing an image and a
/// category. Objects without a derivable box are left out.
pub fn build_det(objects: &[&Annotation], opts: &BuildOptions, seed: u64) -> Result<InstructionRecord, BuildError> {
    let first = objects.first().ok_or(BuildError::EmptyGroup)?;
    let mut bodies: Vec<String> = Vec::with_capacity(objects.len());
    for a in objects {
        if let Some(h) = hbb_of(a, opts)? {
            bodies.push(encode_hbb(&h, &opts.codec).body().to_string());
        }
    }
    if bodies.is_empty() {
        return Err(BuildError::MissingSignal { task: TaskKind::Det, needed: SignalKind::Hbb });
    }
    let prompt = first.category.as_deref().unwrap_or(first.expression.as_str()).trim();
    if prompt.is_empty() {
        return Err(BuildError::EmptyExpression);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let template_index = pick_template(&mut rng);
    let query = templates::fill(templates::DET[template_index], &[("prompt", prompt)]);
    let answer = alloc::format!("<box>{}</box>", bodies.join(";"));
    Ok(InstructionRecord {
        image_id: first.image_id.clone(),
        task: Task::Det,
        conversations: alloc::vec![human(query), model(answer)],
        template_index,
        mask_source: None,
        source: 0,
    })
}

/// Prompt-assisted sample: the query embeds the sparse signal, the answer
/// is the dense one.
pub fn build_pal(a: &Annotation, pair: PalPair, opts: &BuildOptions, seed: u64) -> Result<InstructionRecord, BuildError> {
    a.validate()?;
    let (dense, mask_source) = signal_of(a, pair.dense, TaskKind::Pal, opts)?;
    let (sparse, _) = signal_of(a, pair.sparse, TaskKind::Pal, opts)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let template_index = pick_template(&mut rng);
    let query = templates::fill(
        templates::PAL[template_index],
        &[
            ("dense", templates::signal_noun(pair.dense)),
            ("signal", sparse.payload()),
            ("prompt", a.expression.trim()),
        ],
    );
    Ok(InstructionRecord {
        image_id: a.image_id.clone(),
        task: Task::Pal(pair),
        conversations: alloc::vec![human(query), model(dense.into_payload())],
        template_index,
        mask_source,
        source: 0,
    })
}

/// The sparse answer implied by a dense answer, derived from its text alone.
pub fn geometric_reduction(dense: &TextSignal, pair: GglPair, opts: &BuildOptions) -> Result<TextSignal, BuildError> {
    let decoded = decode(dense, &opts.codec)?;
    let reduced = match (decoded, pair.sparse) {
        (Signal::Obb(o), SignalKind::Hbb) => Signal::Hbb(obb_to_hbb(&o)),
        (Signal::Mask(g), SignalKind::Hbb) => Signal::Hbb(mask_to_hbb(&g).map_err(empty_to_disappeared)?),
        (Signal::Mask(g), SignalKind::Obb) => {
            if !opts.allow_mask_to_obb {
                return Err(BuildError::MaskToObbDisabled);
            }
            Signal::Obb(mask_to_obb(&g).map_err(empty_to_disappeared)?)
        }
        (other, to) => {
            return Err(BuildError::UnsupportedPair { task: TaskKind::Ggl, from: other.kind(), to })
        }
    };
    Ok(reduced.encode(&opts.codec)?)
}

fn empty_to_disappeared(e: GeometryError) -> BuildError {
    match e {
        GeometryError::EmptyMask => BuildError::DisappearedObject,
        other => other.into(),
    }
}

/// Geometry-guided sample: turn one answers the dense signal, turn two
/// reduces that answer to the sparse signal without looking at the image.
pub fn build_ggl(a: &Annotation, pair: GglPair, opts: &BuildOptions, seed: u64) -> Result<InstructionRecord, BuildError> {
    a.validate()?;
    if pair.dense == SignalKind::Mask && pair.sparse == SignalKind::Obb && !opts.allow_mask_to_obb {
        return Err(BuildError::MaskToObbDisabled);
    }
    let (dense, mask_source) = signal_of(a, pair.dense, TaskKind::Ggl, opts)?;
    let sparse = geometric_reduction(&dense, pair, opts)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let template_index = pick_template(&mut rng);
    let dense_noun = templates::signal_noun(pair.dense);
    let first = templates::fill(
        templates::GGL_FIRST[template_index],
        &[("dense", dense_noun), ("prompt", a.expression.trim())],
    );
    let second = templates::fill(
        templates::GGL_SECOND,
        &[("sparse", templates::signal_noun(pair.sparse)), ("dense", dense_noun)],
    );
    Ok(InstructionRecord {
        image_id: a.image_id.clone(),
        task: Task::Ggl(pair),
        conversations: alloc::vec![
            human(first),
            model(dense.into_payload()),
            human(second),
            model(sparse.into_payload()),
        ],
        template_index,
        mask_source,
        source: 0,
    })
}

pub fn build(a: &Annotation, task: Task, opts: &BuildOptions, seed: u64) -> Result<InstructionRecord, BuildError> {
    build_basic(a, task, opts, seed)
}

/// Anything tied to one image.
pub trait ImageKeyed {
    fn image_id(&self) -> &str;
}

impl ImageKeyed for InstructionRecord {
    fn image_id(&self) -> &str {
        &self.image_id
    }
}

impl ImageKeyed for Annotation {
    fn image_id(&self) -> &str {
        &self.image_id
    }
}

/// Drops items whose image is held out; returns the kept items in order and
/// the number dropped.
pub fn filter_leakage<T: ImageKeyed>(items: Vec<T>, held_out: &BTreeSet<String>) -> (Vec<T>, usize) {
    let before = items.len();
    let kept: Vec<T> = items.into_iter().filter(|r| !held_out.contains(r.image_id())).collect();
    let dropped = before - kept.len();
    (kept, dropped)
}

/// Indices of annotations grouped by `(image, category)`, in order of first
/// appearance. Annotations without a category are not grouped.
pub fn group_detections(annotations: &[Annotation]) -> Vec<Vec<usize>> {
    let mut keys: Vec<(&str, &str)> = Vec::new();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (i, a) in annotations.iter().enumerate() {
        let Some(cat) = a.category.as_deref() else { continue };
        let key = (a.image_id.as_str(), cat);
        match keys.iter().position(|k| *k == key) {
            Some(g) => groups[g].push(i),
            None => {
                keys.push(key);
                groups.push(alloc::vec![i]);
            }
        }
    }
    groups
}

/// What to generate for a dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetPlan {
    pub tasks: Vec<Task>,
    /// Keep probability per entry of `tasks`; missing entries mean 1.
    pub weights: Vec<f64>,
    pub options: BuildOptions,
}

impl DatasetPlan {
    pub fn new(tasks: Vec<Task>, options: BuildOptions) -> Self {
        Self { tasks, weights: Vec::new(), options }
    }

    fn weight(&self, i: usize) -> f64 {
        self.weights.get(i).copied().unwrap_or(1.0)
    }
}

/// A candidate that produced no record.
#[derive(Debug, Clone, PartialEq)]
pub struct Skip {
    pub annotation: usize,
    pub image_id: String,
    pub task: Task,
    pub reason: BuildError,
}

pub type Outcome = Result<InstructionRecord, Skip>;

/// Seed for candidate `(item, task)`; independent of processing order.
pub fn candidate_seed(seed: u64, item: usize, task: &Task) -> u64 {
    crate::derive_seed(crate::derive_seed(seed, item as u64), task.code())
}

fn kept_by_weight(weight: f64, seed: u64) -> bool {
    if weight >= 1.0 {
        return true;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(crate::derive_seed(seed, 0x5745_4947_4854));
    rng.gen::<f64>() < weight
}

/// All non-detection candidates for one annotation, in plan order.
/// Candidates dropped by their task weight yield nothing.
pub fn annotation_outcomes(index: usize, a: &Annotation, plan: &DatasetPlan, seed: u64) -> Vec<Outcome> {
    let mut out = Vec::new();
    for (ti, task) in plan.tasks.iter().enumerate() {
        if *task == Task::Det {
            continue;
        }
        let s = candidate_seed(seed, index, task);
        if !kept_by_weight(plan.weight(ti), s) {
            continue;
        }
        out.push(build(a, *task, &plan.options, s).map(|r| InstructionRecord { source: index, ..r }).map_err(|reason| Skip {
            annotation: index,
            image_id: a.image_id.clone(),
            task: *task,
            reason,
        }));
    }
    out
}

/// Detection candidates, one per `(image, category)` group. Group seeds are
/// keyed by the index of the group's first annotation.
pub fn detection_outcomes(annotations: &[Annotation], plan: &DatasetPlan, seed: u64) -> Vec<Outcome> {
    let Some(ti) = plan.tasks.iter().position(|t| *t == Task::Det) else {
        return Vec::new();
    };
    group_detections(annotations)
        .into_iter()
        .filter_map(|group| {
            let lead = group[0];
            let s = candidate_seed(seed, lead, &Task::Det);
            if !kept_by_weight(plan.weight(ti), s) {
                return None;
            }
            let members: Vec<&Annotation> = group.iter().map(|&i| &annotations[i]).collect();
            Some(build_det(&members, &plan.options, s).map(|r| InstructionRecord { source: lead, ..r }).map_err(|reason| Skip {
                annotation: lead,
                image_id: annotations[lead].image_id.clone(),
                task: Task::Det,
                reason,
            }))
        })
        .collect()
}

/// Sequential reference driver: per-annotation candidates in input order,
/// then detection groups.
pub fn build_dataset(annotations: &[Annotation], plan: &DatasetPlan, seed: u64) -> Vec<Outcome> {
    let mut out: Vec<Outcome> = annotations
        .iter()
        .enumerate()
        .flat_map(|(i, a)| annotation_outcomes(i, a, plan, seed))
        .collect();
    out.extend(detection_outcomes(annotations, plan, seed));
    out
}
