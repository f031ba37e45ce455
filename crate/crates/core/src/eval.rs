//! Scoring of predictions against ground truth.
//!
//! Predictions are matched to ground truth by sample id. Every ground-truth
//! sample gets exactly one row; a prediction that is absent or could not be
//! parsed scores IoU 0 and carries a note saying why. Threshold comparisons
//! are inclusive (`iou >= 0.5`).

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

use crate::geometry::{
    downsample, hbb_iou, mask_iou, mask_to_hbb, obb_to_hbb, rotated_iou, upsample, GeometryError, GridMask, Hbb,
    Obb, PixelMask, Resample,
};
use crate::textcodec::{mask_body_len, SignalKind, TextSignal};

pub const IOU_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("duplicate sample id {0:?}")]
    DuplicateId(String),
    #[error("sample {0:?} is missing one of the hbb, obb and mask signals")]
    IncompleteTriple(String),
    #[error("no masks to analyze")]
    EmptyCorpus,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Why a row scored the way it did, when that is not simply the IoU.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Note {
    /// No prediction with this sample id.
    Missing,
    /// A prediction exists but held no usable signal.
    Unparseable,
    /// Predicted and ground-truth masks have different dimensions.
    DimensionMismatch,
    /// The predicted mask is empty.
    EmptyMask,
}

impl Note {
    pub fn label(self) -> &'static str {
        match self {
            Note::Missing => "missing",
            Note::Unparseable => "unparseable",
            Note::DimensionMismatch => "dimension-mismatch",
            Note::EmptyMask => "empty-mask",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub sample_id: String,
    pub iou: f64,
    pub hit: bool,
    pub note: Option<Note>,
}

/// Per-sample rows (in ground-truth order) and their summary.
#[derive(Debug, Clone, PartialEq)]
pub struct Scores {
    pub rows: Vec<Row>,
    /// Predictions whose id matches no ground-truth sample.
    pub unmatched: usize,
}

impl Scores {
    pub fn total(&self) -> usize {
        self.rows.len()
    }

    pub fn hits(&self) -> usize {
        self.rows.iter().filter(|r| r.hit).count()
    }

    /// Acc@0.5; 0 for an empty ground-truth set.
    pub fn accuracy(&self) -> f64 {
        ratio(self.hits(), self.total())
    }

    /// Mean IoU over ground-truth samples.
    pub fn mean_iou(&self) -> f64 {
        if self.rows.is_empty() {
            return 0.0;
        }
        self.rows.iter().map(|r| r.iou).sum::<f64>() / self.rows.len() as f64
    }

    /// Rows scored as misses because the prediction was absent or unparseable.
    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| matches!(r.note, Some(Note::Missing | Note::Unparseable))).count()
    }
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

fn index<'a, S: AsRef<str>, T>(items: &'a [(S, T)]) -> Result<BTreeMap<&'a str, &'a T>, EvalError> {
    let mut map = BTreeMap::new();
    for (id, v) in items {
        if map.insert(id.as_ref(), v).is_some() {
            return Err(EvalError::DuplicateId(String::from(id.as_ref())));
        }
    }
    Ok(map)
}

/// Aligns predictions with ground truth and scores each pair.
///
/// A `None` prediction is one that was present but unparseable.
pub fn score_aligned<S, P, G>(
    preds: &[(S, Option<P>)],
    gts: &[(S, G)],
    mut score: impl FnMut(&P, &G) -> (f64, Option<Note>),
) -> Result<Scores, EvalError>
where
    S: AsRef<str>,
{
    let pred_map = index(preds)?;
    let gt_map = index(gts)?;
    let unmatched = pred_map.keys().filter(|id| !gt_map.contains_key(*id)).count();
    let rows = gts
        .iter()
        .map(|(id, gt)| {
            let (iou, note) = match pred_map.get(id.as_ref()) {
                None => (0.0, Some(Note::Missing)),
                Some(None) => (0.0, Some(Note::Unparseable)),
                Some(Some(p)) => score(p, gt),
            };
            Row { sample_id: String::from(id.as_ref()), iou, hit: iou >= IOU_THRESHOLD, note }
        })
        .collect();
    Ok(Scores { rows, unmatched })
}

pub fn acc_at_05_hbb<S: AsRef<str>>(preds: &[(S, Option<Hbb>)], gts: &[(S, Hbb)]) -> Result<Scores, EvalError> {
    score_aligned(preds, gts, |p, g| (hbb_iou(p, g), None))
}

/// Acc@0.5 under rotated IoU.
pub fn acc_at_05_obb<S: AsRef<str>>(preds: &[(S, Option<Obb>)], gts: &[(S, Obb)]) -> Result<Scores, EvalError> {
    score_aligned(preds, gts, |p, g| (rotated_iou(p, g), None))
}

/// Scores oriented-box predictions against horizontal ground truth by
/// taking the enclosing box first.
pub fn acc_at_05_obb_as_hbb<S: AsRef<str>>(
    preds: &[(S, Option<Obb>)],
    gts: &[(S, Hbb)],
) -> Result<Scores, EvalError> {
    score_aligned(preds, gts, |p, g| (hbb_iou(&obb_to_hbb(p), g), None))
}

/// A predicted mask: a coarse grid or an already full-resolution mask.
#[derive(Debug, Clone, PartialEq)]
pub enum MaskPrediction {
    Grid(GridMask),
    Pixels(PixelMask),
}

fn mask_pair_iou(pred: &MaskPrediction, gt: &PixelMask) -> (f64, Option<Note>) {
    let full;
    let pixels = match pred {
        MaskPrediction::Pixels(p) => p,
        MaskPrediction::Grid(g) => match upsample(g, gt.width(), gt.height()) {
            Ok(p) => {
                full = p;
                &full
            }
            Err(_) => return (0.0, Some(Note::DimensionMismatch)),
        },
    };
    match mask_iou(pixels, gt) {
        Ok(iou) => (iou, pixels.is_empty().then_some(Note::EmptyMask)),
        Err(_) => (0.0, Some(Note::DimensionMismatch)),
    }
}

/// Mask IoU at full image resolution; grids are upsampled to the ground
/// truth's dimensions. `mean_iou()` is mIoU and `accuracy()` mask Acc@0.5.
pub fn miou<S: AsRef<str>>(preds: &[(S, Option<MaskPrediction>)], gts: &[(S, PixelMask)]) -> Result<Scores, EvalError> {
    score_aligned(preds, gts, mask_pair_iou)
}

/// The three signals a model produced for one object.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionTriple {
    pub sample_id: String,
    pub hbb: Option<Hbb>,
    pub obb: Option<Obb>,
    pub mask: Option<GridMask>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Consistency {
    pub score: f64,
    /// IoUs of (hbb, obb), (hbb, mask), (obb, mask) enclosing boxes.
    pub pairs: [f64; 3],
    /// The mask was empty; both pairs involving it scored 0.
    pub empty_mask: bool,
}

/// BBox consistency score: mean pairwise IoU of the boxes enclosing the
/// three predicted signals.
pub fn bcs(t: &PredictionTriple) -> Result<Consistency, EvalError> {
    let (Some(hbb), Some(obb), Some(mask)) = (&t.hbb, &t.obb, &t.mask) else {
        return Err(EvalError::IncompleteTriple(t.sample_id.clone()));
    };
    let from_obb = obb_to_hbb(obb);
    let from_mask = match mask_to_hbb(mask) {
        Ok(h) => Some(h),
        Err(GeometryError::EmptyMask) => None,
        Err(e) => return Err(e.into()),
    };
    let with_mask = |h: &Hbb| from_mask.as_ref().map_or(0.0, |m| hbb_iou(h, m));
    let pairs = [hbb_iou(hbb, &from_obb), with_mask(hbb), with_mask(&from_obb)];
    Ok(Consistency { score: (pairs[0] + pairs[1] + pairs[2]) / 3.0, pairs, empty_mask: from_mask.is_none() })
}

/// Fraction of masks whose `n`×`n` grid has no foreground cell.
pub fn disappearance_rate(masks: &[PixelMask], n: usize, mode: Resample) -> Result<f64, EvalError> {
    if masks.is_empty() {
        return Err(EvalError::EmptyCorpus);
    }
    let mut gone = 0;
    for m in masks {
        if downsample(m, n, mode)?.is_empty() {
            gone += 1;
        }
    }
    Ok(ratio(gone, masks.len()))
}

/// Character counts of mask bodies (tags excluded), raw vs run-length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LengthStats {
    pub count: usize,
    pub raw_mean: f64,
    pub raw_max: usize,
    pub rle_mean: f64,
    pub rle_max: usize,
    /// Mean over grids of rle / raw.
    pub mean_ratio: f64,
    /// Total rle characters over total raw characters.
    pub pooled_ratio: f64,
}

pub fn length_stats(grids: &[GridMask]) -> LengthStats {
    let mut s = LengthStats {
        count: grids.len(),
        raw_mean: 0.0,
        raw_max: 0,
        rle_mean: 0.0,
        rle_max: 0,
        mean_ratio: 0.0,
        pooled_ratio: 0.0,
    };
    if grids.is_empty() {
        return s;
    }
    let (mut raw_total, mut rle_total, mut ratio_sum) = (0usize, 0usize, 0.0);
    for g in grids {
        let raw = mask_body_len(g, false);
        let rle = mask_body_len(g, true);
        raw_total += raw;
        rle_total += rle;
        s.raw_max = s.raw_max.max(raw);
        s.rle_max = s.rle_max.max(rle);
        ratio_sum += rle as f64 / raw as f64;
    }
    let n = grids.len() as f64;
    s.raw_mean = raw_total as f64 / n;
    s.rle_mean = rle_total as f64 / n;
    s.mean_ratio = ratio_sum / n;
    s.pooled_ratio = ratio(rle_total, raw_total);
    s
}

/// Mean and max payload length (characters, tags included) of one kind.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PayloadLengths {
    pub kind: SignalKind,
    pub count: usize,
    pub mean: f64,
    pub max: usize,
}

/// Payload lengths grouped by kind, in `SignalKind::ALL` order; kinds with
/// no signals are omitted.
pub fn payload_lengths(signals: &[TextSignal]) -> Vec<PayloadLengths> {
    SignalKind::ALL
        .into_iter()
        .filter_map(|kind| {
            let lens: Vec<usize> =
                signals.iter().filter(|s| s.kind() == kind).map(|s| s.payload().chars().count()).collect();
            let max = *lens.iter().max()?;
            Some(PayloadLengths { kind, count: lens.len(), mean: lens.iter().sum::<usize>() as f64 / lens.len() as f64, max })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::format;
    use alloc::vec;

    fn hbb(x1: f64, y1: f64, x2: f64, y2: f64) -> Hbb {
        Hbb::new(x1, y1, x2, y2).unwrap()
    }

    // independent IoU: explicit overlap lengths
    fn oracle_iou(a: [f64; 4], b: [f64; 4]) -> f64 {
        let ix = (a[2].min(b[2]) - a[0].max(b[0])).max(0.0);
        let iy = (a[3].min(b[3]) - a[1].max(b[1])).max(0.0);
        let inter = ix * iy;
        let union = (a[2] - a[0]) * (a[3] - a[1]) + (b[2] - b[0]) * (b[3] - b[1]) - inter;
        inter / union
    }

    #[test]
    fn acc_identity_and_missing() {
        let gts = vec![("a", hbb(0.1, 0.1, 0.3, 0.3)), ("b", hbb(0.5, 0.5, 0.9, 0.6))];
        let preds: Vec<_> = gts.iter().map(|(i, h)| (*i, Some(*h))).collect();
        assert_eq!(acc_at_05_hbb(&preds, &gts).unwrap().accuracy(), 1.0);
        let none: Vec<(&str, Option<Hbb>)> = Vec::new();
        let s = acc_at_05_hbb(&none, &gts).unwrap();
        assert_eq!(s.accuracy(), 0.0);
        assert_eq!(s.failures(), 2);
        assert!(s.rows.iter().all(|r| r.note == Some(Note::Missing)));
    }

    #[test]
    fn acc_straddling_threshold() {
        // prediction shifted right by a fraction d of the width:
        // IoU = (1-d)/(1+d), which is >= 0.5 iff d <= 1/3
        let gt = [0.0, 0.0, 0.5, 0.5];
        let shifts = [0.0, 0.1, 0.2, 0.3, 0.33, 0.334, 0.34, 0.4, 0.5, 0.8];
        let mut gts = Vec::new();
        let mut preds = Vec::new();
        let mut expected = 0;
        for (i, d) in shifts.iter().enumerate() {
            let p = [d * 0.5, 0.0, 0.5 + d * 0.5, 0.5];
            if oracle_iou(p, gt) >= 0.5 {
                expected += 1;
            }
            gts.push((format!("s{i}"), hbb(gt[0], gt[1], gt[2], gt[3])));
            preds.push((format!("s{i}"), Some(hbb(p[0], p[1], p[2], p[3]))));
        }
        let s = acc_at_05_hbb(&preds, &gts).unwrap();
        assert_eq!(s.hits(), expected);
        assert_eq!(expected, 5);
        for (r, d) in s.rows.iter().zip(shifts) {
            let p = [d * 0.5, 0.0, 0.5 + d * 0.5, 0.5];
            assert!((r.iou - oracle_iou(p, gt)).abs() < 1e-12);
        }
    }

    #[test]
    fn threshold_is_inclusive() {
        // area 0.08 vs 0.04 nested: IoU exactly 0.5
        let gts = [("x", hbb(0.0, 0.0, 0.5, 0.25))];
        let preds = [("x", Some(hbb(0.0, 0.0, 0.25, 0.25)))];
        let s = acc_at_05_hbb(&preds, &gts).unwrap();
        assert_eq!(s.rows[0].iou, 0.5);
        assert!(s.rows[0].hit);
    }

    #[test]
    fn duplicate_ids_rejected() {
        let gts = [("x", hbb(0.0, 0.0, 0.5, 0.25)), ("x", hbb(0.0, 0.0, 0.5, 0.25))];
        let preds: [(&str, Option<Hbb>); 0] = [];
        assert_eq!(acc_at_05_hbb(&preds, &gts), Err(EvalError::DuplicateId("x".into())));
    }

    #[test]
    fn rotated_square_at_45() {
        // unit square vs itself turned 45°: intersection is a regular octagon
        // with area 2(√2−1)·s², union 2s² − that
        let s = 0.2;
        let a = Obb::new(0.5, 0.5, s, s, 0.0).unwrap();
        let b = Obb::new(0.5, 0.5, s, s, 45.0).unwrap();
        let inter = 2.0 * (2f64.sqrt() - 1.0) * s * s;
        let want = inter / (2.0 * s * s - inter);
        let sc = acc_at_05_obb(&[("q", Some(b))], &[("q", a)]).unwrap();
        assert!((sc.rows[0].iou - want).abs() < 1e-12);
        assert_eq!(sc.rows[0].hit, want >= 0.5);
        assert!(sc.rows[0].hit);
    }

    #[test]
    fn miou_identity_complement_and_popcount() {
        let gt = PixelMask::from_fn(40, 30, |x, y| (x * 7 + y * 3) % 5 == 0).unwrap();
        let inverse = PixelMask::from_fn(40, 30, |x, y| (x * 7 + y * 3) % 5 != 0).unwrap();
        let s = miou(&[("m", Some(MaskPrediction::Pixels(gt.clone())))], &[("m", gt.clone())]).unwrap();
        assert_eq!(s.mean_iou(), 1.0);
        let s = miou(&[("m", Some(MaskPrediction::Pixels(inverse)))], &[("m", gt.clone())]).unwrap();
        assert_eq!(s.mean_iou(), 0.0);

        let g = GridMask::from_fn(4, |r, c| r == c || r == 0).unwrap();
        let up = upsample(&g, 40, 30).unwrap();
        let (mut i, mut u) = (0, 0);
        for (p, q) in up.bits().iter().zip(gt.bits()) {
            i += (*p && *q) as usize;
            u += (*p || *q) as usize;
        }
        let s = miou(&[("m", Some(MaskPrediction::Grid(g)))], &[("m", gt)]).unwrap();
        assert!((s.mean_iou() - i as f64 / u as f64).abs() < 1e-12);
    }

    #[test]
    fn miou_dimension_mismatch_scores_zero() {
        let gt = PixelMask::from_fn(8, 8, |_, _| true).unwrap();
        let p = PixelMask::from_fn(4, 4, |_, _| true).unwrap();
        let s = miou(&[("m", Some(MaskPrediction::Pixels(p)))], &[("m", gt)]).unwrap();
        assert_eq!(s.rows[0].iou, 0.0);
        assert_eq!(s.rows[0].note, Some(Note::DimensionMismatch));
    }

    fn triple(h: Hbb, o: Obb, m: GridMask) -> PredictionTriple {
        PredictionTriple { sample_id: "t".into(), hbb: Some(h), obb: Some(o), mask: Some(m) }
    }

    #[test]
    fn bcs_cases() {
        let g = GridMask::from_fn(8, |r, c| (2..6).contains(&r) && (1..4).contains(&c)).unwrap();
        let h = mask_to_hbb(&g).unwrap();
        let c = bcs(&triple(h, h.to_obb(), g)).unwrap();
        assert!((c.score - 1.0).abs() < 1e-9);

        let g = GridMask::from_fn(8, |r, c| r == 7 && c == 7).unwrap();
        let c = bcs(&triple(hbb(0.0, 0.0, 0.1, 0.1), Obb::new(0.4, 0.4, 0.1, 0.1, 0.0).unwrap(), g)).unwrap();
        assert_eq!(c.score, 0.0);

        // hbb == obb box; mask box is half of it
        let g = GridMask::from_fn(8, |r, c| r < 4 && c < 2).unwrap();
        let big = hbb(0.0, 0.0, 0.5, 0.5);
        assert_eq!(oracle_iou(big.to_array(), mask_to_hbb(&g).unwrap().to_array()), 0.5);
        let c = bcs(&triple(big, big.to_obb(), g)).unwrap();
        assert_eq!(c.pairs, [1.0, 0.5, 0.5]);
        assert!((c.score - 2.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn bcs_incomplete_and_empty_mask() {
        let h = hbb(0.1, 0.1, 0.4, 0.4);
        let t = PredictionTriple { sample_id: "z".into(), hbb: Some(h), obb: None, mask: None };
        assert_eq!(bcs(&t), Err(EvalError::IncompleteTriple("z".into())));
        let c = bcs(&triple(h, h.to_obb(), GridMask::empty(8).unwrap())).unwrap();
        assert!(c.empty_mask);
        assert_eq!(c.pairs[1..], [0.0, 0.0]);
        assert!((c.score - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn disappearance_single_pixels() {
        // nearest samples pixel floor((2i+1)·64/(2·16)) = 4i+2 on each axis
        let masks: Vec<PixelMask> = (0..64)
            .map(|k| PixelMask::from_fn(64, 64, |x, y| x == k && y == (k * 5) % 64).unwrap())
            .collect();
        let sampled = |v: usize| v % 4 == 2;
        let expected = (0..64).filter(|&k| !(sampled(k) && sampled((k * 5) % 64))).count();
        let rate = disappearance_rate(&masks, 16, Resample::Nearest).unwrap();
        assert_eq!(rate, expected as f64 / 64.0);
        assert_eq!(disappearance_rate(&masks, 16, Resample::MaxPool).unwrap(), 0.0);
        assert_eq!(disappearance_rate(&[], 16, Resample::MaxPool), Err(EvalError::EmptyCorpus));
    }

    #[test]
    fn length_stats_empty_grid() {
        let g = GridMask::empty(16).unwrap();
        let s = length_stats(&[g.clone(), g]);
        assert_eq!(s.raw_max, 16 * 16 + 15);
        // each row is "0*16"
        assert_eq!(s.rle_max, 16 * 4 + 15);
        assert_eq!(s.pooled_ratio, s.mean_ratio);
        assert!(s.mean_ratio < 1.0);
    }

    #[test]
    fn payload_lengths_by_kind() {
        let sigs = [
            TextSignal::parse("<box>[1,2,3,4]</box>").unwrap(),
            TextSignal::parse("<box>[10,20,30,40]</box>").unwrap(),
            TextSignal::parse("<seg>1*2|01</seg>").unwrap(),
        ];
        let p = payload_lengths(&sigs);
        assert_eq!(p.len(), 2);
        assert_eq!((p[0].kind, p[0].count, p[0].max), (SignalKind::Hbb, 2, 24));
        assert_eq!(p[0].mean, 22.0);
        assert_eq!(p[1].kind, SignalKind::Mask);
    }
}
