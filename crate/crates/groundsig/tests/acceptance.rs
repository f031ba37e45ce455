//! End-to-end acceptance checks. Runs without the libtest harness so every
//! check prints its own PASS/FAIL line; exits non-zero if any fail.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use groundsig::formats::{is_header, InstructionLine};
use groundsig_core::camera::{camera_to_pixel, pixel_to_ground, CameraModel};
use groundsig_core::eval::{bcs, disappearance_rate, PredictionTriple};
use groundsig_core::geometry::{
    downsample, hbb_iou, mask_to_hbb, mask_to_obb, obb_to_hbb, rotated_iou, GridMask, Hbb, Obb, PixelMask, Resample,
};
use groundsig_core::instruct::{build_ggl, AnnotatedMask, Annotation, BuildOptions, GglPair, Role};
use groundsig_core::refine::make_prompt;
use groundsig_core::textcodec::{
    decode, decode_hbb, decode_mask, decode_obb, encode_hbb, encode_mask, encode_obb, mask_body_len, Signal,
};
use groundsig_core::{derive_seed, CodecConfig, SignalKind, TextSignal};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(elapsed: Duration, limit_s: f64) -> Result<(), String> {
    ensure(elapsed.as_secs_f64() < limit_s, format!("took {:.2}s, limit {limit_s}s", elapsed.as_secs_f64()))
}

fn rng(tag: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(0x5eed_0000 + tag)
}

// --- 1 ---------------------------------------------------------------------

fn codec_round_trips() -> Check {
    let start = Instant::now();
    let mut r = rng(1);
    let cfg = CodecConfig::default();
    let (mut hbb_err, mut lin_err, mut ang_err) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..10_000 {
        let h = Hbb::spanning(r.gen(), r.gen(), r.gen(), r.gen()).unwrap();
        let back = decode_hbb(&encode_hbb(&h, &cfg), &cfg).map_err(|e| e.to_string())?;
        for (a, b) in h.to_array().iter().zip(back.to_array()) {
            hbb_err = hbb_err.max((a - b).abs());
        }

        let o = Obb::new(r.gen(), r.gen(), r.gen(), r.gen(), r.gen_range(-180.0..360.0)).unwrap();
        let back = decode_obb(&encode_obb(&o, &cfg), &cfg).map_err(|e| e.to_string())?;
        let (a, b) = (o.to_array(), back.to_array());
        for i in 0..4 {
            lin_err = lin_err.max((a[i] - b[i]).abs());
        }
        ang_err = ang_err.max((a[4] - b[4]).abs());

        let n = r.gen_range(1..=40);
        let density: f64 = r.gen();
        let g = GridMask::from_fn(n, |_, _| r.gen_bool(density)).unwrap();
        for rle in [false, true] {
            let c = CodecConfig { mask_resolution: n, rle, ..cfg };
            let back = decode_mask(&encode_mask(&g, &c).map_err(|e| e.to_string())?, &c).map_err(|e| e.to_string())?;
            ensure(back == g, format!("grid n={n} rle={rle} not bit-exact"))?;
        }
    }
    let elapsed = start.elapsed();
    ensure(hbb_err <= 0.5 / 1000.0 + 1e-12, format!("hbb error {hbb_err}"))?;
    ensure(lin_err <= 0.5 / 100.0 + 1e-12, format!("obb linear error {lin_err}"))?;
    ensure(ang_err <= 1.0, format!("angle error {ang_err}"))?;
    within(elapsed, 5.0)?;
    Ok(format!(
        "10000 each of hbb/obb/grid; max errors hbb {hbb_err:.2e}, obb {lin_err:.2e}, angle {ang_err:.3} deg; {:.2}s",
        elapsed.as_secs_f64()
    ))
}

// --- 2 ---------------------------------------------------------------------

/// One or two overlapping rotated ellipses on a 256² canvas.
fn blob(r: &mut ChaCha8Rng, size: usize) -> PixelMask {
    let s = size as f64;
    let mut parts = Vec::new();
    let (cx, cy) = (r.gen_range(0.2..0.8) * s, r.gen_range(0.2..0.8) * s);
    for k in 0..r.gen_range(1..=2) {
        let off = if k == 0 { (0.0, 0.0) } else { (r.gen_range(-0.1..0.1) * s, r.gen_range(-0.1..0.1) * s) };
        parts.push((cx + off.0, cy + off.1, r.gen_range(0.04..0.3) * s, r.gen_range(0.04..0.3) * s, r.gen_range(0.0..PI)));
    }
    PixelMask::from_fn(size, size, |x, y| {
        let (px, py) = (x as f64 + 0.5, y as f64 + 0.5);
        parts.iter().any(|&(cx, cy, a, b, t)| {
            let (dx, dy) = (px - cx, py - cy);
            let u = dx * t.cos() + dy * t.sin();
            let v = -dx * t.sin() + dy * t.cos();
            (u / a).powi(2) + (v / b).powi(2) <= 1.0
        })
    })
    .unwrap()
}

fn rle_compression() -> Check {
    let mut r = rng(2);
    let cfg = CodecConfig { mask_resolution: 16, rle: true, ..CodecConfig::default() };
    let grids: Vec<GridMask> = (0..1000).map(|_| downsample(&blob(&mut r, 256), 16, Resample::MaxPool).unwrap()).collect();
    // the time limit covers the codec, not fixture synthesis
    let start = Instant::now();
    let mut ratios = Vec::new();
    for (i, g) in grids.iter().enumerate() {
        let g = g.clone();
        let t = encode_mask(&g, &cfg).map_err(|e| e.to_string())?;
        ensure(decode_mask(&t, &cfg).map_err(|e| e.to_string())? == g, format!("mask {i} not lossless"))?;
        // independent raw length: 16 rows of 16 digits and 15 separators
        let raw = 16 * 16 + 15;
        ensure(mask_body_len(&g, false) == raw, "raw body length")?;
        ensure(t.body().len() == mask_body_len(&g, true), "rle body length")?;
        ratios.push(t.body().len() as f64 / raw as f64);
    }
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let elapsed = start.elapsed();
    ensure(mean <= 0.6, format!("mean compressed/raw ratio {mean:.4} > 0.6"))?;
    within(elapsed, 5.0)?;
    Ok(format!("1000 blobs lossless; mean ratio {mean:.4} (saving {:.1}%); {:.2}s", 100.0 * (1.0 - mean), elapsed.as_secs_f64()))
}

// --- 3 ---------------------------------------------------------------------

type Poly = [(f64, f64); 4];

fn oracle_corners(o: &Obb) -> Poly {
    let [cx, cy, w, h, deg] = o.to_array();
    let (s, c) = deg.to_radians().sin_cos();
    let at = |dx: f64, dy: f64| (cx + dx * c - dy * s, cy + dx * s + dy * c);
    [at(-w / 2.0, -h / 2.0), at(w / 2.0, -h / 2.0), at(w / 2.0, h / 2.0), at(-w / 2.0, h / 2.0)]
}

/// x-extent of a convex polygon along the horizontal line at `y`.
fn span(p: &Poly, y: f64) -> Option<(f64, f64)> {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..4 {
        let (a, b) = (p[i], p[(i + 1) % 4]);
        if (a.1 <= y && b.1 > y) || (b.1 <= y && a.1 > y) {
            let x = a.0 + (y - a.1) / (b.1 - a.1) * (b.0 - a.0);
            lo = lo.min(x);
            hi = hi.max(x);
        }
    }
    (lo <= hi).then_some((lo, hi))
}

/// IoU by counting pixel centers on a `res`×`res` lattice over the union's
/// bounding square, one scanline per pixel row.
fn raster_iou(a: &Obb, b: &Obb, res: usize) -> f64 {
    let (pa, pb) = (oracle_corners(a), oracle_corners(b));
    let all = pa.iter().chain(pb.iter());
    let (x0, y0) = all.clone().fold((f64::INFINITY, f64::INFINITY), |m, p| (m.0.min(p.0), m.1.min(p.1)));
    let (x1, y1) = all.fold((f64::NEG_INFINITY, f64::NEG_INFINITY), |m, p| (m.0.max(p.0), m.1.max(p.1)));
    let px = (x1 - x0).max(y1 - y0) / res as f64;
    let count = |s: Option<(f64, f64)>| -> i64 {
        s.map_or(0, |(l, h)| {
            let lo = ((l - x0) / px - 0.5).ceil() as i64;
            let hi = ((h - x0) / px - 0.5).floor() as i64;
            (hi - lo + 1).max(0)
        })
    };
    let (mut ca, mut cb, mut ci) = (0i64, 0i64, 0i64);
    for row in 0..res {
        let y = y0 + (row as f64 + 0.5) * px;
        let (sa, sb) = (span(&pa, y), span(&pb, y));
        ca += count(sa);
        cb += count(sb);
        if let (Some(p), Some(q)) = (sa, sb) {
            ci += count(Some((p.0.max(q.0), p.1.min(q.1))));
        }
    }
    let union = ca + cb - ci;
    if union == 0 {
        0.0
    } else {
        ci as f64 / union as f64
    }
}

fn rotated_iou_oracle() -> Check {
    let start = Instant::now();
    let mut r = rng(3);
    let mut worst = 0.0f64;
    let mut overlapping = 0;
    for _ in 0..1000 {
        let a = Obb::new(
            r.gen_range(0.2..0.8),
            r.gen_range(0.2..0.8),
            r.gen_range(0.02..0.5),
            r.gen_range(0.02..0.5),
            r.gen_range(0.0..180.0),
        )
        .unwrap();
        let [cx, cy, w, h, t] = a.to_array();
        let b = if r.gen_bool(0.7) {
            Obb::new(
                cx + r.gen_range(-0.1..0.1),
                cy + r.gen_range(-0.1..0.1),
                w * r.gen_range(0.5..1.5),
                h * r.gen_range(0.5..1.5),
                t + r.gen_range(-45.0..45.0),
            )
        } else {
            Obb::new(r.gen(), r.gen(), r.gen_range(0.02..0.5), r.gen_range(0.02..0.5), r.gen_range(0.0..180.0))
        }
        .unwrap();
        let got = rotated_iou(&a, &b);
        if got > 0.0 {
            overlapping += 1;
        }
        worst = worst.max((got - raster_iou(&a, &b, 4096)).abs());
    }
    let mut axis_worst = 0.0f64;
    for _ in 0..1000 {
        let a = Hbb::spanning(r.gen(), r.gen(), r.gen(), r.gen()).unwrap();
        let b = Hbb::spanning(r.gen(), r.gen(), r.gen(), r.gen()).unwrap();
        axis_worst = axis_worst.max((rotated_iou(&a.to_obb(), &b.to_obb()) - hbb_iou(&a, &b)).abs());
    }
    let elapsed = start.elapsed();
    ensure(worst <= 2e-3, format!("max |rotated_iou - raster| = {worst:.3e}"))?;
    ensure(axis_worst <= 1e-12, format!("theta=0 mismatch {axis_worst:.3e}"))?;
    within(elapsed, 60.0)?;
    Ok(format!(
        "1000 pairs ({overlapping} overlapping) vs 4096² raster: max err {worst:.2e}; theta=0 max diff {axis_worst:.1e}; {:.2}s",
        elapsed.as_secs_f64()
    ))
}

// --- 4 ---------------------------------------------------------------------

fn consistency_score() -> Check {
    let mut r = rng(4);
    let mut worst = 0.0f64;
    for i in 0..200 {
        let n = r.gen_range(4..=32);
        let (r0, c0) = (r.gen_range(0..n), r.gen_range(0..n));
        let (r1, c1) = (r.gen_range(r0..n), r.gen_range(c0..n));
        let mask = GridMask::from_fn(n, |row, col| (r0..=r1).contains(&row) && (c0..=c1).contains(&col)).unwrap();
        let hbb = Hbb::new(c0 as f64 / n as f64, r0 as f64 / n as f64, (c1 + 1) as f64 / n as f64, (r1 + 1) as f64 / n as f64)
            .unwrap();
        let t = PredictionTriple { sample_id: format!("c{i}"), hbb: Some(hbb), obb: Some(hbb.to_obb()), mask: Some(mask) };
        worst = worst.max((bcs(&t).map_err(|e| e.to_string())?.score - 1.0).abs());
    }
    ensure(worst <= 1e-9, format!("consistent triple off by {worst:.3e}"))?;

    let disjoint = PredictionTriple {
        sample_id: "d".into(),
        hbb: Some(Hbb::new(0.0, 0.0, 0.2, 0.2).unwrap()),
        obb: Some(Obb::new(0.5, 0.5, 0.1, 0.1, 30.0).unwrap()),
        mask: Some(GridMask::from_fn(8, |row, col| row == 7 && col == 7).unwrap()),
    };
    let d = bcs(&disjoint).map_err(|e| e.to_string())?.score;
    ensure(d == 0.0, format!("disjoint triple scored {d}"))?;

    // hbb and obb agree exactly; the mask covers the left half of the box
    let half = PredictionTriple {
        sample_id: "h".into(),
        hbb: Some(Hbb::new(0.0, 0.0, 0.5, 0.5).unwrap()),
        obb: Some(Obb::new(0.25, 0.25, 0.5, 0.5, 0.0).unwrap()),
        mask: Some(GridMask::from_fn(4, |row, col| row < 2 && col < 1).unwrap()),
    };
    let c = bcs(&half).map_err(|e| e.to_string())?;
    ensure(
        (c.pairs[0] - 1.0).abs() <= 1e-12 && (c.pairs[1] - 0.5).abs() <= 1e-12 && (c.pairs[2] - 0.5).abs() <= 1e-12,
        format!("hand triple pairs {:?}", c.pairs),
    )?;
    ensure((c.score - 2.0 / 3.0).abs() <= 1e-9, format!("hand triple scored {}", c.score))?;
    Ok(format!("200 consistent max |s-1| {worst:.1e}; disjoint 0; (1, 0.5, 0.5) -> {:.12}", c.score))
}

// --- 5 ---------------------------------------------------------------------

fn ggl_annotation(r: &mut ChaCha8Rng, i: usize) -> Annotation {
    let g = downsample(&blob(r, 128), 32, Resample::MaxPool).unwrap();
    Annotation {
        image_id: format!("img{i}"),
        image_width: 1024,
        image_height: 1024,
        expression: format!("object number {i}"),
        hbb: None,
        obb: Some(Obb::new(r.gen_range(0.2..0.8), r.gen_range(0.2..0.8), r.gen_range(0.01..0.4), r.gen_range(0.01..0.4), r.gen_range(0.0..180.0)).unwrap()),
        mask: Some(AnnotatedMask::Grid(g)),
        category: None,
    }
}

/// Converts a decoded dense signal with the geometry functions directly.
fn convert(dense: Signal, sparse: SignalKind) -> Signal {
    match (dense, sparse) {
        (Signal::Obb(o), SignalKind::Hbb) => Signal::Hbb(obb_to_hbb(&o)),
        (Signal::Mask(g), SignalKind::Hbb) => Signal::Hbb(mask_to_hbb(&g).unwrap()),
        (Signal::Mask(g), SignalKind::Obb) => Signal::Obb(mask_to_obb(&g).unwrap()),
        (d, s) => panic!("unexpected pair {:?} -> {s:?}", d.kind()),
    }
}

fn ggl_determinism() -> Check {
    let mut r = rng(5);
    let opts = BuildOptions {
        codec: CodecConfig { mask_resolution: 32, ..CodecConfig::default() },
        allow_mask_to_obb: true,
        ..BuildOptions::default()
    };
    let pairs = [(SignalKind::Obb, SignalKind::Hbb), (SignalKind::Mask, SignalKind::Hbb), (SignalKind::Mask, SignalKind::Obb)];
    let mut matched = 0;
    for i in 0..1000 {
        let a = ggl_annotation(&mut r, i);
        let (dense, sparse) = pairs[i % 3];
        let pair = GglPair::new(dense, sparse).map_err(|e| e.to_string())?;
        let seed = derive_seed(77, i as u64);
        let render = || {
            build_ggl(&a, pair, &opts, seed)
                .map(|rec| serde_json::to_string(&InstructionLine::from_record(format!("g{i}"), &rec)).unwrap())
        };
        let (first, second) = (render().map_err(|e| e.to_string())?, render().map_err(|e| e.to_string())?);
        ensure(first == second, format!("sample {i} not byte-identical"))?;

        let rec = build_ggl(&a, pair, &opts, seed).unwrap();
        let roles: Vec<Role> = rec.conversations.iter().map(|t| t.role).collect();
        ensure(roles == [Role::Human, Role::Model, Role::Human, Role::Model], format!("sample {i} turn layout"))?;
        let turn1 = TextSignal::parse(&rec.conversations[1].text).map_err(|e| e.to_string())?;
        let expected = convert(decode(&turn1, &opts.codec).map_err(|e| e.to_string())?, sparse)
            .encode(&opts.codec)
            .map_err(|e| e.to_string())?;
        ensure(rec.conversations[3].text == expected.payload(), format!("sample {i}: turn 2 differs from conversion"))?;
        matched += 1;
    }
    Ok(format!("1000 samples byte-identical; turn 2 == geometry(turn 1) on {matched}/1000"))
}

// --- 6 ---------------------------------------------------------------------

fn disappearance() -> Check {
    let mut r = rng(6);
    let side = 512;
    let mut masks = Vec::with_capacity(1000);
    for i in 0..1000 {
        // log-uniform object size from a single pixel up to 32×32
        let (w, h) = match i {
            0 => (1, 1),
            1 => (32, 32),
            _ => {
                let area = 2f64.powf(r.gen_range(0.0..=10.0));
                let aspect = 2f64.powf(r.gen_range(-1.0..=1.0));
                let w = (area.sqrt() * aspect).round().clamp(1.0, 32.0) as usize;
                let h = (area / w as f64).round().clamp(1.0, 32.0) as usize;
                (w, h)
            }
        };
        let (x0, y0) = (r.gen_range(0..=side - w), r.gen_range(0..=side - h));
        masks.push(PixelMask::from_fn(side, side, |x, y| x >= x0 && x < x0 + w && y >= y0 && y < y0 + h).unwrap());
    }
    let sizes: Vec<usize> = masks.iter().map(PixelMask::count_ones).collect();
    ensure(sizes.iter().min() == Some(&1) && sizes.iter().max() == Some(&1024), "corpus must span 1..1024 px")?;

    let ns = [16, 24, 32, 100];
    let mut table = Vec::new();
    for n in ns {
        let mp = disappearance_rate(&masks, n, Resample::MaxPool).map_err(|e| e.to_string())?;
        let nn = disappearance_rate(&masks, n, Resample::Nearest).map_err(|e| e.to_string())?;
        table.push((n, mp, nn));
    }
    for w in table.windows(2) {
        ensure(w[1].1 <= w[0].1, format!("max-pool rate rises from n={} to n={}", w[0].0, w[1].0))?;
    }
    for &(n, mp, nn) in &table {
        ensure(nn >= mp, format!("nearest {nn} < max-pool {mp} at n={n}"))?;
    }
    let cells: Vec<String> = table.iter().map(|(n, mp, nn)| format!("n={n}: max-pool {mp:.3} nearest {nn:.3}")).collect();
    Ok(cells.join("; "))
}

// --- 7 ---------------------------------------------------------------------

fn ground_plane() -> Check {
    let mut r = rng(7);
    let (mut residual, mut reproj, mut pairs, mut misses) = (0.0f64, 0.0f64, 0, 0);
    while pairs < 10_000 {
        let w = r.gen_range(640.0..8000.0f64).round();
        let h = (w * r.gen_range(0.5..1.0f64)).round();
        let cam = CameraModel::new(
            r.gen_range(1e-6..1e-5),
            r.gen_range(0.004..0.05),
            w,
            h,
            r.gen_range(10.0f64..=90.0).to_radians(),
            r.gen_range(5.0..1000.0),
        )
        .map_err(|e| e.to_string())?;
        let (xp, yp) = (r.gen_range(0.0..w), r.gen_range(0.0..h));
        let Ok(p) = pixel_to_ground(xp, yp, &cam) else {
            // above the horizon
            misses += 1;
            continue;
        };
        // plane equation written out independently of the model
        let (s, c) = cam.pitch().sin_cos();
        residual = residual.max((-c * p.y - s * p.z + cam.agl()).abs());
        let (x, y) = camera_to_pixel(&p, &cam).map_err(|e| e.to_string())?;
        reproj = reproj.max((x - xp).abs().max((y - yp).abs()));
        pairs += 1;
    }
    ensure(residual < 1e-9, format!("plane residual {residual:.3e} m"))?;
    ensure(reproj < 1e-6, format!("reprojection error {reproj:.3e} px"))?;

    let mut nadir_err = 0.0f64;
    for k in 0..100 {
        let agl = 1.0 + 9.73 * k as f64;
        let cam = CameraModel::new(2.4e-6, 0.0088, 5472.0, 3648.0, FRAC_PI_2, agl).map_err(|e| e.to_string())?;
        let p = pixel_to_ground(2736.0, 1824.0, &cam).map_err(|e| e.to_string())?;
        let d = (p.x - 0.0).abs().max((p.y - 0.0).abs()).max((p.z - agl).abs());
        ensure(d <= 1e-12, format!("nadir point {p:?} for H={agl}"))?;
        nadir_err = nadir_err.max(d);
    }
    Ok(format!(
        "10000 pairs ({misses} above-horizon draws redrawn): max residual {residual:.2e} m, reprojection {reproj:.2e} px; nadir max error {nadir_err:.1e} m"
    ))
}

// --- 8 ---------------------------------------------------------------------

fn refiner_prompts() -> Check {
    let mut r = rng(8);
    let (mut fallbacks, mut points) = (0, 0);
    for i in 0..1000 {
        let n = r.gen_range(2..=32);
        let g = match i % 4 {
            0 => GridMask::empty(n).unwrap(),
            1 => {
                let d: f64 = r.gen();
                GridMask::from_fn(n, |_, _| r.gen_bool(d)).unwrap()
            }
            _ => downsample(&blob(&mut r, 96), n, Resample::MaxPool).unwrap(),
        };
        let b = Hbb::spanning(r.gen(), r.gen(), r.gen(), r.gen()).unwrap();
        let (w, h) = (r.gen_range(8..200usize), r.gen_range(8..200usize));
        let p = make_prompt(&g, &b, w, h, i as u64).map_err(|e| e.to_string())?;

        // oracle regions: nearest-neighbour cell lookup, pixel center in box
        let bx = [b.x1() * w as f64, b.y1() * h as f64, b.x2() * w as f64, b.y2() * h as f64];
        let mask_at = |x: usize, y: usize| g.get(y * n / h, x * n / w);
        let in_box = |x: usize, y: usize| {
            let (cx, cy) = (x as f64 + 0.5, y as f64 + 0.5);
            bx[0] <= cx && cx <= bx[2] && bx[1] <= cy && cy <= bx[3]
        };
        let (mut pos, mut neg) = (0, 0);
        for y in 0..h {
            for x in 0..w {
                if mask_at(x, y) {
                    if in_box(x, y) {
                        pos += 1;
                    } else {
                        neg += 1;
                    }
                }
            }
        }
        for &[x, y] in &p.positive_points {
            let (x, y) = (x as usize, y as usize);
            ensure(x < w && y < h && mask_at(x, y) && in_box(x, y), format!("case {i}: positive ({x},{y}) outside mask∩box"))?;
        }
        for &[x, y] in &p.negative_points {
            let (x, y) = (x as usize, y as usize);
            ensure(x < w && y < h && mask_at(x, y) && !in_box(x, y), format!("case {i}: negative ({x},{y}) outside mask∖box"))?;
        }
        ensure(p.positive_points.len() == pos.min(3) && p.negative_points.len() == neg.min(3), format!("case {i}: point counts"))?;
        let mut all = p.positive_points.clone();
        all.extend(&p.negative_points);
        all.sort_unstable();
        all.dedup();
        ensure(all.len() == p.positive_points.len() + p.negative_points.len(), format!("case {i}: repeated point"))?;
        ensure(p.fallback_box_only == (pos == 0 && neg == 0), format!("case {i}: fallback flag"))?;
        ensure(p.box_px == bx, format!("case {i}: box"))?;
        fallbacks += p.fallback_box_only as usize;
        points += all.len();
    }
    ensure(fallbacks > 0, "no fallback case exercised")?;
    Ok(format!("1000 pairs valid; {points} points; {fallbacks} box-only fallbacks"))
}

// --- 9 ---------------------------------------------------------------------

fn oracle_box_iou(a: [f64; 4], b: [f64; 4]) -> f64 {
    let iw = (a[2].min(b[2]) - a[0].max(b[0])).max(0.0);
    let ih = (a[3].min(b[3]) - a[1].max(b[1])).max(0.0);
    let inter = iw * ih;
    let union = (a[2] - a[0]) * (a[3] - a[1]) + (b[2] - b[0]) * (b[3] - b[1]) - inter;
    if union <= 0.0 {
        0.0
    } else {
        inter / union
    }
}

fn evaluation_totality() -> Check {
    let mut r = rng(9);
    let dir = tempfile::TempDir::new().map_err(|e| e.to_string())?;
    let (w, h) = (800.0f64, 600.0f64);
    let total = 1000;
    let mut gts = Vec::new();
    let mut preds = Vec::new();
    let mut truth = Vec::new();
    let mut clean: Vec<Option<[f64; 4]>> = Vec::new();
    for i in 0..total {
        let x1 = r.gen_range(0.0..w - 60.0f64).round();
        let y1 = r.gen_range(0.0..h - 60.0f64).round();
        let x2 = (x1 + r.gen_range(10.0..200.0f64)).min(w).round();
        let y2 = (y1 + r.gen_range(10.0..200.0f64)).min(h).round();
        gts.push(json!({"id": format!("s{i}"), "image": format!("i{i}.png"), "width": w as u32, "height": h as u32, "hbb": [x1, y1, x2, y2]}).to_string());
        truth.push([x1 / w, y1 / h, x2 / w, y2 / h]);

        // noisy prediction around the truth, as model text
        let mut j = |v: f64, s: f64| (v / s + r.gen_range(-0.06..0.06)).clamp(0.0, 1.0);
        let p = Hbb::spanning(j(x1, w), j(y1, h), j(x2, w), j(y2, h)).unwrap();
        let text = format!("The answer is {}.", encode_hbb(&p, &CodecConfig::default()).payload());
        let line = json!({"sample_id": format!("s{i}"), "raw_text": text}).to_string();
        if i % 10 == 3 {
            let corrupt = match (i / 10) % 4 {
                0 => line[..line.len() / 2].to_string(),
                1 => line.replace('"', "'"),
                2 => json!({"raw_text": text}).to_string(),
                _ => json!({"sample_id": format!("s{i}"), "raw_text": text.replace(']', "")}).to_string(),
            };
            preds.push(corrupt);
            clean.push(None);
        } else {
            // decoded independently: integer bins at cell centers
            let qs: Vec<f64> = text[text.find('[').unwrap() + 1..text.find(']').unwrap()]
                .split(',')
                .map(|q| (q.trim().parse::<f64>().unwrap() + 0.5) / 1000.0)
                .collect();
            preds.push(line);
            clean.push(Some([qs[0], qs[1], qs[2], qs[3]]));
        }
    }
    let gts_path = dir.path().join("gts.jsonl");
    let preds_path = dir.path().join("preds.jsonl");
    let report_path = dir.path().join("report.json");
    fs::write(&gts_path, gts.join("\n")).map_err(|e| e.to_string())?;
    fs::write(&preds_path, preds.join("\n")).map_err(|e| e.to_string())?;
    let out = Command::new(env!("CARGO_BIN_EXE_groundsig"))
        .args(["eval", "--mode", "hbb", "--preds"])
        .arg(&preds_path)
        .arg("--gts")
        .arg(&gts_path)
        .arg("-o")
        .arg(&report_path)
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.code() == Some(2), format!("exit code {:?}: {}", out.status.code(), String::from_utf8_lossy(&out.stderr).lines().last().unwrap_or("")))?;
    let report: Value = serde_json::from_str(&fs::read_to_string(&report_path).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;

    let ious: Vec<f64> = clean.iter().zip(&truth).map(|(p, t)| p.map_or(0.0, |p| oracle_box_iou(p, *t))).collect();
    let hits = ious.iter().filter(|&&v| v >= 0.5).count();
    let acc = hits as f64 / total as f64;
    let miou = ious.iter().sum::<f64>() / total as f64;
    let corrupt = clean.iter().filter(|c| c.is_none()).count();

    let s = &report["summary"];
    ensure(s["total"] == total, format!("total {}", s["total"]))?;
    ensure(s["hits"] == hits, format!("hits {} vs oracle {hits}", s["hits"]))?;
    let got_acc = s["accuracy"].as_f64().unwrap_or(f64::NAN);
    let got_miou = s["mean_iou"].as_f64().unwrap_or(f64::NAN);
    ensure((got_acc - acc).abs() <= 1e-12, format!("accuracy {got_acc} vs oracle {acc}"))?;
    ensure((got_miou - miou).abs() <= 1e-9, format!("mean IoU {got_miou} vs oracle {miou}"))?;
    let rows = report["rows"].as_array().ok_or("no rows")?;
    for (row, c) in rows.iter().zip(&clean) {
        if c.is_none() {
            ensure(row["iou"] == 0.0 && row["hit"] == false, format!("corrupt row scored: {row}"))?;
        }
    }
    let parsed_lines = fs::read_to_string(&preds_path).unwrap().lines().filter(|l| !is_header(l)).count();
    Ok(format!(
        "{parsed_lines} lines, {corrupt} corrupt; exit 2; acc {got_acc:.4} mIoU {got_miou:.4} == clean-subset oracle"
    ))
}

fn main() -> ExitCode {
    let checks: [(&str, fn() -> Check); 9] = [
        ("codec round trips", codec_round_trips),
        ("rle lossless and compressing", rle_compression),
        ("rotated IoU vs raster oracle", rotated_iou_oracle),
        ("box consistency score", consistency_score),
        ("ggl determinism", ggl_determinism),
        ("disappearance monotonicity", disappearance),
        ("ground-plane geometry", ground_plane),
        ("refiner prompt validity", refiner_prompts),
        ("evaluation totality", evaluation_totality),
    ];
    let mut failed = 0;
    for (i, (name, check)) in checks.iter().enumerate() {
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        match result {
            Ok(detail) => println!("PASS [{}] {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL [{}] {name}: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", checks.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
