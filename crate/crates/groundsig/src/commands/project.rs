use std::io::Read;

use anyhow::{Context, Result};
use groundsig_core::camera::project_box3;
use serde_json::json;

use crate::cli::ProjectArgs;
use crate::formats::{Box3Line, CameraJson, Provenance};
use crate::io::{open_input, open_output, read_records, write_jsonl, Diagnostic};

pub fn project(args: &ProjectArgs) -> Result<Vec<Diagnostic>> {
    let mut text = String::new();
    open_input(&args.camera)?.read_to_string(&mut text)?;
    let camera: CameraJson = serde_json::from_str(&text).context("camera file")?;
    let cam = camera.to_model()?;
    let mut diags = Vec::new();
    let mut out = Vec::new();
    for (no, line) in read_records(&args.input)? {
        let projected = serde_json::from_str::<Box3Line>(&line)
            .map_err(anyhow::Error::from)
            .and_then(|b| Ok((b.id.clone(), project_box3(&b.to_box(), &cam)?)));
        match projected {
            Ok((id, p)) => {
                let h = p.hbb;
                let px = [h.x1() * camera.w, h.y1() * camera.h, h.x2() * camera.w, h.y2() * camera.h];
                let corners: Vec<[f64; 2]> = p.pixels.iter().map(|&(x, y)| [x, y]).collect();
                out.push(json!({"id": id, "hbb": px, "hbb_norm": h.to_array(), "corners": corners}).to_string());
            }
            Err(e) => diags.push(Diagnostic::at(no, e.to_string())),
        }
    }
    let header = Provenance::new("project", serde_json::to_value(args)?).header_line();
    write_jsonl(&mut *open_output(&args.output)?, &header, &out)?;
    Ok(diags)
}
