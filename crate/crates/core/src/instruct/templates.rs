//! Query templates. Placeholders: `{prompt}` is the referring expression,
//! `{dense}` the name of the requested signal, `{signal}` the tagged sparse
//! signal given as a hint.

use alloc::string::String;

use crate::textcodec::SignalKind;

pub const REC: [&str; 5] = [
    "[refer] give me the bounding box of <ref>{prompt}</ref>",
    "[refer] output the bounding box of the <ref>{prompt}</ref> in the image.",
    "[refer] from this image, provide the bounding box for <ref>{prompt}</ref>.",
    "[refer] please provide the bounding box coordinate of the region this sentence describes: <ref>{prompt}</ref>",
    "[refer] can you locate and provide the bounding box for <ref>{prompt}</ref> in the given image?",
];

pub const REC_OBB: [&str; 5] = [
    "[refer] give me the oriented bounding box of <ref>{prompt}</ref>",
    "[refer] output the oriented bounding box of the <ref>{prompt}</ref> in the image.",
    "[refer] from this image, provide the oriented bounding box for <ref>{prompt}</ref>.",
    "[refer] please provide the oriented bounding box coordinate of the region this sentence describes: <ref>{prompt}</ref>",
    "[refer] can you locate and provide the oriented bounding box for <ref>{prompt}</ref> in the given image?",
];

pub const RES: [&str; 5] = [
    "[refer] give me the segmentation mask of <ref>{prompt}</ref>",
    "[refer] output the segmentation mask of the <ref>{prompt}</ref> in the image.",
    "[refer] from this image, provide the segmentation mask for <ref>{prompt}</ref>.",
    "[refer] please provide the segmentation mask of the region this sentence describes: <ref>{prompt}</ref>.",
    "[refer] can you segment the <ref>{prompt}</ref> in the given image?",
];

pub const DET: [&str; 5] = [
    "[refer] give me the bounding box of all <ref>{prompt}</ref>",
    "[refer] output the bounding box of all <ref>{prompt}</ref> in the image.",
    "[refer] from this image, provide the bounding box for all <ref>{prompt}</ref>.",
    "[refer] please provide the bounding box coordinate of all objects in this sentence describes: <ref>{prompt}</ref>",
    "[refer] can you locate and provide the bounding box for all <ref>{prompt}</ref> in the given image?",
];

pub const PAL: [&str; 5] = [
    "[refer] give me the {dense} of <ref>{prompt}</ref>{signal}",
    "[refer] output the {dense} of the <ref>{prompt}</ref>{signal} in the image.",
    "[refer] from this image, provide the {dense} for <ref>{prompt}</ref>{signal}.",
    "[refer] please provide the {dense} coordinate of this region: <ref>{prompt}</ref>{signal}",
    "[refer] can you locate and provide the {dense} for <ref>{prompt}</ref>{signal} in the given image?",
];

pub const GGL_FIRST: [&str; 5] = [
    "[refer] give me the {dense} of <ref>{prompt}</ref>",
    "[refer] output the {dense} of the <ref>{prompt}</ref> in the image.",
    "[refer] from this image, provide the {dense} for <ref>{prompt}</ref>.",
    "[refer] please provide the {dense} coordinate of the region this sentence describes: <ref>{prompt}</ref>",
    "[refer] can you locate and provide the {dense} for <ref>{prompt}</ref> in the given image?",
];

pub const GGL_SECOND: &str = "The {sparse} corresponding to this {dense} is";

pub fn signal_noun(kind: SignalKind) -> &'static str {
    match kind {
        SignalKind::Hbb => "bounding box",
        SignalKind::Obb => "oriented bounding box",
        SignalKind::Mask => "segmentation mask",
    }
}

/// Single-pass placeholder substitution; substituted text is never rescanned.
pub fn fill(template: &str, values: &[(&str, &str)]) -> String {
    let mut out = String::with_capacity(template.len() + 64);
    let mut rest = template;
    while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let after = &rest[open + 1..];
        let hit = after.find('}').and_then(|close| {
            let key = &after[..close];
            values.iter().find(|(k, _)| *k == key).map(|(_, v)| (close, *v))
        });
        match hit {
            Some((close, value)) => {
                out.push_str(value);
                rest = &after[close + 1..];
            }
            None => {
                out.push('{');
                rest = after;
            }
        }
    }
    out.push_str(rest);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fill_does_not_rescan() {
        let s = fill(REC[0], &[("prompt", "the {prompt} ship")]);
        assert_eq!(s, "[refer] give me the bounding box of <ref>the {prompt} ship</ref>");
    }

    #[test]
    fn every_template_mentions_the_expression() {
        for set in [REC, REC_OBB, RES, DET, PAL, GGL_FIRST] {
            for t in set {
                assert!(t.starts_with("[refer] ") && t.contains("<ref>{prompt}</ref>"));
            }
        }
        for t in PAL {
            assert!(t.contains("</ref>{signal}"));
        }
    }
}
