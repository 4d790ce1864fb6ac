//! Directory ingestion: one subdirectory per class, PPM/PGM decoded natively,
//! JPEG behind the optional `jpeg` feature.

use std::fs;
use std::path::{Path, PathBuf};

use crate::data::LabeledImageSet;
use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Per-file decode failures; ingestion continues past them.
#[derive(Debug)]
pub struct IngestOutcome {
    pub set: LabeledImageSet,
    pub failures: Vec<(PathBuf, String)>,
}

fn is_space(b: u8) -> bool {
    matches!(b, b' ' | b'\t' | b'\r' | b'\n')
}

/// Reads the next header token, skipping whitespace and `#` comments.
fn next_token<'a>(bytes: &'a [u8], pos: &mut usize) -> Result<&'a [u8]> {
    loop {
        while *pos < bytes.len() && is_space(bytes[*pos]) {
            *pos += 1;
        }
        if *pos < bytes.len() && bytes[*pos] == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' {
                *pos += 1;
            }
            continue;
        }
        break;
    }
    let start = *pos;
    while *pos < bytes.len() && !is_space(bytes[*pos]) {
        *pos += 1;
    }
    if start == *pos {
        return Err(Error::Ingest("unexpected end of header".into()));
    }
    Ok(&bytes[start..*pos])
}

fn parse_int(bytes: &[u8], pos: &mut usize, what: &str) -> Result<usize> {
    let tok = next_token(bytes, pos)?;
    std::str::from_utf8(tok)
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .ok_or_else(|| Error::Ingest(format!("bad {what} in netpbm header")))
}

/// Decodes P2/P3 (ASCII) and P5/P6 (binary) netpbm images with maxval ≤ 255
/// into an [H,W,3] tensor of values in [0,255]; grayscale replicates across
/// the three channels.
pub fn decode_netpbm(bytes: &[u8]) -> Result<Tensor> {
    let mut pos = 0;
    let magic = next_token(bytes, &mut pos)?;
    let (channels, ascii) = match magic {
        b"P2" => (1, true),
        b"P3" => (3, true),
        b"P5" => (1, false),
        b"P6" => (3, false),
        _ => return Err(Error::Ingest("not a P2/P3/P5/P6 netpbm file".into())),
    };
    let w = parse_int(bytes, &mut pos, "width")?;
    let h = parse_int(bytes, &mut pos, "height")?;
    let maxval = parse_int(bytes, &mut pos, "maxval")?;
    if w == 0 || h == 0 {
        return Err(Error::Ingest("zero image dimension".into()));
    }
    if maxval == 0 || maxval > 255 {
        return Err(Error::Ingest(format!("unsupported maxval {maxval}")));
    }
    let scale = 255.0 / maxval as f32;
    let count = w * h * channels;
    let mut samples = Vec::with_capacity(count);
    if ascii {
        for _ in 0..count {
            let v = parse_int(bytes, &mut pos, "sample")?;
            if v > maxval {
                return Err(Error::Ingest(format!("sample {v} exceeds maxval {maxval}")));
            }
            samples.push(v as f32 * scale);
        }
    } else {
        // exactly one whitespace byte separates the header from the payload
        if pos >= bytes.len() || !is_space(bytes[pos]) {
            return Err(Error::Ingest("missing separator before binary payload".into()));
        }
        pos += 1;
        if bytes.len() < pos + count {
            return Err(Error::Ingest("truncated binary payload".into()));
        }
        samples.extend(bytes[pos..pos + count].iter().map(|&b| b as f32 * scale));
    }
    let data = if channels == 3 {
        samples
    } else {
        let mut rgb = Vec::with_capacity(samples.len() * 3);
        for v in samples {
            rgb.extend_from_slice(&[v, v, v]);
        }
        rgb
    };
    Tensor::new(&[h, w, 3], data)
}

#[cfg(feature = "jpeg")]
fn decode_jpeg(path: &Path) -> Result<Tensor> {
    let img = image::open(path)
        .map_err(|e| Error::Ingest(format!("jpeg decode failed: {e}")))?
        .to_rgb8();
    let (w, h) = (img.width() as usize, img.height() as usize);
    let data = img.into_raw().into_iter().map(|b| b as f32).collect();
    Tensor::new(&[h, w, 3], data)
}

fn decode_file(path: &Path) -> Result<Option<Tensor>> {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase())
        .unwrap_or_default();
    match ext.as_str() {
        "ppm" | "pgm" => {
            let bytes = fs::read(path)
                .map_err(|e| Error::Ingest(format!("cannot read {}: {e}", path.display())))?;
            decode_netpbm(&bytes).map(Some)
        }
        #[cfg(feature = "jpeg")]
        "jpg" | "jpeg" => decode_jpeg(path).map(Some),
        #[cfg(not(feature = "jpeg"))]
        "jpg" | "jpeg" => Err(Error::Ingest(
            "jpeg support is not enabled; rebuild with --features jpeg or convert to ppm".into(),
        )),
        _ => Ok(None),
    }
}

/// Walks `<root>/<class_name>/*` with class names sorted alphabetically and
/// labels assigned in that order. Undecodable files are collected, not fatal;
/// a class directory with no usable image at all is.
pub fn ingest_directory(root: &Path) -> Result<IngestOutcome> {
    let mut class_dirs: Vec<(String, PathBuf)> = Vec::new();
    let entries = fs::read_dir(root)
        .map_err(|e| Error::Ingest(format!("cannot read {}: {e}", root.display())))?;
    for entry in entries {
        let entry = entry.map_err(|e| Error::Ingest(e.to_string()))?;
        if entry.path().is_dir() {
            let name = entry.file_name().to_string_lossy().into_owned();
            class_dirs.push((name, entry.path()));
        }
    }
    if class_dirs.is_empty() {
        return Err(Error::Ingest(format!(
            "{} contains no class directories",
            root.display()
        )));
    }
    class_dirs.sort_by(|a, b| a.0.cmp(&b.0));

    let mut images = Vec::new();
    let mut labels = Vec::new();
    let mut failures = Vec::new();
    for (label, (class, dir)) in class_dirs.iter().enumerate() {
        let mut files: Vec<PathBuf> = fs::read_dir(dir)
            .map_err(|e| Error::Ingest(format!("cannot read {}: {e}", dir.display())))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_file())
            .collect();
        files.sort();
        let mut loaded = 0;
        for file in files {
            match decode_file(&file) {
                Ok(Some(img)) => {
                    images.push(img);
                    labels.push(label);
                    loaded += 1;
                }
                Ok(None) => {}
                Err(e) => failures.push((file, e.to_string())),
            }
        }
        if loaded == 0 {
            return Err(Error::Ingest(format!("class {class:?} has no readable images")));
        }
    }
    let class_names = class_dirs.into_iter().map(|(n, _)| n).collect();
    let synthetic = vec![false; images.len()];
    Ok(IngestOutcome {
        set: LabeledImageSet { images, labels, class_names, synthetic },
        failures,
    })
}
