//! Checkpoint format: `<stem>.manifest` (text key-value lines) plus
//! `<stem>.blob`, the little-endian f32 payloads of all tensors
//! concatenated in manifest order. Round trips are bit exact.

use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::tensor::{Dims, LayerSet, Tensor4};

pub fn manifest_path(stem: &Path) -> PathBuf {
    stem.with_extension("manifest")
}

pub fn blob_path(stem: &Path) -> PathBuf {
    stem.with_extension("blob")
}

pub fn save_checkpoint(stem: &Path, layers: &LayerSet) -> Result<()> {
    let mut manifest = String::new();
    let mut blob = Vec::new();
    for (name, t) in layers.iter() {
        if name.contains(char::is_whitespace) {
            return Err(Error::Checkpoint(format!("layer name {name:?} contains whitespace")));
        }
        let d = t.dims();
        manifest.push_str(&format!(
            "name={name} dims={}x{}x{}x{} offset={}\n",
            d.c_in,
            d.c_out,
            d.kh,
            d.kw,
            blob.len()
        ));
        for v in t.data() {
            blob.extend_from_slice(&v.to_le_bytes());
        }
    }
    std::fs::File::create(manifest_path(stem))?.write_all(manifest.as_bytes())?;
    std::fs::File::create(blob_path(stem))?.write_all(&blob)?;
    Ok(())
}

pub fn load_checkpoint(stem: &Path) -> Result<LayerSet> {
    let manifest = std::fs::read_to_string(manifest_path(stem))
        .map_err(|e| Error::Checkpoint(format!("cannot read manifest: {e}")))?;
    let mut blob = Vec::new();
    std::fs::File::open(blob_path(stem))
        .map_err(|e| Error::Checkpoint(format!("cannot read blob: {e}")))?
        .read_to_end(&mut blob)?;
    let mut layers = LayerSet::new();
    for (lineno, line) in manifest.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut name = None;
        let mut dims = None;
        let mut offset = None;
        for field in line.split_whitespace() {
            let (key, value) = field.split_once('=').ok_or_else(|| {
                Error::Checkpoint(format!("manifest line {}: bad field {field:?}", lineno + 1))
            })?;
            match key {
                "name" => name = Some(value.to_string()),
                "dims" => {
                    let parts: Vec<usize> = value
                        .split('x')
                        .map(|s| s.parse())
                        .collect::<std::result::Result<_, _>>()
                        .map_err(|e| Error::Checkpoint(format!("bad dims: {e}")))?;
                    if parts.len() != 4 {
                        return Err(Error::Checkpoint(format!("dims needs 4 axes, got {value}")));
                    }
                    dims = Some(Dims::new(parts[0], parts[1], parts[2], parts[3]));
                }
                "offset" => {
                    offset = Some(value.parse::<usize>().map_err(|e| {
                        Error::Checkpoint(format!("bad offset: {e}"))
                    })?)
                }
                other => return Err(Error::Checkpoint(format!("unknown manifest key {other}"))),
            }
        }
        let (name, dims, offset) = match (name, dims, offset) {
            (Some(n), Some(d), Some(o)) => (n, d, o),
            _ => {
                return Err(Error::Checkpoint(format!(
                    "manifest line {} missing name/dims/offset",
                    lineno + 1
                )))
            }
        };
        let nbytes = dims.len() * 4;
        let slice = blob.get(offset..offset + nbytes).ok_or_else(|| {
            Error::Checkpoint(format!("blob too short for layer {name}"))
        })?;
        let data: Vec<f32> = slice
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
            .collect();
        layers.push(name, Tensor4::from_vec(dims, data)?)?;
    }
    Ok(layers)
}
