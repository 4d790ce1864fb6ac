//! WeightArchive: a portable binary container for named float32 tensors.
//!
//! Layout, bit-exact:
//!   magic "WARC" | version 0x01 | u32 LE header length | UTF-8 header | payloads
//!
//! The header holds one line per entry, `<name> <d0>x<d1>x... f32\n`, and the
//! payloads are the entries' row-major little-endian f32 data concatenated in
//! header order. Entry order is preserved, so identical contents produce
//! identical bytes.

use std::fs;
use std::path::Path;

use indexmap::IndexMap;

use crate::error::{Error, Result};
use crate::tensor::Tensor;

const MAGIC: &[u8; 4] = b"WARC";
const VERSION: u8 = 0x01;

#[derive(Debug, Clone, Default)]
pub struct WeightArchive {
    entries: IndexMap<String, Tensor>,
}

impl WeightArchive {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, name: &str, tensor: Tensor) -> Result<()> {
        if name.is_empty() || name.chars().any(|c| c.is_whitespace()) {
            return Err(Error::Archive(format!(
                "entry name {name:?} must be non-empty and contain no whitespace"
            )));
        }
        if self.entries.insert(name.to_string(), tensor).is_some() {
            return Err(Error::Archive(format!("duplicate entry name {name:?}")));
        }
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&Tensor> {
        self.entries.get(name)
    }

    pub fn require(&self, name: &str) -> Result<&Tensor> {
        self.entries
            .get(name)
            .ok_or_else(|| Error::Archive(format!("missing entry {name:?}")))
    }

    pub fn contains(&self, name: &str) -> bool {
        self.entries.contains_key(name)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Tensor)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut header = String::new();
        for (name, tensor) in &self.entries {
            let dims: Vec<String> = tensor.shape().iter().map(|d| d.to_string()).collect();
            header.push_str(name);
            header.push(' ');
            header.push_str(&dims.join("x"));
            header.push_str(" f32\n");
        }
        let header = header.into_bytes();
        let payload_len: usize = self.entries.values().map(|t| t.numel() * 4).sum();
        let mut out = Vec::with_capacity(4 + 1 + 4 + header.len() + payload_len);
        out.extend_from_slice(MAGIC);
        out.push(VERSION);
        out.extend_from_slice(&(header.len() as u32).to_le_bytes());
        out.extend_from_slice(&header);
        for tensor in self.entries.values() {
            for v in tensor.data() {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 9 {
            return Err(Error::Archive("file too short for WARC header".into()));
        }
        if &bytes[..4] != MAGIC {
            return Err(Error::Archive("bad magic, not a WARC file".into()));
        }
        if bytes[4] != VERSION {
            return Err(Error::Archive(format!("unsupported version {}", bytes[4])));
        }
        let header_len = u32::from_le_bytes(bytes[5..9].try_into().unwrap()) as usize;
        let body = 9 + header_len;
        if bytes.len() < body {
            return Err(Error::Archive("truncated header".into()));
        }
        let header = std::str::from_utf8(&bytes[9..body])
            .map_err(|_| Error::Archive("header is not valid UTF-8".into()))?;

        let mut archive = WeightArchive::new();
        let mut offset = body;
        for line in header.lines() {
            let mut fields = line.split(' ');
            let (name, dims, dtype) = match (fields.next(), fields.next(), fields.next(), fields.next()) {
                (Some(n), Some(d), Some(t), None) => (n, d, t),
                _ => return Err(Error::Archive(format!("malformed header line {line:?}"))),
            };
            if dtype != "f32" {
                return Err(Error::Archive(format!("unsupported dtype {dtype:?}")));
            }
            let shape: Vec<usize> = dims
                .split('x')
                .map(|d| {
                    d.parse::<usize>()
                        .map_err(|_| Error::Archive(format!("bad dimension {d:?} in {line:?}")))
                })
                .collect::<Result<_>>()?;
            let numel: usize = shape.iter().product();
            let end = offset + numel * 4;
            if bytes.len() < end {
                return Err(Error::Archive(format!("truncated payload for entry {name:?}")));
            }
            let data: Vec<f32> = bytes[offset..end]
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
                .collect();
            offset = end;
            archive.insert(name, Tensor::new(&shape, data)?)?;
        }
        if offset != bytes.len() {
            return Err(Error::Archive(format!(
                "{} trailing bytes after last entry",
                bytes.len() - offset
            )));
        }
        Ok(archive)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path)
            .map_err(|e| Error::Archive(format!("cannot read {}: {e}", path.display())))?;
        Self::from_bytes(&bytes)
    }
}
