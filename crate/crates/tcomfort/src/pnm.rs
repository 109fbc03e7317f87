//! Binary portable any-map files.
//!
//! Thermal frames are 16-bit big-endian P5 with a required
//! `# radiometric=true|false` comment; visual frames are P6; gray frames
//! are 8-bit P5. Any of them may carry `# timestamp_ms=<n>`.

use std::path::Path;

use tcomfort_core::{GrayFrame, ThermalFrame, VisualFrame};

use crate::error::{read_file, write_file, CliError, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PnmError {
    pub offset: usize,
    pub message: String,
}

impl PnmError {
    fn new(offset: usize, message: impl Into<String>) -> Self {
        Self { offset, message: message.into() }
    }

    fn at(self, path: &Path) -> CliError {
        CliError::Parse { path: path.to_path_buf(), offset: self.offset, message: self.message }
    }
}

#[derive(Debug)]
struct Header<'a> {
    magic: &'a [u8],
    width: u32,
    height: u32,
    maxval: u32,
    comments: Vec<(usize, &'a str)>,
    data_offset: usize,
}

impl Header<'_> {
    fn comment(&self, key: &str) -> Option<(usize, &str)> {
        self.comments.iter().find_map(|&(at, c)| c.strip_prefix(key).and_then(|r| r.strip_prefix('=')).map(|v| (at, v.trim())))
    }

    fn timestamp(&self) -> std::result::Result<u64, PnmError> {
        match self.comment("timestamp_ms") {
            None => Ok(0),
            Some((at, v)) => v.parse().map_err(|_| PnmError::new(at, format!("bad timestamp_ms {v:?}"))),
        }
    }
}

fn parse_header(b: &[u8]) -> std::result::Result<Header<'_>, PnmError> {
    if b.len() < 2 || b[0] != b'P' {
        return Err(PnmError::new(0, "missing magic number"));
    }
    let magic = &b[..2];
    let mut pos = 2;
    let mut comments = Vec::new();
    let mut fields = [0u32; 3];
    for field in &mut fields {
        loop {
            match b.get(pos) {
                Some(c) if c.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    let start = pos;
                    let end = b[pos..].iter().position(|&c| c == b'\n').map_or(b.len(), |e| pos + e);
                    let text = std::str::from_utf8(&b[pos + 1..end]).map_err(|_| PnmError::new(start, "comment is not UTF-8"))?;
                    comments.push((start, text.trim()));
                    pos = end;
                }
                _ => break,
            }
        }
        let start = pos;
        while b.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        if pos == start {
            return Err(PnmError::new(start, if start >= b.len() { "truncated header" } else { "expected a decimal number" }));
        }
        *field = std::str::from_utf8(&b[start..pos]).ok().and_then(|s| s.parse().ok()).ok_or_else(|| PnmError::new(start, "number out of range"))?;
    }
    match b.get(pos) {
        Some(c) if c.is_ascii_whitespace() => {}
        _ => return Err(PnmError::new(pos, "expected whitespace after maxval")),
    }
    let [width, height, maxval] = fields;
    Ok(Header { magic, width, height, maxval, comments, data_offset: pos + 1 })
}

fn payload<'a>(b: &'a [u8], h: &Header, bytes_per_sample: usize, channels: usize) -> std::result::Result<&'a [u8], PnmError> {
    if h.width == 0 || h.height == 0 {
        return Err(PnmError::new(h.data_offset, "zero image dimension"));
    }
    let need = h.width as usize * h.height as usize * channels * bytes_per_sample;
    let have = b.len() - h.data_offset;
    if have < need {
        return Err(PnmError::new(b.len(), format!("truncated payload: expected {need} bytes, found {have}")));
    }
    if have > need {
        return Err(PnmError::new(h.data_offset + need, "trailing data after payload"));
    }
    Ok(&b[h.data_offset..])
}

pub fn decode_thermal(b: &[u8]) -> std::result::Result<ThermalFrame, PnmError> {
    let h = parse_header(b)?;
    if h.magic != b"P5" {
        return Err(PnmError::new(0, "expected magic P5"));
    }
    if h.maxval != 65535 {
        return Err(PnmError::new(h.data_offset - 1, "expected 16-bit maxval"));
    }
    let radiometric = match h.comment("radiometric") {
        Some((_, "true")) => true,
        Some((_, "false")) => false,
        Some((at, v)) => return Err(PnmError::new(at, format!("bad radiometric flag {v:?}"))),
        None => return Err(PnmError::new(h.data_offset, "missing radiometric comment")),
    };
    let ts = h.timestamp()?;
    let data = payload(b, &h, 2, 1)?;
    let raw = data.chunks_exact(2).map(|c| u16::from_be_bytes([c[0], c[1]])).collect();
    ThermalFrame::new(h.width, h.height, raw, ts, radiometric).map_err(|e| PnmError::new(0, e.to_string()))
}

pub fn encode_thermal(f: &ThermalFrame) -> Vec<u8> {
    let mut out = format!("P5\n# radiometric={}\n# timestamp_ms={}\n{} {}\n65535\n", f.radiometric(), f.timestamp_ms(), f.width(), f.height()).into_bytes();
    out.reserve(f.raw().len() * 2);
    for v in f.raw() {
        out.extend_from_slice(&v.to_be_bytes());
    }
    out
}

pub fn decode_visual(b: &[u8]) -> std::result::Result<VisualFrame, PnmError> {
    let h = parse_header(b)?;
    if h.magic != b"P6" {
        return Err(PnmError::new(0, "expected magic P6"));
    }
    if h.maxval != 255 {
        return Err(PnmError::new(h.data_offset - 1, "expected 8-bit maxval"));
    }
    let ts = h.timestamp()?;
    let data = payload(b, &h, 1, 3)?;
    VisualFrame::new(h.width, h.height, data.to_vec(), ts).map_err(|e| PnmError::new(0, e.to_string()))
}

pub fn encode_visual(f: &VisualFrame) -> Vec<u8> {
    let mut out = format!("P6\n# timestamp_ms={}\n{} {}\n255\n", f.timestamp_ms(), f.width(), f.height()).into_bytes();
    out.extend_from_slice(f.rgb());
    out
}

pub fn decode_gray(b: &[u8]) -> std::result::Result<GrayFrame, PnmError> {
    let h = parse_header(b)?;
    if h.magic != b"P5" {
        return Err(PnmError::new(0, "expected magic P5"));
    }
    if h.maxval != 255 {
        return Err(PnmError::new(h.data_offset - 1, "expected 8-bit maxval"));
    }
    let data = payload(b, &h, 1, 1)?;
    GrayFrame::new(h.width, h.height, data.to_vec()).map_err(|e| PnmError::new(0, e.to_string()))
}

pub fn encode_gray(f: &GrayFrame) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", f.width(), f.height()).into_bytes();
    out.extend_from_slice(f.gray());
    out
}

pub fn load_thermal_frame(path: &Path) -> Result<ThermalFrame> {
    decode_thermal(&read_file(path)?).map_err(|e| e.at(path))
}

pub fn save_thermal_frame(path: &Path, f: &ThermalFrame) -> Result<()> {
    write_file(path, &encode_thermal(f))
}

pub fn load_visual_frame(path: &Path) -> Result<VisualFrame> {
    decode_visual(&read_file(path)?).map_err(|e| e.at(path))
}

pub fn save_visual_frame(path: &Path, f: &VisualFrame) -> Result<()> {
    write_file(path, &encode_visual(f))
}

pub fn load_gray_frame(path: &Path) -> Result<GrayFrame> {
    decode_gray(&read_file(path)?).map_err(|e| e.at(path))
}

pub fn save_gray_frame(path: &Path, f: &GrayFrame) -> Result<()> {
    write_file(path, &encode_gray(f))
}
