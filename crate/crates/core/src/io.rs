//! File formats: portable graymaps, measurement files and coefficient
//! dumps.
//!
//! All binary payloads are little-endian f64, preceded by a single ASCII
//! header line, so the files are self-describing and byte-stable across
//! platforms.

use crate::error::{Error, Result};
use crate::grid::CoeffGrid;
use crate::simulate::{Manifest, MeasurementSet};
use crate::wavelet::WaveletVec;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

// --- portable graymap -------------------------------------------------------

/// Reads an 8- or 16-bit grayscale PGM (P5 binary or P2 ASCII) into a
/// grid of intensities normalized to [0, 1].
pub fn read_pgm(path: &Path) -> Result<CoeffGrid> {
    let file = std::fs::File::open(path).map_err(|e| Error::Io(format!("{path:?}: {e}")))?;
    let mut reader = BufReader::new(file);
    let mut bytes = Vec::new();
    reader.read_to_end(&mut bytes)?;
    parse_pgm(&bytes).map_err(|e| Error::Format(format!("{path:?}: {e}")))
}

fn parse_pgm(bytes: &[u8]) -> std::result::Result<CoeffGrid, String> {
    let mut pos = 0usize;
    let token = |pos: &mut usize| -> std::result::Result<String, String> {
        // Skip whitespace and '#' comments between tokens.
        loop {
            while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
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
        while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if start == *pos {
            return Err("unexpected end of header".into());
        }
        Ok(String::from_utf8_lossy(&bytes[start..*pos]).into_owned())
    };

    let magic = token(&mut pos)?;
    if magic != "P5" && magic != "P2" {
        return Err(format!("not a graymap (magic {magic})"));
    }
    let cols: usize = token(&mut pos)?
        .parse()
        .map_err(|e| format!("width: {e}"))?;
    let rows: usize = token(&mut pos)?
        .parse()
        .map_err(|e| format!("height: {e}"))?;
    let maxval: u32 = token(&mut pos)?
        .parse()
        .map_err(|e| format!("maxval: {e}"))?;
    if maxval == 0 || maxval > 65535 {
        return Err(format!("maxval {maxval} out of range"));
    }
    let scale = 1.0 / maxval as f64;
    let mut data = Vec::with_capacity(rows * cols);
    if magic == "P2" {
        for _ in 0..rows * cols {
            let v: u32 = token(&mut pos)?
                .parse()
                .map_err(|e| format!("sample: {e}"))?;
            data.push(v as f64 * scale);
        }
    } else {
        pos += 1; // single whitespace after maxval
        let wide = maxval > 255;
        let need = rows * cols * if wide { 2 } else { 1 };
        if bytes.len() < pos + need {
            return Err("truncated pixel data".into());
        }
        let raw = &bytes[pos..pos + need];
        if wide {
            for px in raw.chunks_exact(2) {
                // 16-bit PGM samples are big-endian.
                data.push(u16::from_be_bytes([px[0], px[1]]) as f64 * scale);
            }
        } else {
            data.extend(raw.iter().map(|&b| b as f64 * scale));
        }
    }
    CoeffGrid::from_vec(rows, cols, data).map_err(|e| e.to_string())
}

/// Writes a grid of [0, 1] intensities as a binary PGM, clamping and
/// rounding to the requested bit depth (8 or 16).
pub fn write_pgm(path: &Path, grid: &CoeffGrid, bits: u8) -> Result<()> {
    let maxval: u32 = match bits {
        8 => 255,
        16 => 65535,
        _ => return Err(Error::Format(format!("unsupported pgm depth {bits}"))),
    };
    let file = std::fs::File::create(path).map_err(|e| Error::Io(format!("{path:?}: {e}")))?;
    let mut w = BufWriter::new(file);
    write!(w, "P5\n{} {}\n{}\n", grid.cols(), grid.rows(), maxval)?;
    for &v in grid.data() {
        let q = (v.clamp(0.0, 1.0) * maxval as f64).round() as u32;
        if maxval > 255 {
            w.write_all(&(q as u16).to_be_bytes())?;
        } else {
            w.write_all(&[q as u8])?;
        }
    }
    w.flush()?;
    Ok(())
}

// --- measurement file -------------------------------------------------------

/// Header: `m= n= k= l= seed= p= noise_sigma=` on one line; payload: the
/// M readings as little-endian f64.
pub fn write_measurements(path: &Path, ms: &MeasurementSet) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::Io(format!("{path:?}: {e}")))?;
    let mut w = BufWriter::new(file);
    let mf = &ms.manifest;
    writeln!(
        w,
        "m={} n={} k={} l={} seed={} p={} noise_sigma={}",
        mf.m, mf.n, mf.mask_rows, mf.mask_cols, mf.seed, mf.order, mf.noise_sigma
    )?;
    for v in &ms.y {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_measurements(path: &Path) -> Result<MeasurementSet> {
    let file = std::fs::File::open(path).map_err(|e| Error::Io(format!("{path:?}: {e}")))?;
    let mut reader = BufReader::new(file);
    let mut header = String::new();
    reader.read_line(&mut header)?;
    let fields = parse_kv_line(&header)?;
    let get = |k: &str| -> Result<&str> {
        fields
            .iter()
            .find(|(key, _)| key == k)
            .map(|(_, v)| v.as_str())
            .ok_or_else(|| Error::Format(format!("measurement header missing `{k}`")))
    };
    let manifest = Manifest {
        m: parse_num(get("m")?)?,
        n: parse_num(get("n")?)?,
        mask_rows: parse_num(get("k")?)?,
        mask_cols: parse_num(get("l")?)?,
        seed: parse_num(get("seed")?)?,
        order: parse_num(get("p")?)?,
        noise_sigma: get("noise_sigma")?
            .parse::<f64>()
            .map_err(|e| Error::Format(format!("noise_sigma: {e}")))?,
    };
    let y = read_f64_payload(&mut reader, manifest.m)?;
    Ok(MeasurementSet { y, manifest })
}

// --- coefficient dumps ------------------------------------------------------

/// Header: `levels=I rows=R cols=C bank=NAME`; payload little-endian f64.
pub fn write_wavelet_vec(path: &Path, x: &WaveletVec, bank_name: &str) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::Io(format!("{path:?}: {e}")))?;
    let mut w = BufWriter::new(file);
    writeln!(
        w,
        "levels={} rows={} cols={} bank={}",
        x.levels(),
        x.rows(),
        x.cols(),
        bank_name
    )?;
    for v in x.data() {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_wavelet_vec(path: &Path) -> Result<(WaveletVec, String)> {
    let file = std::fs::File::open(path).map_err(|e| Error::Io(format!("{path:?}: {e}")))?;
    let mut reader = BufReader::new(file);
    let mut header = String::new();
    reader.read_line(&mut header)?;
    let fields = parse_kv_line(&header)?;
    let get = |k: &str| -> Result<&str> {
        fields
            .iter()
            .find(|(key, _)| key == k)
            .map(|(_, v)| v.as_str())
            .ok_or_else(|| Error::Format(format!("coefficient header missing `{k}`")))
    };
    let levels: usize = parse_num(get("levels")?)?;
    let rows: usize = parse_num(get("rows")?)?;
    let cols: usize = parse_num(get("cols")?)?;
    let bank = get("bank")?.to_string();
    let data = read_f64_payload(&mut reader, rows * cols)?;
    Ok((WaveletVec::from_parts(rows, cols, levels, data)?, bank))
}

/// Header: `rows=R cols=C`; payload little-endian f64.
pub fn write_grid(path: &Path, grid: &CoeffGrid) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::Io(format!("{path:?}: {e}")))?;
    let mut w = BufWriter::new(file);
    writeln!(w, "rows={} cols={}", grid.rows(), grid.cols())?;
    for v in grid.data() {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_grid(path: &Path) -> Result<CoeffGrid> {
    let file = std::fs::File::open(path).map_err(|e| Error::Io(format!("{path:?}: {e}")))?;
    let mut reader = BufReader::new(file);
    let mut header = String::new();
    reader.read_line(&mut header)?;
    let fields = parse_kv_line(&header)?;
    let get = |k: &str| -> Result<&str> {
        fields
            .iter()
            .find(|(key, _)| key == k)
            .map(|(_, v)| v.as_str())
            .ok_or_else(|| Error::Format(format!("grid header missing `{k}`")))
    };
    let rows: usize = parse_num(get("rows")?)?;
    let cols: usize = parse_num(get("cols")?)?;
    let data = read_f64_payload(&mut reader, rows * cols)?;
    CoeffGrid::from_vec(rows, cols, data)
}

// --- helpers ----------------------------------------------------------------

/// Tap formatting for filter dumps: plenty of significant digits so the
/// printed value round-trips to the exact f64.
pub fn format_tap(v: f64) -> String {
    format!("{v:.17e}")
}

fn parse_kv_line(line: &str) -> Result<Vec<(String, String)>> {
    line.split_whitespace()
        .map(|tok| {
            tok.split_once('=')
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .ok_or_else(|| Error::Format(format!("malformed header token `{tok}`")))
        })
        .collect()
}

fn parse_num<T: std::str::FromStr>(s: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    s.parse()
        .map_err(|e| Error::Format(format!("bad number `{s}`: {e}")))
}

fn read_f64_payload(reader: &mut impl Read, count: usize) -> Result<Vec<f64>> {
    let mut bytes = vec![0u8; count * 8];
    reader
        .read_exact(&mut bytes)
        .map_err(|e| Error::Format(format!("payload truncated: {e}")))?;
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect())
}
