//! JSON-Lines stream files and the binary window file.
//!
//! Stream files start with a header object
//! `{"schema":"unifi-csi/1","epoch_us":..,"grids":{..},"label":..,"subject":..}`
//! followed by one packet object per line
//! `{"t":..,"band":"5g","ft":"data","bw":80,"sc":[..],"a":[..]}`.
//! Amplitudes are written with 9 significant digits.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{CsiError, Result};
use crate::types::{Band, CsiStream, FrameType, PacketRecord, SanitizedWindow, SubcarrierGrids};

pub const STREAM_SCHEMA: &str = "unifi-csi/1";

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct HeaderLine {
    schema: String,
    epoch_us: i64,
    grids: SubcarrierGrids,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    label: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    subject: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PacketLine {
    t: i64,
    band: Band,
    ft: FrameType,
    bw: u16,
    sc: Vec<i32>,
    a: Vec<f64>,
}

/// Rounds to 9 significant decimal digits.
pub fn round_sig9(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.8e}").parse().unwrap_or(x)
}

pub fn load_stream(path: impl AsRef<Path>) -> Result<CsiStream> {
    read_stream(BufReader::new(File::open(path)?))
}

pub fn read_stream<R: BufRead>(reader: R) -> Result<CsiStream> {
    let mut header: Option<HeaderLine> = None;
    let mut rows: Vec<(usize, PacketRecord)> = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let schema_err = |reason: String| CsiError::Schema {
            line: line_no,
            reason,
        };
        match &header {
            None => {
                let h: HeaderLine =
                    serde_json::from_str(&line).map_err(|e| schema_err(e.to_string()))?;
                if h.schema != STREAM_SCHEMA {
                    return Err(schema_err(format!("unsupported schema {:?}", h.schema)));
                }
                header = Some(h);
            }
            Some(h) => {
                let row: PacketLine =
                    serde_json::from_str(&line).map_err(|e| schema_err(e.to_string()))?;
                let packet = PacketRecord {
                    t_us: row.t,
                    band: row.band,
                    frame_type: row.ft,
                    bw_mhz: row.bw,
                    sc_idx: row.sc,
                    amp: row.a,
                };
                packet.validate(&h.grids).map_err(schema_err)?;
                rows.push((line_no, packet));
            }
        }
    }
    let Some(header) = header else {
        return Ok(CsiStream::new(0, SubcarrierGrids::new()));
    };
    rows.sort_by_key(|(_, p)| p.order_key());
    if let Some(w) = rows.windows(2).find(|w| w[0].1.order_key() == w[1].1.order_key()) {
        let (a, b) = (w[0].0.min(w[1].0), w[0].0.max(w[1].0));
        return Err(CsiError::Order {
            line: b,
            reason: format!("duplicates line {a}: same timestamp and PHY metadata"),
        });
    }
    Ok(CsiStream {
        epoch_us: header.epoch_us,
        grids: header.grids,
        packets: rows.into_iter().map(|(_, p)| p).collect(),
        label: header.label,
        subject_id: header.subject,
    })
}

pub fn save_stream(stream: &CsiStream, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_stream(stream, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn write_stream<W: Write>(stream: &CsiStream, mut w: W) -> Result<()> {
    let header = HeaderLine {
        schema: STREAM_SCHEMA.to_string(),
        epoch_us: stream.epoch_us,
        grids: stream.grids.clone(),
        label: stream.label,
        subject: stream.subject_id.clone(),
    };
    serde_json::to_writer(&mut w, &header).map_err(std::io::Error::from)?;
    w.write_all(b"\n")?;
    for p in &stream.packets {
        let row = PacketLine {
            t: p.t_us,
            band: p.band,
            ft: p.frame_type,
            bw: p.bw_mhz,
            sc: p.sc_idx.clone(),
            a: p.amp.iter().copied().map(round_sig9).collect(),
        };
        serde_json::to_writer(&mut w, &row).map_err(std::io::Error::from)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

const WINDOW_MAGIC: &[u8; 4] = b"UNFW";
const WINDOW_VERSION: u32 = 1;

/// Writes windows as little-endian binary: magic `UNFW`, version `u32`,
/// count `u32`, then per window `t0_us i64, win_us i64, label u32,
/// grid_size u32, rows u32, ts f64[rows], values f64[rows*grid],
/// masks u8[rows*grid]`.
pub fn write_windows<W: Write>(windows: &[SanitizedWindow], mut w: W) -> Result<()> {
    w.write_all(WINDOW_MAGIC)?;
    w.write_all(&WINDOW_VERSION.to_le_bytes())?;
    w.write_all(&(windows.len() as u32).to_le_bytes())?;
    for win in windows {
        w.write_all(&win.t0_us.to_le_bytes())?;
        w.write_all(&win.win_us.to_le_bytes())?;
        w.write_all(&win.label.to_le_bytes())?;
        w.write_all(&(win.grid_size as u32).to_le_bytes())?;
        w.write_all(&(win.rows() as u32).to_le_bytes())?;
        for t in &win.ts {
            w.write_all(&t.to_le_bytes())?;
        }
        for v in &win.values {
            w.write_all(&v.to_le_bytes())?;
        }
        let masks: Vec<u8> = win.masks.iter().map(|&b| b as u8).collect();
        w.write_all(&masks)?;
    }
    Ok(())
}

pub fn save_windows(windows: &[SanitizedWindow], path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_windows(windows, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn read_windows<R: Read>(mut r: R) -> Result<Vec<SanitizedWindow>> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != WINDOW_MAGIC {
        return Err(CsiError::Window("bad magic in window file".into()));
    }
    let version = read_u32(&mut r)?;
    if version != WINDOW_VERSION {
        return Err(CsiError::Window(format!("unsupported window file version {version}")));
    }
    let count = read_u32(&mut r)? as usize;
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let t0_us = read_i64(&mut r)?;
        let win_us = read_i64(&mut r)?;
        let label = read_u32(&mut r)?;
        let grid_size = read_u32(&mut r)? as usize;
        let rows = read_u32(&mut r)? as usize;
        let ts = (0..rows).map(|_| read_f64(&mut r)).collect::<Result<Vec<_>>>()?;
        let values = (0..rows * grid_size)
            .map(|_| read_f64(&mut r))
            .collect::<Result<Vec<_>>>()?;
        let mut masks = vec![0u8; rows * grid_size];
        r.read_exact(&mut masks)?;
        let masks = masks.into_iter().map(|b| b != 0).collect();
        out.push(SanitizedWindow::new(
            t0_us, win_us, grid_size, values, masks, ts, label,
        )?);
    }
    Ok(out)
}

pub fn load_windows(path: impl AsRef<Path>) -> Result<Vec<SanitizedWindow>> {
    read_windows(BufReader::new(File::open(path)?))
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_i64<R: Read>(r: &mut R) -> Result<i64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(i64::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = r#"{"schema":"unifi-csi/1","epoch_us":0,"grids":{"5g":{"bw20":[-1,1],"bw80":[-2,-1,1,2]}},"label":1}"#;

    fn parse(body: &str) -> Result<CsiStream> {
        read_stream(body.as_bytes())
    }

    #[test]
    fn three_valid_rows_are_sorted() {
        let text = format!(
            "{HEADER}\n{}\n{}\n{}\n",
            r#"{"t":30,"band":"5g","ft":"data","bw":80,"sc":[-2,-1,1,2],"a":[1,2,3,4]}"#,
            r#"{"t":10,"band":"5g","ft":"mgmt","bw":20,"sc":[-1,1],"a":[1,2]}"#,
            r#"{"t":20,"band":"5g","ft":"ctrl","bw":20,"sc":[-1,1],"a":[0.5,0.25]}"#,
        );
        let s = parse(&text).unwrap();
        assert_eq!(s.timestamps(), vec![10, 20, 30]);
        assert_eq!(s.label, Some(1));
        assert!(s.validate().is_ok());
    }

    #[test]
    fn length_mismatch_reports_line() {
        let text = format!(
            "{HEADER}\n{}\n{}\n",
            r#"{"t":10,"band":"5g","ft":"mgmt","bw":20,"sc":[-1,1],"a":[1,2]}"#,
            r#"{"t":20,"band":"5g","ft":"mgmt","bw":20,"sc":[-1,1],"a":[1]}"#,
        );
        match parse(&text) {
            Err(CsiError::Schema { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected schema error, got {other:?}"),
        }
    }

    #[test]
    fn off_grid_and_bad_band_rejected() {
        let off = format!(
            "{HEADER}\n{}\n",
            r#"{"t":10,"band":"5g","ft":"mgmt","bw":20,"sc":[-2,1],"a":[1,2]}"#
        );
        assert!(matches!(parse(&off), Err(CsiError::Schema { line: 2, .. })));
        let bad_band = format!(
            "{HEADER}\n{}\n",
            r#"{"t":10,"band":"6g","ft":"mgmt","bw":20,"sc":[-1,1],"a":[1,2]}"#
        );
        assert!(matches!(parse(&bad_band), Err(CsiError::Schema { line: 2, .. })));
        assert!(matches!(
            parse(r#"{"schema":"other/9","epoch_us":0,"grids":{}}"#),
            Err(CsiError::Schema { line: 1, .. })
        ));
    }

    #[test]
    fn duplicate_rows_are_an_order_error() {
        let row = r#"{"t":10,"band":"5g","ft":"mgmt","bw":20,"sc":[-1,1],"a":[1,2]}"#;
        let text = format!("{HEADER}\n{row}\n{row}\n");
        assert!(matches!(parse(&text), Err(CsiError::Order { line: 3, .. })));
    }

    #[test]
    fn empty_file_is_empty_stream() {
        let s = parse("").unwrap();
        assert!(s.is_empty());
        assert_eq!(s.duration_us(), 0);
    }

    #[test]
    fn floats_written_with_nine_digits() {
        let text = format!(
            "{HEADER}\n{}\n",
            r#"{"t":10,"band":"5g","ft":"mgmt","bw":20,"sc":[-1,1],"a":[0.1234567891234,2]}"#
        );
        let s = parse(&text).unwrap();
        let mut out = Vec::new();
        write_stream(&s, &mut out).unwrap();
        let out = String::from_utf8(out).unwrap();
        assert!(out.contains("[0.123456789,2.0]"), "{out}");
    }

    #[test]
    fn window_file_round_trip() {
        let w = SanitizedWindow::new(
            5,
            100,
            3,
            vec![0.5, 0.0, 0.25, 0.0, 1.0, 0.0],
            vec![true, false, true, false, true, false],
            vec![0.0, 0.75],
            2,
        )
        .unwrap();
        let mut buf = Vec::new();
        write_windows(std::slice::from_ref(&w), &mut buf).unwrap();
        let back = read_windows(buf.as_slice()).unwrap();
        assert_eq!(back, vec![w]);
        assert!(read_windows(&b"XXXX"[..]).is_err());
    }
}
