//! Field dumps and signal CSV files.
//!
//! Field dump: one ASCII header line `trcomm-field v1 nx ny nt N`, then
//! `nt * N * ny * nx` little-endian `f64` values ordered frame, channel, row,
//! column. Signal CSV: header `antenna,channel,t,value`, `t` in seconds.

use std::io::{BufRead, BufReader, Read, Write};

use crate::error::{Error, Result};
use crate::field::{FieldMovie, MovieKind};
use crate::physics::CHANNELS;
use crate::propagator::Recorder;
use crate::scalar::Real;
use crate::signal::{Side, SignalChannel, SignalSet};

const MAGIC: &str = "trcomm-field v1";

/// Formats with 17 significant digits.
pub fn fmt17<T: Real>(x: T) -> String {
    format!("{:.16e}", x.as_f64())
}

pub fn field_header(nx: usize, ny: usize, nt: usize) -> String {
    format!("{MAGIC} {nx} {ny} {nt} {CHANNELS}\n")
}

pub fn write_field_dump<T: Real, W: Write>(w: &mut W, movie: &FieldMovie<T>) -> Result<()> {
    w.write_all(field_header(movie.nx(), movie.ny(), movie.nt()).as_bytes())?;
    write_frame(w, movie.as_slice())
}

fn write_frame<T: Real, W: Write>(w: &mut W, values: &[T]) -> Result<()> {
    let mut buf = Vec::with_capacity(values.len() * 8);
    for v in values {
        buf.extend_from_slice(&v.as_f64().to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_field_dump<R: Read>(r: R, kind: MovieKind) -> Result<FieldMovie<f64>> {
    let mut r = BufReader::new(r);
    let mut header = String::new();
    r.read_line(&mut header)?;
    let rest = header
        .trim_end()
        .strip_prefix(MAGIC)
        .ok_or_else(|| Error::Io(format!("not a field dump: {:?}", header.trim_end())))?;
    let dims: Vec<usize> = rest
        .split_whitespace()
        .map(|s| s.parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::Io(format!("bad field dump header: {e}")))?;
    let [nx, ny, nt, n] = dims[..] else {
        return Err(Error::Io("field dump header needs nx ny nt N".into()));
    };
    if n != CHANNELS {
        return Err(Error::Io(format!("field dump has {n} channels, expected {CHANNELS}")));
    }
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    let data: Vec<f64> = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    FieldMovie::from_vec(nx, ny, nt, kind, data)
}

/// Writes every `every`-th frame of a run into a field dump.
pub struct SnapshotWriter<W: Write> {
    out: W,
    every: usize,
}

impl<W: Write> SnapshotWriter<W> {
    /// Writes the header for the frames `0, every, 2 every, ...` below `nt`.
    pub fn new(mut out: W, nx: usize, ny: usize, nt: usize, every: usize) -> Result<Self> {
        if every == 0 {
            return Err(Error::Config("snapshot interval must be at least 1".into()));
        }
        let count = (nt - 1) / every + 1;
        out.write_all(field_header(nx, ny, count).as_bytes())?;
        Ok(Self { out, every })
    }

    pub fn finish(mut self) -> Result<W> {
        self.out.flush()?;
        Ok(self.out)
    }
}

impl<T: Real, W: Write> Recorder<T> for SnapshotWriter<W> {
    fn record(&mut self, n: usize, frame: &[T]) -> Result<()> {
        if n % self.every == 0 {
            write_frame(&mut self.out, frame)?;
        }
        Ok(())
    }
}

pub fn write_signals_csv<T: Real, W: Write>(w: &mut W, s: &SignalSet<T>) -> Result<()> {
    writeln!(w, "antenna,channel,t,value")?;
    for k in 0..s.antennas() {
        for c in 0..s.channel_count() {
            for (t, v) in s.series(k, c).iter().enumerate() {
                writeln!(w, "{k},{c},{},{}", fmt17(T::from_count(t) * s.dt()), fmt17(*v))?;
            }
        }
    }
    Ok(())
}

/// Reads a signal CSV back. Antenna and channel counts are taken from the
/// largest indices present; channel meanings must be supplied.
pub fn read_signals_csv<R: Read>(r: R, side: Side, channels: Vec<SignalChannel>) -> Result<SignalSet<f64>> {
    let mut rows = Vec::new();
    for (lineno, line) in BufReader::new(r).lines().enumerate() {
        let line = line?;
        if lineno == 0 {
            if line.trim() != "antenna,channel,t,value" {
                return Err(Error::Io(format!("unexpected signal CSV header {line:?}")));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        let bad = || Error::Io(format!("line {}: malformed row {line:?}", lineno + 1));
        if f.len() != 4 {
            return Err(bad());
        }
        let k: usize = f[0].parse().map_err(|_| bad())?;
        let c: usize = f[1].parse().map_err(|_| bad())?;
        let t: f64 = f[2].parse().map_err(|_| bad())?;
        let v: f64 = f[3].parse().map_err(|_| bad())?;
        rows.push((k, c, t, v));
    }
    let k = rows.iter().map(|r| r.0).max().map_or(0, |m| m + 1);
    let per = rows.iter().filter(|r| r.0 == 0 && r.1 == 0).count();
    if per < 2 {
        return Err(Error::Io("signal CSV needs at least two samples per series".into()));
    }
    let dt = rows[1].2 - rows[0].2;
    let mut s = SignalSet::zeros(side, k, channels, per, dt)?;
    for (i, (kk, c, _, v)) in rows.into_iter().enumerate() {
        if c >= s.channel_count() {
            return Err(Error::Io(format!("channel {c} out of range")));
        }
        s.set(kk, c, i % per, v);
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;

    #[test]
    fn field_dump_round_trip() {
        let g = Grid::new(5, 4, 1.0, 1.0, 0.1, 3).unwrap();
        let m = FieldMovie::from_fn(&g, MovieKind::State, |t, c, i, j| (t * 100 + c * 10 + i + j) as f64 * 0.1);
        let mut buf = Vec::new();
        write_field_dump(&mut buf, &m).unwrap();
        assert!(buf.starts_with(b"trcomm-field v1 5 4 3 3\n"));
        assert_eq!(read_field_dump(&buf[..], MovieKind::State).unwrap(), m);
    }

    #[test]
    fn signal_csv_round_trip() {
        let mut s = SignalSet::zeros_full(Side::Users, 2, 4, 0.1).unwrap();
        s.set(1, 2, 3, 1.0 / 3.0);
        s.set(0, 0, 0, -2.5);
        let mut buf = Vec::new();
        write_signals_csv(&mut buf, &s).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("antenna,channel,t,value\n0,0,0.0000000000000000e0,-2.5000000000000000e0\n"));
        let back = read_signals_csv(&buf[..], Side::Users, s.channels().to_vec()).unwrap();
        assert_eq!(back.as_slice(), s.as_slice());
    }

    #[test]
    fn snapshot_writer_counts_frames() {
        let mut w = SnapshotWriter::new(Vec::new(), 4, 4, 7, 3).unwrap();
        for n in 0..7 {
            Recorder::<f64>::record(&mut w, n, &[n as f64; 48]).unwrap();
        }
        let buf = w.finish().unwrap();
        let m = read_field_dump(&buf[..], MovieKind::State).unwrap();
        assert_eq!(m.nt(), 3);
        assert_eq!(m.get(2, 0, 0, 0), 6.0);
    }
}
