//! Text formats for points and index snapshots.
//!
//! Points: one point per line, `vx,x0,vy,y0,vz,z0`. Blank lines and lines
//! starting with `#` are ignored.
//!
//! Snapshot, whitespace separated, one record per line:
//!
//! ```text
//! hexbucket-index 1
//! lower <6 reals>
//! upper <6 reals>
//! divisions <6 integers>
//! subdivisions <s>
//! buckets <B>
//! bucket <6 cell indices>          (B times, each followed by)
//! hist <s counts>                  (6 lines, axes in hex order)
//! ```
//!
//! Trends and normalization are refit from the histograms on load, which
//! reproduces them bit for bit. Buckets are written in index order so query
//! sums run in the same order after a reload.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::index::{AxisHistogram, CellId, GridConfig, MovingIndex, SkewAwareBucket};
use crate::model::{Hex6, HEX_AXES};

const MAGIC: &str = "hexbucket-index";
const VERSION: u32 = 1;

pub fn parse_points(text: &str) -> Result<Vec<Hex6>> {
    let mut out = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        out.push(parse_hex(line).map_err(|e| Error::Parse(format!("line {}: {e}", no + 1)))?);
    }
    Ok(out)
}

/// Parses six comma-separated reals.
pub fn parse_hex(s: &str) -> std::result::Result<Hex6, String> {
    let vals: Vec<f64> = s
        .split(',')
        .map(|f| f.trim().parse::<f64>().map_err(|e| format!("bad number {f:?}: {e}")))
        .collect::<std::result::Result<_, _>>()?;
    let arr: [f64; HEX_AXES] = vals
        .try_into()
        .map_err(|v: Vec<f64>| format!("expected 6 values, got {}", v.len()))?;
    let h = Hex6(arr);
    if !h.is_finite() {
        return Err("non-finite value".into());
    }
    Ok(h)
}

pub fn format_points(points: &[Hex6]) -> String {
    let mut s = String::from("# vx,x0,vy,y0,vz,z0\n");
    for p in points {
        let [a, b, c, d, e, f] = p.0;
        let _ = writeln!(s, "{a},{b},{c},{d},{e},{f}");
    }
    s
}

pub fn read_points(path: &Path) -> Result<Vec<Hex6>> {
    parse_points(&read(path)?)
}

pub fn write_points(path: &Path, points: &[Hex6]) -> Result<()> {
    write(path, &format_points(points))
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn write(path: &Path, s: &str) -> Result<()> {
    fs::write(path, s).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn join<T: std::fmt::Display>(xs: &[T]) -> String {
    xs.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")
}

pub fn format_snapshot(idx: &MovingIndex) -> String {
    let cfg = idx.config();
    let mut s = String::new();
    let _ = writeln!(s, "{MAGIC} {VERSION}");
    let _ = writeln!(s, "lower {}", join(&cfg.lower));
    let _ = writeln!(s, "upper {}", join(&cfg.upper));
    let _ = writeln!(s, "divisions {}", join(&cfg.divisions));
    let _ = writeln!(s, "subdivisions {}", cfg.subdivisions);
    let _ = writeln!(s, "buckets {}", idx.bucket_count());
    for b in idx.buckets() {
        let _ = writeln!(s, "bucket {}", join(&b.id.0));
        for h in &b.hist {
            let _ = writeln!(s, "hist {}", join(&h.counts));
        }
    }
    s
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn record(&mut self, key: &str) -> Result<(usize, Vec<&'a str>)> {
        for (no, line) in self.inner.by_ref() {
            let mut f = line.split_whitespace();
            match f.next() {
                None => continue,
                Some(k) if k == key => return Ok((no + 1, f.collect())),
                Some(k) => return Err(Error::Parse(format!("line {}: expected {key}, found {k}", no + 1))),
            }
        }
        Err(Error::Parse(format!("unexpected end of snapshot, expected {key}")))
    }

    fn values<T: std::str::FromStr>(&mut self, key: &str, len: Option<usize>) -> Result<Vec<T>> {
        let (no, fields) = self.record(key)?;
        if let Some(len) = len {
            if fields.len() != len {
                return Err(Error::Parse(format!("line {no}: {key} needs {len} values, got {}", fields.len())));
            }
        }
        fields
            .iter()
            .map(|f| f.parse().map_err(|_| Error::Parse(format!("line {no}: bad {key} value {f:?}"))))
            .collect()
    }
}

fn array6<T: Copy>(v: Vec<T>) -> [T; HEX_AXES] {
    std::array::from_fn(|i| v[i])
}

pub fn parse_snapshot(text: &str) -> Result<MovingIndex> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
    };
    let version: Vec<u32> = lines.values(MAGIC, Some(1))?;
    if version[0] != VERSION {
        return Err(Error::Parse(format!("unsupported snapshot version {}", version[0])));
    }
    let cfg = GridConfig {
        lower: array6(lines.values("lower", Some(HEX_AXES))?),
        upper: array6(lines.values("upper", Some(HEX_AXES))?),
        divisions: array6(lines.values("divisions", Some(HEX_AXES))?),
        subdivisions: lines.values::<usize>("subdivisions", Some(1))?[0],
    };
    cfg.validate()?;
    let count = lines.values::<usize>("buckets", Some(1))?[0];
    let mut buckets: Vec<SkewAwareBucket> = Vec::with_capacity(count);
    for _ in 0..count {
        let id = CellId(array6(lines.values("bucket", Some(HEX_AXES))?));
        let hist = (0..HEX_AXES)
            .map(|_| {
                lines
                    .values::<u32>("hist", Some(cfg.subdivisions))
                    .map(AxisHistogram::from_counts)
            })
            .collect::<Result<Vec<_>>>()?;
        buckets.push(SkewAwareBucket::from_histograms(&cfg, id, hist)?);
    }
    MovingIndex::from_parts(cfg, buckets)
}

pub fn save_index(path: &Path, idx: &MovingIndex) -> Result<()> {
    write(path, &format_snapshot(idx))
}

pub fn load_index(path: &Path) -> Result<MovingIndex> {
    parse_snapshot(&read(path)?)
}
