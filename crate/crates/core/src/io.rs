//! Text formats: columnar profiles and fields with `#` headers, CSV tables
//! and pretty JSON reports.
//!
//! Numbers are printed with 17 significant digits, which round-trips every
//! `f64` exactly.

use crate::error::{Error, Result};
use crate::gluing::{ConformalField, GlueMode, Provenance};
use crate::hypgeom::axial_to_polar;
use crate::seedprofile::{RadialProfile, SeedParams};
use serde::{Deserialize, Serialize};
use std::fs::File;
use std::io::{BufRead, BufWriter, Write};
use std::path::Path;

const PROFILE_MAGIC: &str = "# ahglue profile v1";
const FIELD_MAGIC: &str = "# ahglue field v1";

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse_num(s: &str, line: usize) -> Result<f64> {
    s.parse().map_err(|_| Error::Parse(format!("line {line}: bad number {s:?}")))
}

/// Writes `ρ  w  w'  w''  w−1`, one row per knot, after a header carrying
/// the seed parameters.
pub fn write_profile<W: Write>(p: &RadialProfile, mut out: W) -> Result<()> {
    writeln!(out, "{PROFILE_MAGIC}")?;
    writeln!(out, "# params {}", serde_json::to_string(&p.params).map_err(|e| Error::Parse(e.to_string()))?)?;
    writeln!(out, "# rho_h {}", num(p.rho_h))?;
    writeln!(out, "# support_radius {}", num(p.support_radius))?;
    writeln!(out, "# decay_amplitude {}", num(p.decay_amplitude))?;
    writeln!(out, "# rho w dw d2w w_minus_1")?;
    for i in 0..p.knots.len() {
        writeln!(
            out,
            "{} {} {} {} {}",
            num(p.knots[i]),
            num(1.0 + p.dev[i]),
            num(p.d1[i]),
            num(p.d2[i]),
            num(p.dev[i])
        )?;
    }
    Ok(())
}

/// Reads a profile written by [`write_profile`]. `w − 1` is taken from the
/// fifth column.
pub fn read_profile<R: BufRead>(input: R) -> Result<RadialProfile> {
    let mut params: Option<SeedParams> = None;
    let (mut rho_h, mut support, mut amp) = (None, None, None);
    let (mut knots, mut dev, mut d1, mut d2) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for (n, line) in input.lines().enumerate() {
        let line = line?;
        let n = n + 1;
        if n == 1 {
            if line.trim() != PROFILE_MAGIC {
                return Err(Error::Parse(format!("not a profile file: {line:?}")));
            }
            continue;
        }
        if let Some(h) = line.strip_prefix("# ") {
            let (key, val) = h.split_once(' ').unwrap_or((h, ""));
            match key {
                "params" => params = Some(serde_json::from_str(val).map_err(|e| Error::Parse(format!("line {n}: {e}")))?),
                "rho_h" => rho_h = Some(parse_num(val, n)?),
                "support_radius" => support = Some(parse_num(val, n)?),
                "decay_amplitude" => amp = Some(parse_num(val, n)?),
                _ => {}
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split_whitespace().collect();
        if cols.len() != 5 {
            return Err(Error::Parse(format!("line {n}: expected 5 columns, got {}", cols.len())));
        }
        knots.push(parse_num(cols[0], n)?);
        d1.push(parse_num(cols[2], n)?);
        d2.push(parse_num(cols[3], n)?);
        dev.push(parse_num(cols[4], n)?);
    }
    let missing = |k: &str| Error::Parse(format!("profile header lacks {k}"));
    if knots.len() < 2 {
        return Err(Error::Parse("profile needs at least two rows".into()));
    }
    Ok(RadialProfile {
        knots,
        dev,
        d1,
        d2,
        decay_amplitude: amp.ok_or_else(|| missing("decay_amplitude"))?,
        support_radius: support.ok_or_else(|| missing("support_radius"))?,
        params: params.ok_or_else(|| missing("params"))?,
        rho_h: rho_h.ok_or_else(|| missing("rho_h"))?,
    })
}

/// The gluing configuration as echoed in field headers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlueEcho {
    pub tau: f64,
    pub mode: GlueMode,
    pub centers_z: Vec<f64>,
    pub deltas: Vec<f64>,
    pub seeds: Vec<SeedParams>,
}

impl GlueEcho {
    pub fn of(field: &ConformalField) -> Self {
        let c = &field.metric.cfg;
        GlueEcho {
            tau: c.tau,
            mode: c.mode,
            centers_z: c.centers_z.clone(),
            deltas: c.deltas.clone(),
            seeds: c.profiles.iter().map(|p| p.params).collect(),
        }
    }
}

/// Writes `z  r  ρ  θ  w  u−1` per node (`ρ, θ` about the midpoint) after a
/// header echoing the gluing configuration.
pub fn write_field<W: Write>(field: &ConformalField, mut out: W) -> Result<()> {
    let g = &field.grid;
    writeln!(out, "{FIELD_MAGIC}")?;
    writeln!(out, "# config {}", serde_json::to_string(&GlueEcho::of(field)).map_err(|e| Error::Parse(e.to_string()))?)?;
    let prov = match field.provenance {
        Provenance::Glued => "glued",
        Provenance::Solved => "solved",
    };
    writeln!(out, "# provenance {prov}")?;
    writeln!(out, "# solved_radius {}", num(field.solved_radius))?;
    writeln!(out, "# grid {} {} {}", g.nz(), g.nr(), num(g.rho_max))?;
    writeln!(out, "# z r rho theta w u_minus_1")?;
    for i in 0..g.len() {
        let (z, r) = g.coords(i);
        let (rho, theta) = axial_to_polar(z, r, 0.0);
        writeln!(
            out,
            "{} {} {} {} {} {}",
            num(z),
            num(r),
            num(rho),
            num(theta),
            num(field.w_node(i)),
            num(field.delta[i])
        )?;
    }
    Ok(())
}

/// Header and numeric columns of a field file.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldTable {
    pub config: GlueEcho,
    pub provenance: String,
    pub columns: Vec<[f64; 6]>,
}

pub fn read_field<R: BufRead>(input: R) -> Result<FieldTable> {
    let mut config = None;
    let mut provenance = String::new();
    let mut columns = Vec::new();
    for (n, line) in input.lines().enumerate() {
        let line = line?;
        let n = n + 1;
        if n == 1 {
            if line.trim() != FIELD_MAGIC {
                return Err(Error::Parse(format!("not a field file: {line:?}")));
            }
            continue;
        }
        if let Some(h) = line.strip_prefix("# ") {
            let (key, val) = h.split_once(' ').unwrap_or((h, ""));
            match key {
                "config" => config = Some(serde_json::from_str(val).map_err(|e| Error::Parse(format!("line {n}: {e}")))?),
                "provenance" => provenance = val.to_string(),
                _ => {}
            }
            continue;
        }
        let cols: Vec<f64> = line.split_whitespace().map(|c| parse_num(c, n)).collect::<Result<_>>()?;
        let row: [f64; 6] = cols.try_into().map_err(|c: Vec<f64>| Error::Parse(format!("line {n}: expected 6 columns, got {}", c.len())))?;
        columns.push(row);
    }
    Ok(FieldTable { config: config.ok_or_else(|| Error::Parse("field header lacks config".into()))?, provenance, columns })
}

/// Writes a CSV table with the given header.
pub fn write_csv<P: AsRef<Path>>(path: P, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(row.iter().map(|&x| num(x))).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Parse(format!("{other:?}")),
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value).map_err(|e| Error::Parse(e.to_string()))
}

pub fn write_json<P: AsRef<Path>, T: Serialize>(path: P, value: &T) -> Result<()> {
    let mut f = BufWriter::new(File::create(path)?);
    f.write_all(to_json(value)?.as_bytes())?;
    f.write_all(b"\n")?;
    f.flush()?;
    Ok(())
}

/// Creates `path` and writes through `f`.
pub fn write_file<P: AsRef<Path>, F: FnOnce(&mut BufWriter<File>) -> Result<()>>(path: P, f: F) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    f(&mut w)?;
    w.flush()?;
    Ok(())
}
