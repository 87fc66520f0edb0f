//! Deterministic CSV/JSON writers.
//!
//! Floats are printed with 17 significant digits (`{:.16e}`), which
//! round-trips every finite double exactly and makes outputs
//! byte-identical across runs with the same config and seed. Infinities
//! serialize as the strings "inf"/"-inf" in JSON, NaN as "nan".

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use bv1d_core::bv_model::BVFunction1D;

/// 17-significant-digit formatting; exact round-trip for finite doubles.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    format!("{x:.16e}")
}

/// Minimal JSON document builder with insertion-ordered keys.
pub struct Json {
    buf: String,
    first: bool,
}

impl Json {
    pub fn object() -> Self {
        Self { buf: String::from("{"), first: true }
    }

    fn key(&mut self, k: &str) {
        if !self.first {
            self.buf.push(',');
        }
        self.first = false;
        let _ = write!(self.buf, "\"{k}\":");
    }

    pub fn num(mut self, k: &str, v: f64) -> Self {
        self.key(k);
        if v.is_finite() {
            let _ = write!(self.buf, "{}", fmt_f64(v));
        } else {
            let _ = write!(self.buf, "\"{}\"", fmt_f64(v));
        }
        self
    }

    pub fn int(mut self, k: &str, v: i64) -> Self {
        self.key(k);
        let _ = write!(self.buf, "{v}");
        self
    }

    pub fn str(mut self, k: &str, v: &str) -> Self {
        self.key(k);
        let _ = write!(self.buf, "\"{v}\"");
        self
    }

    pub fn bool(mut self, k: &str, v: bool) -> Self {
        self.key(k);
        let _ = write!(self.buf, "{v}");
        self
    }

    /// Array of numbers.
    pub fn nums(mut self, k: &str, vs: &[f64]) -> Self {
        self.key(k);
        self.buf.push('[');
        for (i, v) in vs.iter().enumerate() {
            if i > 0 {
                self.buf.push(',');
            }
            if v.is_finite() {
                let _ = write!(self.buf, "{}", fmt_f64(*v));
            } else {
                let _ = write!(self.buf, "\"{}\"", fmt_f64(*v));
            }
        }
        self.buf.push(']');
        self
    }

    /// Array of (key, value) pair objects.
    pub fn pairs(mut self, k: &str, names: (&str, &str), vs: &[(f64, f64)]) -> Self {
        self.key(k);
        self.buf.push('[');
        for (i, (a, b)) in vs.iter().enumerate() {
            if i > 0 {
                self.buf.push(',');
            }
            let _ = write!(
                self.buf,
                "{{\"{}\":{},\"{}\":{}}}",
                names.0,
                fmt_f64(*a),
                names.1,
                fmt_f64(*b)
            );
        }
        self.buf.push(']');
        self
    }

    /// Nested object.
    pub fn obj(mut self, k: &str, inner: Json) -> Self {
        self.key(k);
        self.buf.push_str(&inner.finish());
        self
    }

    pub fn finish(mut self) -> String {
        self.buf.push('}');
        self.buf
    }
}

pub fn write_text(path: &Path, text: &str) -> io::Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, text)
}

/// CSV dump of a BV function: header `x,u`, one row per node, plus a
/// sidecar `<stem>.atoms.json` holding the jump atoms. Round-trips all
/// finite doubles bit-exactly.
pub fn write_bv_csv(path: &Path, u: &BVFunction1D) -> io::Result<()> {
    let mut s = String::from("x,u\n");
    let g = u.grid();
    for (i, v) in u.values().iter().enumerate() {
        let _ = writeln!(s, "{},{}", fmt_f64(g.node(i)), fmt_f64(*v));
    }
    write_text(path, &s)?;
    let mut atoms = String::from("[");
    for (i, a) in u.atoms().iter().enumerate() {
        if i > 0 {
            atoms.push(',');
        }
        let _ = write!(
            atoms,
            "{{\"location\":{},\"jump\":{}}}",
            fmt_f64(a.location),
            fmt_f64(a.jump)
        );
    }
    atoms.push(']');
    let sidecar = path.with_extension("atoms.json");
    write_text(&sidecar, &atoms)
}

/// Nodes, values, and (location, jump) atoms parsed back from disk.
pub type BvCsvData = (Vec<f64>, Vec<f64>, Vec<(f64, f64)>);

/// Parse the pair written by `write_bv_csv` back into nodes/values/atoms.
pub fn read_bv_csv(path: &Path) -> io::Result<BvCsvData> {
    let text = fs::read_to_string(path)?;
    let mut xs = Vec::new();
    let mut us = Vec::new();
    for line in text.lines().skip(1) {
        let (a, b) = line
            .split_once(',')
            .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidData, "bad csv row"))?;
        let parse = |t: &str| {
            t.parse::<f64>()
                .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, format!("{e}: {t}")))
        };
        xs.push(parse(a)?);
        us.push(parse(b)?);
    }
    let sidecar = path.with_extension("atoms.json");
    let raw = fs::read_to_string(sidecar)?;
    let mut atoms = Vec::new();
    // the sidecar is a flat array of {"location":x,"jump":y} objects
    for chunk in raw.split('{').skip(1) {
        let body = chunk.split('}').next().unwrap_or("");
        let mut loc = None;
        let mut jmp = None;
        for field in body.split(',') {
            if let Some((k, v)) = field.split_once(':') {
                let v = v.trim();
                match k.trim_matches(|c| c == '"' || c == ' ') {
                    "location" => loc = v.parse().ok(),
                    "jump" => jmp = v.parse().ok(),
                    _ => {}
                }
            }
        }
        if let (Some(l), Some(j)) = (loc, jmp) {
            atoms.push((l, j));
        }
    }
    Ok((xs, us, atoms))
}

/// CSV matrix writer: header row then one row per entry of `rows`.
pub fn write_csv_matrix(path: &Path, header: &[String], rows: &[Vec<f64>]) -> io::Result<()> {
    let mut s = header.join(",");
    s.push('\n');
    for row in rows {
        let line: Vec<String> = row.iter().map(|v| fmt_f64(*v)).collect();
        s.push_str(&line.join(","));
        s.push('\n');
    }
    write_text(path, &s)
}
