//! Plain-text and JSON tensor files.
//!
//! Text layout: `#` comment lines, one header record
//! `n=<n> r=<r> kahler=<0|1> version=1`, then one record `i j alpha beta re im`
//! (1-based indices) per stored component. Only canonical tuples with
//! `(i, alpha) <= (j, beta)` are stored; the rest follow from Hermitian
//! symmetry and absent tuples are zero. The JSON variant carries the same
//! fields and is detected by a leading `{`.

use super::CurvatureTensor;
use crate::error::{CurvError, Result};
use crate::C64;
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const FORMAT_VERSION: &str = "1";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TensorFormat {
    Text,
    Json,
}

#[derive(Serialize, Deserialize)]
struct JsonEntry {
    i: usize,
    j: usize,
    alpha: usize,
    beta: usize,
    re: f64,
    im: f64,
}

#[derive(Serialize, Deserialize)]
struct JsonTensor {
    version: String,
    n: usize,
    r: usize,
    kahler: bool,
    entries: Vec<JsonEntry>,
}

fn canonical(i: usize, j: usize, a: usize, b: usize) -> bool {
    (i, a) <= (j, b)
}

fn canonical_entries(t: &CurvatureTensor) -> Vec<JsonEntry> {
    let mut out = Vec::new();
    for i in 0..t.n() {
        for j in 0..t.n() {
            for a in 0..t.r() {
                for b in 0..t.r() {
                    if canonical(i, j, a, b) {
                        let v = t.get(i, j, a, b);
                        out.push(JsonEntry { i: i + 1, j: j + 1, alpha: a + 1, beta: b + 1, re: v.re, im: v.im });
                    }
                }
            }
        }
    }
    out
}

pub fn write_tensor_text(t: &CurvatureTensor) -> String {
    let mut s = format!(
        "n={} r={} kahler={} version={}\n",
        t.n(),
        t.r(),
        u8::from(t.is_kahler()),
        FORMAT_VERSION
    );
    for e in canonical_entries(t) {
        s.push_str(&format!("{} {} {} {} {:.16e} {:.16e}\n", e.i, e.j, e.alpha, e.beta, e.re, e.im));
    }
    s
}

pub fn write_tensor_json(t: &CurvatureTensor) -> String {
    let doc = JsonTensor {
        version: FORMAT_VERSION.into(),
        n: t.n(),
        r: t.r(),
        kahler: t.is_kahler(),
        entries: canonical_entries(t),
    };
    serde_json::to_string_pretty(&doc).expect("tensor serializes")
}

pub fn write_tensor(path: &Path, t: &CurvatureTensor, format: TensorFormat) -> Result<()> {
    let body = match format {
        TensorFormat::Text => write_tensor_text(t),
        TensorFormat::Json => write_tensor_json(t),
    };
    std::fs::write(path, body)?;
    Ok(())
}

pub fn read_tensor(path: &Path) -> Result<CurvatureTensor> {
    read_tensor_str(&std::fs::read_to_string(path)?)
}

pub fn read_tensor_str(src: &str) -> Result<CurvatureTensor> {
    if src.trim_start().starts_with('{') {
        let doc: JsonTensor = serde_json::from_str(src).map_err(|e| CurvError::Parse {
            line: e.line(),
            msg: e.to_string(),
        })?;
        if doc.version != FORMAT_VERSION {
            return Err(CurvError::Parse { line: 1, msg: format!("unsupported version {}", doc.version) });
        }
        let mut b = Builder::new(doc.n, doc.r, doc.kahler, 1)?;
        for (k, e) in doc.entries.iter().enumerate() {
            b.insert(k + 1, [e.i, e.j, e.alpha, e.beta], C64::new(e.re, e.im))?;
        }
        return b.finish();
    }
    let mut builder: Option<Builder> = None;
    for (k, raw) in src.lines().enumerate() {
        let line = k + 1;
        let text = raw.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        match builder.as_mut() {
            None => builder = Some(parse_header(text, line)?),
            Some(b) => {
                let f: Vec<&str> = text.split_whitespace().collect();
                if f.len() != 6 {
                    return Err(CurvError::Parse { line, msg: format!("expected 6 fields, found {}", f.len()) });
                }
                let mut idx = [0usize; 4];
                for (slot, field) in idx.iter_mut().zip(&f[..4]) {
                    *slot = field
                        .parse()
                        .map_err(|_| CurvError::Parse { line, msg: format!("bad index '{field}'") })?;
                }
                let num = |s: &str| {
                    s.parse::<f64>()
                        .ok()
                        .filter(|v| v.is_finite())
                        .ok_or_else(|| CurvError::Parse { line, msg: format!("bad number '{s}'") })
                };
                b.insert(line, idx, C64::new(num(f[4])?, num(f[5])?))?;
            }
        }
    }
    builder
        .ok_or(CurvError::Parse { line: 1, msg: "missing header record".into() })?
        .finish()
}

fn parse_header(text: &str, line: usize) -> Result<Builder> {
    let (mut n, mut r, mut kahler, mut version) = (None, None, None, None);
    for field in text.split_whitespace() {
        let (key, val) = field
            .split_once('=')
            .ok_or_else(|| CurvError::Parse { line, msg: format!("bad header field '{field}'") })?;
        let bad = || CurvError::Parse { line, msg: format!("bad header value '{field}'") };
        match key {
            "n" => n = Some(val.parse::<usize>().map_err(|_| bad())?),
            "r" => r = Some(val.parse::<usize>().map_err(|_| bad())?),
            "kahler" => {
                kahler = Some(match val {
                    "0" | "false" => false,
                    "1" | "true" => true,
                    _ => return Err(bad()),
                })
            }
            "version" => version = Some(val.to_string()),
            _ => return Err(CurvError::Parse { line, msg: format!("unknown header field '{key}'") }),
        }
    }
    let missing = |what: &str| CurvError::Parse { line, msg: format!("header lacks '{what}'") };
    let version = version.ok_or_else(|| missing("version"))?;
    if version != FORMAT_VERSION {
        return Err(CurvError::Parse { line, msg: format!("unsupported version {version}") });
    }
    Builder::new(
        n.ok_or_else(|| missing("n"))?,
        r.ok_or_else(|| missing("r"))?,
        kahler.ok_or_else(|| missing("kahler"))?,
        line,
    )
}

struct Builder {
    n: usize,
    r: usize,
    kahler: bool,
    data: Vec<C64>,
    seen: Vec<bool>,
}

impl Builder {
    fn new(n: usize, r: usize, kahler: bool, line: usize) -> Result<Self> {
        if n == 0 || r == 0 || n > 64 || r > 64 {
            return Err(CurvError::Parse { line, msg: format!("unsupported dimensions n={n}, r={r}") });
        }
        if kahler && n != r {
            return Err(CurvError::Parse { line, msg: "Kähler tensor needs r = n".into() });
        }
        let len = n * n * r * r;
        Ok(Self { n, r, kahler, data: vec![C64::new(0.0, 0.0); len], seen: vec![false; len] })
    }

    fn insert(&mut self, line: usize, idx: [usize; 4], v: C64) -> Result<()> {
        let [i, j, a, b] = idx;
        if i == 0 || j == 0 || i > self.n || j > self.n || a == 0 || b == 0 || a > self.r || b > self.r {
            return Err(CurvError::Parse { line, msg: format!("index {idx:?} out of range") });
        }
        let (i, j, a, b) = (i - 1, j - 1, a - 1, b - 1);
        if !canonical(i, j, a, b) {
            return Err(CurvError::Parse { line, msg: format!("index {idx:?} is not canonical") });
        }
        let k = ((i * self.n + j) * self.r + a) * self.r + b;
        if self.seen[k] {
            return Err(CurvError::Parse { line, msg: format!("duplicate entry {idx:?}") });
        }
        self.seen[k] = true;
        self.data[k] = v;
        self.data[((j * self.n + i) * self.r + b) * self.r + a] = if (i, a) == (j, b) { v } else { v.conj() };
        Ok(())
    }

    fn finish(self) -> Result<CurvatureTensor> {
        CurvatureTensor::from_data(self.n, self.r, self.kahler, self.data)
    }
}
