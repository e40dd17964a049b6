//! On-disk and textual formats: demand JSON, binary libraries, plan
//! summaries, decode reports and tradeoff tables.

use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::Path;

use fncache_core::analysis::{LoadPoint, Rational};
use fncache_core::decoder::DecodeReport;
use fncache_core::encoder::TransmissionPlan;
use fncache_core::gf::{Field, FieldElement};
use fncache_core::linalg::{DemandMatrix, GfMatrix};
use fncache_core::placement::{FileLibrary, SubfileSource};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("entries outside GF({q}) at (row, col, value): {entries:?}")]
    Range {
        q: u64,
        entries: Vec<(usize, usize, i64)>,
    },
}

fn io_err(path: &Path, source: std::io::Error) -> FormatError {
    FormatError::Io {
        path: path.display().to_string(),
        source,
    }
}

#[derive(Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct DemandFile {
    q: u64,
    matrix: Vec<Vec<i64>>,
}

/// Parses `{"q": int, "matrix": [[int, ...], ...]}`. Entries outside
/// `[0, q)` are reported, never reduced.
pub fn parse_demands(text: &str) -> Result<DemandMatrix, FormatError> {
    let file: DemandFile =
        serde_json::from_str(text).map_err(|e| FormatError::Parse(e.to_string()))?;
    let field = Field::new(file.q).map_err(|e| FormatError::Parse(e.to_string()))?;
    if file.matrix.is_empty() {
        return Err(FormatError::Parse("matrix has no rows".into()));
    }
    let cols = file.matrix[0].len();
    if let Some(r) = file.matrix.iter().position(|row| row.len() != cols) {
        return Err(FormatError::Parse(format!(
            "row {r} has {} entries, expected {cols}",
            file.matrix[r].len()
        )));
    }
    let mut bad = Vec::new();
    for (r, row) in file.matrix.iter().enumerate() {
        for (c, &v) in row.iter().enumerate() {
            if v < 0 || v as u64 >= file.q {
                bad.push((r, c, v));
            }
        }
    }
    if !bad.is_empty() {
        return Err(FormatError::Range {
            q: file.q,
            entries: bad,
        });
    }
    let rows: Vec<Vec<u32>> = file
        .matrix
        .iter()
        .map(|row| row.iter().map(|&v| v as u32).collect())
        .collect();
    GfMatrix::from_rows(&field, &rows).map_err(|e| FormatError::Parse(e.to_string()))
}

pub fn load_demands(path: &Path) -> Result<DemandMatrix, FormatError> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    parse_demands(&text)
}

pub fn demands_to_json(d: &DemandMatrix) -> String {
    let file = DemandFile {
        q: d.field().order() as u64,
        matrix: d
            .to_rows()
            .into_iter()
            .map(|row| row.into_iter().map(i64::from).collect())
            .collect(),
    };
    serde_json::to_string(&file).expect("serializable")
}

const LIBRARY_MAGIC: &[u8; 4] = b"FNLB";
const LIBRARY_VERSION: u8 = 1;

/// Binary library: `"FNLB" version:u8 q:u32 N:u32 B:u64 K:u16 t:u16 seed:u64`
/// followed by the N·B symbols row by row, little-endian, one byte per
/// symbol when q ≤ 256 and two otherwise.
pub fn write_library<W: Write>(lib: &FileLibrary, mut out: W) -> std::io::Result<()> {
    let q = lib.field().order();
    out.write_all(LIBRARY_MAGIC)?;
    out.write_all(&[LIBRARY_VERSION])?;
    out.write_all(&q.to_le_bytes())?;
    out.write_all(&(lib.files() as u32).to_le_bytes())?;
    out.write_all(&(lib.file_len() as u64).to_le_bytes())?;
    out.write_all(&(lib.users() as u16).to_le_bytes())?;
    out.write_all(&(lib.t() as u16).to_le_bytes())?;
    out.write_all(&lib.seed().to_le_bytes())?;
    let mut body = Vec::with_capacity(lib.symbols().len() * 2);
    for s in lib.symbols() {
        if q <= 256 {
            body.push(s.value() as u8);
        } else {
            body.extend_from_slice(&(s.value() as u16).to_le_bytes());
        }
    }
    out.write_all(&body)
}

pub fn read_library<R: Read>(mut input: R) -> Result<FileLibrary, FormatError> {
    let mut buf = Vec::new();
    input
        .read_to_end(&mut buf)
        .map_err(|e| FormatError::Parse(e.to_string()))?;
    let bad = |m: &str| FormatError::Parse(format!("library: {m}"));
    let header = 4 + 1 + 4 + 4 + 8 + 2 + 2 + 8;
    if buf.len() < header || &buf[..4] != LIBRARY_MAGIC {
        return Err(bad("bad magic or truncated header"));
    }
    if buf[4] != LIBRARY_VERSION {
        return Err(bad("unsupported version"));
    }
    let le32 = |i: usize| u32::from_le_bytes(buf[i..i + 4].try_into().unwrap());
    let le64 = |i: usize| u64::from_le_bytes(buf[i..i + 8].try_into().unwrap());
    let le16 = |i: usize| u16::from_le_bytes(buf[i..i + 2].try_into().unwrap());
    let q = le32(5);
    let n = le32(9) as usize;
    let b = le64(13) as usize;
    let k = le16(21) as usize;
    let t = le16(23) as usize;
    let seed = le64(25);
    let field = Field::new(q as u64).map_err(|e| bad(&e.to_string()))?;
    let width = if q <= 256 { 1 } else { 2 };
    let body = &buf[header..];
    if body.len() != n * b * width {
        return Err(bad("symbol section has the wrong length"));
    }
    let symbols = body
        .chunks(width)
        .map(|c| {
            let v = if width == 1 {
                c[0] as u32
            } else {
                u16::from_le_bytes([c[0], c[1]]) as u32
            };
            field.element(v).map_err(|e| bad(&e.to_string()))
        })
        .collect::<Result<Vec<FieldElement>, _>>()?;
    FileLibrary::from_symbols(&field, n, b, k, t, seed, symbols).map_err(|e| bad(&e.to_string()))
}

pub fn rational_string(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

#[derive(Serialize)]
pub struct SignEntry {
    pub user: usize,
    pub alpha: u32,
    pub sign: &'static str,
}

#[derive(Serialize)]
pub struct MessageSummary {
    pub subset: Vec<usize>,
    pub signs: Vec<SignEntry>,
}

/// Subsets and signs of a plan, without payloads.
#[derive(Serialize)]
pub struct PlanSummary {
    pub q: u32,
    pub k: usize,
    pub n: usize,
    pub t: usize,
    pub rank: usize,
    pub leaders: Vec<usize>,
    pub messages: Vec<MessageSummary>,
}

impl PlanSummary {
    pub fn new(plan: &TransmissionPlan) -> Self {
        let f = plan.field();
        PlanSummary {
            q: f.order(),
            k: plan.users(),
            n: plan.files(),
            t: plan.t(),
            rank: plan.leaders().len(),
            leaders: plan.leaders().users().to_vec(),
            messages: plan
                .messages()
                .iter()
                .map(|m| MessageSummary {
                    subset: m.subset.to_vec(),
                    signs: m
                        .coefficients
                        .iter()
                        .map(|&(user, a)| SignEntry {
                            user,
                            alpha: a.value(),
                            sign: if a == f.one() { "+" } else { "-" },
                        })
                        .collect(),
                })
                .collect(),
        }
    }
}

#[derive(Serialize)]
pub struct UserLine {
    pub user: usize,
    pub demand: Vec<u32>,
    pub leader: bool,
    pub ok: bool,
}

#[derive(Serialize)]
pub struct ResidualLine {
    pub subset: Vec<usize>,
    pub nonzero_symbols: usize,
}

/// JSON report written by `simulate`.
#[derive(Serialize)]
pub struct SimulationReport {
    pub q: u32,
    pub k: usize,
    pub n: usize,
    pub t: usize,
    pub b: usize,
    pub subfile_len: usize,
    pub seed: u64,
    pub memory: String,
    pub rank: usize,
    pub leaders: Vec<usize>,
    pub messages: usize,
    pub expected_messages: String,
    pub load: String,
    pub formula_load: String,
    pub users: Vec<UserLine>,
    pub residuals: Vec<ResidualLine>,
    pub success: bool,
}

impl SimulationReport {
    pub fn user_lines(plan: &TransmissionPlan, report: &DecodeReport) -> Vec<UserLine> {
        report
            .users
            .iter()
            .map(|u| UserLine {
                user: u.user,
                demand: plan
                    .basis()
                    .demand_row(u.user)
                    .iter()
                    .map(|e| e.value())
                    .collect(),
                leader: plan.leaders().contains(u.user),
                ok: u.matches,
            })
            .collect()
    }

    pub fn residual_lines(report: &DecodeReport) -> Vec<ResidualLine> {
        report
            .residuals
            .iter()
            .map(|r| ResidualLine {
                subset: r.subset.to_vec(),
                nonzero_symbols: r.residual.iter().filter(|e| !e.is_zero()).count(),
            })
            .collect()
    }
}

/// `t,M_num,M_den,R_num,R_den` table.
pub fn curve_csv(points: &[LoadPoint]) -> String {
    let mut out = String::from("t,M_num,M_den,R_num,R_den\n");
    for p in points {
        writeln!(
            out,
            "{},{},{},{},{}",
            p.t,
            p.memory.numer(),
            p.memory.denom(),
            p.load.numer(),
            p.load.denom()
        )
        .expect("string write");
    }
    out
}

#[derive(Serialize)]
struct CurveRow {
    t: usize,
    memory: String,
    load: String,
}

#[derive(Serialize)]
struct CurveJson {
    points: Vec<CurveRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    envelope: Option<Vec<CurveRow>>,
}

fn rows(points: &[LoadPoint]) -> Vec<CurveRow> {
    points
        .iter()
        .map(|p| CurveRow {
            t: p.t,
            memory: rational_string(&p.memory),
            load: rational_string(&p.load),
        })
        .collect()
}

pub fn curve_json(points: &[LoadPoint], envelope: Option<&[LoadPoint]>) -> String {
    let doc = CurveJson {
        points: rows(points),
        envelope: envelope.map(rows),
    };
    serde_json::to_string_pretty(&doc).expect("serializable") + "\n"
}
