//! Fixed-format MPS export and plain-text solution import.
//!
//! Column and row names are replaced by eight-character codes (`C0000001`,
//! `R0000001`, ...) so any instance fits the fixed field widths. The
//! [`NameMap`] returned alongside the text translates codes back.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Write;

use serde::{Deserialize, Serialize};

use super::{MilpInstance, RawSolution, RowSense, SolveStatus, VarKind};

/// Width of the numeric MPS fields.
const NUM_WIDTH: usize = 12;

/// Eight-character codes paired with the instance's own names.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct NameMap {
    /// `(code, name)` per column, in variable order.
    pub columns: Vec<(String, String)>,
    /// `(code, name)` per row, in row order.
    pub rows: Vec<(String, String)>,
    /// Constant dropped from the MPS objective row.
    pub objective_offset: f64,
}

impl NameMap {
    pub fn for_instance(instance: &MilpInstance) -> Self {
        Self {
            columns: instance
                .variables
                .iter()
                .enumerate()
                .map(|(j, v)| (column_code(j), v.name.clone()))
                .collect(),
            rows: instance
                .rows
                .iter()
                .enumerate()
                .map(|(i, r)| (row_code(i), r.name.clone()))
                .collect(),
            objective_offset: instance.objective_offset,
        }
    }
}

pub fn column_code(j: usize) -> String {
    format!("C{:07}", j + 1)
}

pub fn row_code(i: usize) -> String {
    format!("R{:07}", i + 1)
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum MpsError {
    #[error("instance has {0} entries; eight-character codes allow at most 9999999")]
    TooLarge(usize),
    #[error("value {0} does not fit a 12-character MPS field")]
    Unrepresentable(f64),
    #[error("solution line {line}: expected `<name> <value>`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("solution names not in the instance: {}", .0.join(", "))]
    UnknownNames(Vec<String>),
    #[error("solution line {line}: `{name}` assigned twice")]
    Duplicate { line: usize, name: String },
}

/// Formats `x` in at most twelve characters, keeping as many significant
/// digits as fit.
pub fn format_number(x: f64) -> Result<String, MpsError> {
    if !x.is_finite() {
        return Err(MpsError::Unrepresentable(x));
    }
    if x == 0.0 {
        return Ok("0".to_string());
    }
    if x == libm::trunc(x) && libm::fabs(x) < 1e11 {
        return Ok(format!("{}", x as i64));
    }
    let mut best: Option<String> = None;
    for digits in (0..=10).rev() {
        let fixed = format!("{:.*}", digits, x);
        let fixed = trim_fraction(&fixed);
        if fixed.len() <= NUM_WIDTH && fixed.parse::<f64>().ok().map_or(false, |v| v != 0.0) {
            best = Some(fixed);
            break;
        }
    }
    for digits in (0..=8).rev() {
        let sci = format!("{:.*e}", digits, x);
        if sci.len() <= NUM_WIDTH {
            let keep = match &best {
                Some(f) => rel_err(f, x) <= rel_err(&sci, x),
                None => false,
            };
            if !keep {
                best = Some(sci);
            }
            break;
        }
    }
    best.ok_or(MpsError::Unrepresentable(x))
}

fn trim_fraction(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

fn rel_err(s: &str, x: f64) -> f64 {
    s.parse::<f64>().map_or(f64::INFINITY, |v| libm::fabs(v - x) / libm::fabs(x))
}

fn pad(out: &mut String, field: &str, width: usize) {
    out.push_str(field);
    for _ in field.len()..width {
        out.push(' ');
    }
}

/// One data line in fixed columns 2-3, 5-12, 15-22, 25-36, 40-47, 50-61.
fn data_line(out: &mut String, code: &str, name: &str, pairs: &[(&str, &str)]) {
    out.push(' ');
    pad(out, code, 2);
    out.push(' ');
    let mut line = String::new();
    pad(&mut line, name, 8);
    for (k, (n, v)) in pairs.iter().enumerate() {
        line.push_str(if k == 0 { "  " } else { "   " });
        pad(&mut line, n, 8);
        line.push_str("  ");
        pad(&mut line, v, NUM_WIDTH);
    }
    out.push_str(line.trim_end());
    out.push('\n');
}

/// Writes `instance` as fixed-format MPS. Binaries sit between INTORG and
/// INTEND markers and carry explicit bounds.
pub fn export_mps(instance: &MilpInstance, problem_name: &str) -> Result<(String, NameMap), MpsError> {
    let n = instance.variables.len().max(instance.rows.len());
    if n > 9_999_999 {
        return Err(MpsError::TooLarge(n));
    }
    let map = NameMap::for_instance(instance);
    let mut out = String::new();
    let name: String = problem_name.chars().filter(|c| !c.is_whitespace()).take(8).collect();
    let _ = writeln!(out, "NAME          {name}");
    out.push_str("ROWS\n");
    out.push_str(" N  OBJ\n");
    for (i, row) in instance.rows.iter().enumerate() {
        let code = match row.sense {
            RowSense::Le => "L",
            RowSense::Ge => "G",
            RowSense::Eq => "E",
        };
        let _ = writeln!(out, " {code}  {}", row_code(i));
    }

    let mut by_column: Vec<Vec<(usize, f64)>> = vec![Vec::new(); instance.variables.len()];
    for (i, row) in instance.rows.iter().enumerate() {
        for &(j, a) in &row.coeffs {
            if a != 0.0 {
                by_column[j].push((i, a));
            }
        }
    }

    out.push_str("COLUMNS\n");
    let mut in_int = false;
    let mut marker = 0;
    for (j, var) in instance.variables.iter().enumerate() {
        let is_int = var.kind == VarKind::Binary;
        if is_int != in_int {
            let tag = if is_int { "'INTORG'" } else { "'INTEND'" };
            let _ = writeln!(out, "    M{marker:07}  'MARKER'                 {tag}");
            marker += 1;
            in_int = is_int;
        }
        let col = column_code(j);
        let mut entries: Vec<(String, String)> = Vec::new();
        if var.cost != 0.0 {
            entries.push(("OBJ".to_string(), format_number(var.cost)?));
        }
        for &(i, a) in &by_column[j] {
            entries.push((row_code(i), format_number(a)?));
        }
        if entries.is_empty() {
            // Keep the column declared even when it appears nowhere.
            entries.push(("OBJ".to_string(), "0".to_string()));
        }
        for chunk in entries.chunks(2) {
            let pairs: Vec<(&str, &str)> = chunk.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
            data_line(&mut out, "", &col, &pairs);
        }
    }
    if in_int {
        let _ = writeln!(out, "    M{marker:07}  'MARKER'                 'INTEND'");
    }

    out.push_str("RHS\n");
    let rhs: Vec<(String, String)> = instance
        .rows
        .iter()
        .enumerate()
        .filter(|(_, r)| r.rhs != 0.0)
        .map(|(i, r)| Ok((row_code(i), format_number(r.rhs)?)))
        .collect::<Result<_, MpsError>>()?;
    for chunk in rhs.chunks(2) {
        let pairs: Vec<(&str, &str)> = chunk.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
        data_line(&mut out, "", "RHS", &pairs);
    }

    out.push_str("BOUNDS\n");
    for (j, var) in instance.variables.iter().enumerate() {
        let col = column_code(j);
        let (lo, hi) = (var.lower, var.upper);
        let mut bound = |code: &str, value: Option<f64>| -> Result<(), MpsError> {
            match value {
                Some(v) => {
                    let v = format_number(v)?;
                    data_line(&mut out, code, "BND", &[(&col, &v)]);
                }
                None => data_line(&mut out, code, "BND", &[(&col, "")]),
            }
            Ok(())
        };
        if var.kind == VarKind::Binary && lo == 0.0 && hi == 1.0 {
            bound("BV", None)?;
        } else if lo == hi {
            bound("FX", Some(lo))?;
        } else {
            match (lo.is_finite(), hi.is_finite()) {
                (false, false) => bound("FR", None)?,
                (false, true) => {
                    bound("MI", None)?;
                    bound("UP", Some(hi))?;
                }
                (true, _) => {
                    // Integer columns default to an upper bound of one in
                    // some readers, so state both sides for them.
                    if lo != 0.0 || var.kind == VarKind::Binary {
                        bound("LO", Some(lo))?;
                    }
                    if hi.is_finite() {
                        bound("UP", Some(hi))?;
                    }
                }
            }
        }
    }
    out.push_str("ENDATA\n");
    Ok((out, map))
}

/// Reads `<name> <value>` lines; `#` starts a comment. Names may be codes or
/// the instance's own column names. Columns not listed are zero.
///
/// A comment line `# status optimal` marks the point as proven optimal;
/// otherwise it is reported gap-limited with no bound.
pub fn import_solution(text: &str, instance: &MilpInstance, map: &NameMap) -> Result<RawSolution, MpsError> {
    let mut index: BTreeMap<&str, usize> = BTreeMap::new();
    for (j, (code, name)) in map.columns.iter().enumerate() {
        index.insert(code.as_str(), j);
        index.entry(name.as_str()).or_insert(j);
    }
    let mut values = vec![0.0; instance.variables.len()];
    let mut seen = vec![false; instance.variables.len()];
    let mut unknown = Vec::new();
    let mut optimal = false;
    for (k, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if let Some(comment) = line.strip_prefix('#') {
            let words: Vec<&str> = comment.split_whitespace().collect();
            if words.len() == 2 && words[0].eq_ignore_ascii_case("status") {
                optimal = words[1].eq_ignore_ascii_case("optimal");
            }
            continue;
        }
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let (Some(name), Some(value), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(MpsError::Syntax {
                line: k + 1,
                text: raw.to_string(),
            });
        };
        let value: f64 = value.parse().map_err(|_| MpsError::Syntax {
            line: k + 1,
            text: raw.to_string(),
        })?;
        match index.get(name) {
            Some(&j) if j < values.len() => {
                if seen[j] {
                    return Err(MpsError::Duplicate {
                        line: k + 1,
                        name: name.to_string(),
                    });
                }
                seen[j] = true;
                values[j] = value;
            }
            _ => unknown.push(name.to_string()),
        }
    }
    if !unknown.is_empty() {
        return Err(MpsError::UnknownNames(unknown));
    }
    let objective = instance.objective_at(&values);
    Ok(RawSolution {
        objective,
        bound: if optimal { objective } else { f64::NEG_INFINITY },
        status: if optimal {
            SolveStatus::Optimal
        } else {
            SolveStatus::GapLimited
        },
        node_count: 0,
        duals: None,
        values,
    })
}
