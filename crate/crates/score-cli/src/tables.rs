//! CSV readers and writers for the artifact files the commands exchange.
//!
//! Everything is UTF-8 with LF line endings and a header row. Floats print in
//! Rust's shortest round-trip form, so identical values give identical bytes.

use std::fmt::Write as _;
use std::path::Path;

use ndarray::ArrayView2;
use score_core::netcore::Graph;

use crate::CliError;

/// One `u v` line per edge.
pub fn edges_text(g: &Graph) -> String {
    let mut out = String::new();
    for &(u, v) in g.edges() {
        let _ = writeln!(out, "{u} {v}");
    }
    out
}

pub fn labels_csv(nodes: &[usize], labels: &[usize]) -> String {
    let mut out = String::from("node,label\n");
    for (&node, &label) in nodes.iter().zip(labels) {
        let _ = writeln!(out, "{node},{label}");
    }
    out
}

/// Two integer columns under the given header line.
pub fn pair_csv(header: &str, rows: &[(usize, usize)]) -> String {
    let mut out = format!("{header}\n");
    for &(a, b) in rows {
        let _ = writeln!(out, "{a},{b}");
    }
    out
}

/// One row per node: `node,pi_1,..,pi_k`.
pub fn memberships_csv(nodes: &[usize], pi: &ArrayView2<f64>) -> String {
    let mut out = String::from("node");
    for t in 1..=pi.ncols() {
        let _ = write!(out, ",pi_{t}");
    }
    out.push('\n');
    for (r, &node) in nodes.iter().enumerate() {
        let _ = write!(out, "{node}");
        for v in pi.row(r) {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    out
}

/// Stacked per-snapshot rows: `node,t,<prefix>_1,..,<prefix>_k` with `t`
/// counting snapshots from 1.
pub fn snapshots_csv(prefix: &str, per_snapshot: &[ArrayView2<f64>]) -> String {
    let k = per_snapshot.first().map_or(0, |m| m.ncols());
    let mut out = String::from("node,t");
    for c in 1..=k {
        let _ = write!(out, ",{prefix}_{c}");
    }
    out.push('\n');
    for (t, m) in per_snapshot.iter().enumerate() {
        for (node, row) in m.rows().into_iter().enumerate() {
            let _ = write!(out, "{node},{}", t + 1);
            for v in row {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
    }
    out
}

/// One row per entry of `names`: `<key>,topic_1,..,topic_k`. `rows` must have
/// one row per name.
pub fn topic_rows_csv(key: &str, names: &[String], rows: &ArrayView2<f64>) -> String {
    let mut out = String::from(key);
    for t in 1..=rows.ncols() {
        let _ = write!(out, ",topic_{t}");
    }
    out.push('\n');
    for (name, row) in names.iter().zip(rows.rows()) {
        let _ = write!(out, "{name}");
        for v in row {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    out
}

/// `m,psi,q,bias` rows, one per scan step, `m` counting from 1.
pub fn gof_trace_csv(psi: &[f64], q: &[f64], bias: &[f64]) -> String {
    let mut out = String::from("m,psi,q,bias\n");
    for (m, ((p, qv), b)) in psi.iter().zip(q).zip(bias).enumerate() {
        let _ = writeln!(out, "{},{p},{qv},{b}", m + 1);
    }
    out
}

fn parse_field<T: std::str::FromStr>(
    field: Option<&str>,
    line: usize,
    what: &str,
    path: &Path,
) -> Result<T, CliError> {
    field
        .map(str::trim)
        .and_then(|s| s.parse::<T>().ok())
        .ok_or_else(|| {
            CliError::Runtime(format!(
                "{}: line {line}: expected {what}",
                path.display()
            ))
        })
}

fn read_rows(path: &Path) -> Result<Vec<(usize, String)>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Runtime(format!("cannot read {}: {e}", path.display())))?;
    let mut rows = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        // A leading non-numeric field on the first kept line is a header.
        if rows.is_empty()
            && line
                .split(',')
                .next()
                .is_some_and(|f| f.trim().parse::<usize>().is_err())
        {
            continue;
        }
        rows.push((idx + 1, line.to_string()));
    }
    Ok(rows)
}

/// Read a `node,label` CSV (optional header) into pairs.
pub fn read_labels_csv(path: &Path) -> Result<Vec<(usize, usize)>, CliError> {
    let mut out = Vec::new();
    for (lineno, line) in read_rows(path)? {
        let mut fields = line.split(',');
        let node = parse_field(fields.next(), lineno, "a node id", path)?;
        let label = parse_field(fields.next(), lineno, "a label", path)?;
        out.push((node, label));
    }
    Ok(out)
}

/// Read a `node,pi_1,..,pi_k` CSV (optional header) into rows.
pub fn read_memberships_csv(path: &Path) -> Result<Vec<(usize, Vec<f64>)>, CliError> {
    let mut out = Vec::new();
    for (lineno, line) in read_rows(path)? {
        let mut fields = line.split(',');
        let node = parse_field(fields.next(), lineno, "a node id", path)?;
        let mut pi = Vec::new();
        for f in fields {
            pi.push(parse_field(Some(f), lineno, "a weight", path)?);
        }
        if pi.is_empty() {
            return Err(CliError::Runtime(format!(
                "{}: line {lineno}: row has no weights",
                path.display()
            )));
        }
        out.push((node, pi));
    }
    Ok(out)
}

/// Read a `citing,cited[,count]` CSV (optional header). Counts must be given
/// on all rows or none.
pub fn read_citations_csv(
    path: &Path,
) -> Result<(Vec<(usize, usize)>, Option<Vec<u64>>), CliError> {
    let mut pairs = Vec::new();
    let mut counts = Vec::new();
    let mut with_count = Option::None;
    for (lineno, line) in read_rows(path)? {
        let mut fields = line.split(',');
        let citing = parse_field(fields.next(), lineno, "a citing doc id", path)?;
        let cited = parse_field(fields.next(), lineno, "a cited doc id", path)?;
        let count_field = fields.next();
        let has = count_field.is_some();
        if *with_count.get_or_insert(has) != has {
            return Err(CliError::Runtime(format!(
                "{}: line {lineno}: count column present on some rows but not all",
                path.display()
            )));
        }
        if let Some(c) = count_field {
            counts.push(parse_field(Some(c), lineno, "a count", path)?);
        }
        pairs.push((citing, cited));
    }
    let counts = if with_count == Some(true) {
        Some(counts)
    } else {
        Option::None
    };
    Ok((pairs, counts))
}
