//! CSV tables. Every file starts with a `#` line naming the schema and its
//! version; floats are written with 17 significant digits so that reading
//! them back is bit-exact.
//!
//! | schema              | columns                                        |
//! |---------------------|------------------------------------------------|
//! | `gbsde-nodes v1`    | `step,path_prefix,W,y,z,dC_up,dC_down`         |
//! | `gbsde-sweep v1`    | `alpha,total`                                  |
//! | `gbsde-allocation v1` | `path_prefix,W,eta,xi_star`                  |
//!
//! `z` and the `C` increments are empty on the terminal layer.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{bail, ensure, Context, Result};
use gbsde_core::{Claim, Lattice, Layout, Solution};

pub const NODE_SCHEMA: &str = "# gbsde-nodes v1";
pub const SWEEP_SCHEMA: &str = "# gbsde-sweep v1";
pub const ALLOCATION_SCHEMA: &str = "# gbsde-allocation v1";

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn writer(path: &Path, schema: &str) -> Result<csv::Writer<BufWriter<File>>> {
    let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    let mut out = BufWriter::new(file);
    writeln!(out, "{schema}")?;
    Ok(csv::Writer::from_writer(out))
}

/// One row per node of every step in `steps`.
pub fn write_node_table(path: &Path, sol: &Solution, steps: &[usize]) -> Result<()> {
    let l = sol.lattice();
    let mut w = writer(path, NODE_SCHEMA)?;
    w.write_record(["step", "path_prefix", "W", "y", "z", "dC_up", "dC_down"])?;
    for &step in steps {
        let y = sol.y(step);
        let terminal = step == l.num_steps();
        for (k, &yk) in y.iter().enumerate() {
            let (z, up, down) = if terminal {
                (String::new(), String::new(), String::new())
            } else {
                let (du, dd) = sol.dc(step);
                (fmt_f64(sol.z(step)[k]), fmt_f64(du[k]), fmt_f64(dd[k]))
            };
            w.write_record([
                step.to_string(),
                l.node_label(step, k),
                fmt_f64(l.w(step, k)),
                fmt_f64(yk),
                z,
                up,
                down,
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_sweep(path: &Path, curve: &[(f64, f64)]) -> Result<()> {
    let mut w = writer(path, SWEEP_SCHEMA)?;
    w.write_record(["alpha", "total"])?;
    for &(a, v) in curve {
        w.write_record([fmt_f64(a), fmt_f64(v)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_allocation(path: &Path, lattice: &Lattice, eta: &Claim, xi_star: &Claim) -> Result<()> {
    let n = lattice.num_steps();
    let mut w = writer(path, ALLOCATION_SCHEMA)?;
    w.write_record(["path_prefix", "W", "eta", "xi_star"])?;
    for k in 0..lattice.terminal_len() {
        w.write_record([
            lattice.node_label(n, k),
            fmt_f64(lattice.w(n, k)),
            fmt_f64(eta.value(k)),
            fmt_f64(xi_star.value(k)),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Node index from a label written by [`Lattice::node_label`].
pub fn parse_node_label(label: &str, step: usize, layout: Layout) -> Result<usize> {
    match layout {
        Layout::Recombining => {
            let count: usize = label
                .strip_prefix('u')
                .and_then(|s| s.parse().ok())
                .with_context(|| format!("expected a label like u3, found {label:?}"))?;
            ensure!(count <= step, "label {label} has more up-moves than steps ({step})");
            Ok(count)
        }
        Layout::PathTree if label == "." => {
            ensure!(step == 0, "root label at step {step}");
            Ok(0)
        }
        Layout::PathTree => {
            ensure!(label.len() == step, "label {label:?} does not have {step} moves");
            label.chars().try_fold(0usize, |acc, c| match c {
                '+' => Ok(2 * acc + 1),
                '-' => Ok(2 * acc),
                _ => bail!("unexpected character {c:?} in label {label:?}"),
            })
        }
    }
}

fn schema_reader(path: &Path, schema: &str) -> Result<csv::Reader<std::io::Cursor<String>>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let first = text.lines().next().unwrap_or_default();
    ensure!(first.trim_end() == schema, "expected header line {schema:?}, found {first:?}");
    Ok(csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(std::io::Cursor::new(text)))
}

/// A parsed row of a node table.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeRow {
    pub step: usize,
    pub node: usize,
    pub w: f64,
    pub y: f64,
    pub z: Option<f64>,
    pub dc_up: Option<f64>,
    pub dc_down: Option<f64>,
}

fn field(record: &csv::StringRecord, i: usize, name: &str) -> Result<Option<f64>> {
    let raw = record.get(i).with_context(|| format!("missing column {name}"))?;
    if raw.is_empty() {
        return Ok(None);
    }
    raw.parse().map(Some).with_context(|| format!("column {name}: cannot parse {raw:?}"))
}

pub fn read_node_table(path: &Path, layout: Layout) -> Result<Vec<NodeRow>> {
    let mut r = schema_reader(path, NODE_SCHEMA)?;
    let header = r.headers()?.clone();
    ensure!(
        header.iter().eq(["step", "path_prefix", "W", "y", "z", "dC_up", "dC_down"]),
        "unexpected columns {header:?}"
    );
    let mut rows = Vec::new();
    for (line, record) in r.records().enumerate() {
        let record = record?;
        let ctx = || format!("data row {}", line + 1);
        let step: usize = record[0].parse().with_context(ctx)?;
        let node = parse_node_label(&record[1], step, layout).with_context(ctx)?;
        let w = field(&record, 2, "W").with_context(ctx)?.with_context(ctx)?;
        let y = field(&record, 3, "y").with_context(ctx)?.with_context(ctx)?;
        rows.push(NodeRow {
            step,
            node,
            w,
            y,
            z: field(&record, 4, "z").with_context(ctx)?,
            dc_up: field(&record, 5, "dC_up").with_context(ctx)?,
            dc_down: field(&record, 6, "dC_down").with_context(ctx)?,
        });
    }
    Ok(rows)
}

/// Terminal `y` values of a node table, in node order, as a claim on `lattice`.
pub fn read_claim_table(path: &Path, lattice: &Lattice) -> Result<Vec<f64>> {
    let n = lattice.num_steps();
    let rows = read_node_table(path, lattice.layout())?;
    let mut values = vec![None; lattice.terminal_len()];
    for row in rows.iter().filter(|r| r.step == n) {
        ensure!(row.node < values.len(), "node {} outside the terminal layer", row.node);
        ensure!(values[row.node].replace(row.y).is_none(), "duplicate terminal node {}", row.node);
    }
    values
        .into_iter()
        .enumerate()
        .map(|(k, v)| v.with_context(|| format!("terminal node {} (step {n}) missing", lattice.node_label(n, k))))
        .collect()
}

/// The `(alpha, total)` curve of a sweep file.
pub fn read_sweep(path: &Path) -> Result<Vec<(f64, f64)>> {
    let mut r = schema_reader(path, SWEEP_SCHEMA)?;
    r.records()
        .map(|rec| {
            let rec = rec?;
            Ok((rec[0].parse()?, rec[1].parse()?))
        })
        .collect()
}
