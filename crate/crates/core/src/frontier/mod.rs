//! Pareto-optimal set, GPR frontier surface, headroom and convex-hull comparison.

mod gpr;
mod headroom;
mod hull;
mod pareto;
mod report;

use std::io::Write;

pub use gpr::{fit_frontier, Axis, FrontierConfig, FrontierModel, Kernel, KernelBounds, Lattice, Overshoot};
pub use headroom::{headroom, headroom_report, headroom_to, HeadroomMode, HeadroomReport};
pub use hull::{convex_hull_frontier, Facet, HullResult};
pub use pareto::{dominates, pareto_set, ParetoResult};
pub use report::{pareto_report, FrontierSummary, HeadroomSummary, HullSummary, RunSummary};

use crate::error::Result;
use crate::ingest::table::fmt_f64;

pub fn write_pareto_table<W: Write>(writer: W, result: &ParetoResult) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["row", "is_pareto"])?;
    for (i, p) in result.is_pareto.iter().enumerate() {
        w.write_record([i.to_string(), if *p { "1" } else { "0" }.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Lattice file: the two inputs, the raw prediction, the prediction clipped to `[0, 1]`
/// for plotting, and the latent standard deviation.
pub fn write_lattice<W: Write>(writer: W, model: &FrontierModel) -> Result<()> {
    let names = ["S", "E", "I"];
    let [a, b] = model.dependent_axis.inputs();
    let dep = model.dependent_axis.name();
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([names[a], names[b], dep, &format!("{dep}_clipped"), "std"])?;
    let l = &model.lattice;
    for ((x, m), s) in l.inputs.iter().zip(&l.mean).zip(&l.std) {
        w.write_record([fmt_f64(x[0]), fmt_f64(x[1]), fmt_f64(*m), fmt_f64(m.clamp(0.0, 1.0)), fmt_f64(*s)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_headroom_table<W: Write>(writer: W, report: &HeadroomReport) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["row", "headroom_S", "headroom_E", "headroom_I"])?;
    for (i, h) in report.values.iter().enumerate() {
        w.write_record([i.to_string(), fmt_f64(h[0]), fmt_f64(h[1]), fmt_f64(h[2])])?;
    }
    w.flush()?;
    Ok(())
}

/// One line per hull facet. `rows[k]` maps hull vertex `k` back to its objectives-table row.
pub fn write_hull_facets<W: Write>(writer: W, hull: &HullResult, points: &[[f64; 3]], rows: &[usize]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header: Vec<String> = vec!["facet".into(), "row0".into(), "row1".into(), "row2".into()];
    for v in 0..3 {
        header.extend(["S", "E", "I"].map(|c| format!("{c}{v}")));
    }
    header.extend(["nS", "nE", "nI", "upper"].map(String::from));
    w.write_record(&header)?;
    for (j, f) in hull.facets.iter().enumerate() {
        let mut rec: Vec<String> = vec![j.to_string()];
        rec.extend(f.vertices.iter().map(|&v| rows[v].to_string()));
        for &v in &f.vertices {
            rec.extend(points[v].iter().map(|c| fmt_f64(*c)));
        }
        rec.extend(f.normal.iter().map(|c| fmt_f64(*c)));
        rec.push(if hull.upper.contains(&j) { "1" } else { "0" }.into());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_summary<W: Write>(writer: W, summary: &RunSummary) -> Result<()> {
    serde_json::to_writer_pretty(writer, summary)?;
    Ok(())
}
