//! Fit traces as CSV. The first line is a comment echoing the weights.

use std::io::Write;
use std::path::Path;

use crate::losses::{LossReport, LossWeights};
use crate::Result;

pub const HEADER: &str = "iteration,rgb,jaw,normal,albedo,tv,total";

pub fn write_trace(mut out: impl Write, weights: &LossWeights, trace: &[LossReport]) -> Result<()> {
    writeln!(
        out,
        "# weights jaw={} lambda1={} normal={} albedo={} tv={}",
        weights.jaw, weights.lambda1, weights.normal, weights.albedo, weights.tv
    )?;
    writeln!(out, "{HEADER}")?;
    for (i, r) in trace.iter().enumerate() {
        writeln!(
            out,
            "{i},{},{},{},{},{},{}",
            r.rgb, r.jaw, r.normal, r.albedo, r.tv, r.total
        )?;
    }
    Ok(())
}

pub fn save_trace(
    path: impl AsRef<Path>,
    weights: &LossWeights,
    trace: &[LossReport],
) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_trace(&mut f, weights, trace)?;
    Ok(f.flush()?)
}
