//! CSV emission for fields and reports.
//!
//! Every writer takes a slice of provenance lines that are prepended as
//! `#`-comments, so batch runs can stamp outputs with their config hash and
//! seed.  Numbers are written with Rust's shortest round-trip formatting,
//! which is deterministic.

use std::io::Write;

use crate::error::{LabError, Result};
use crate::grid::Field;
use crate::quadrature::RatioReport;
use crate::refined::RefinedResult;
use crate::whitney::PartitionReport;

fn io_err(e: std::io::Error) -> LabError {
    LabError::InvalidData(format!("write failed: {e}"))
}

fn preamble<W: Write>(w: &mut W, provenance: &[String]) -> Result<()> {
    for line in provenance {
        writeln!(w, "# {line}").map_err(io_err)?;
    }
    Ok(())
}

/// Field dump: `x,re,im` rows; the header records the grid.
pub fn write_field_csv<W: Write>(w: &mut W, f: &Field, provenance: &[String]) -> Result<()> {
    preamble(w, provenance)?;
    let g = f.grid();
    writeln!(w, "# grid: center={} dx={} n={}", g.center(), g.spacing(), g.count()).map_err(io_err)?;
    writeln!(w, "x,re,im").map_err(io_err)?;
    for (m, v) in f.values().iter().enumerate() {
        writeln!(w, "{},{},{}", g.point(m), v.re, v.im).map_err(io_err)?;
    }
    Ok(())
}

/// Quotient report row: value, norm6, norm2, tail_bound, T, steps, n, dx, mu.
pub fn write_ratio_csv<W: Write>(w: &mut W, r: &RatioReport, provenance: &[String]) -> Result<()> {
    preamble(w, provenance)?;
    writeln!(w, "value,norm6,norm2,tail_bound,T,steps,n,dx,mu").map_err(io_err)?;
    writeln!(
        w,
        "{},{},{},{},{},{},{},{},{}",
        r.value, r.norm6, r.norm2, r.tail_bound, r.t_max, r.steps, r.n, r.dx, r.mu
    )
    .map_err(io_err)?;
    Ok(())
}

/// Tiling report row: samples, violations, max_multiplicity, range, seed.
pub fn write_partition_csv<W: Write>(
    w: &mut W,
    r: &PartitionReport,
    provenance: &[String],
) -> Result<()> {
    preamble(w, provenance)?;
    writeln!(w, "samples,violations,max_multiplicity,range_lo,range_hi,seed").map_err(io_err)?;
    writeln!(
        w,
        "{},{},{},{},{},{}",
        r.samples, r.violations, r.max_multiplicity, r.range.0, r.range.1, r.seed
    )
    .map_err(io_err)?;
    Ok(())
}

/// Refined-functional row: value, tau_left, tau_right, p.
pub fn write_refined_csv<W: Write>(
    w: &mut W,
    r: &RefinedResult,
    provenance: &[String],
) -> Result<()> {
    preamble(w, provenance)?;
    writeln!(w, "value,tau_left,tau_right,p").map_err(io_err)?;
    writeln!(
        w,
        "{},{},{},{}",
        r.value, r.best_interval.0, r.best_interval.1, r.p
    )
    .map_err(io_err)?;
    Ok(())
}

/// Generic table writer: a header row plus one comma-joined row per record.
pub fn write_table_csv<W: Write>(
    w: &mut W,
    header: &str,
    rows: &[Vec<String>],
    provenance: &[String],
) -> Result<()> {
    preamble(w, provenance)?;
    writeln!(w, "{header}").map_err(io_err)?;
    for row in rows {
        writeln!(w, "{}", row.join(",")).map_err(io_err)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_grid, sample};
    use num_complex::Complex64;

    #[test]
    fn field_csv_shape() {
        let g = make_grid(1.0, 8.0, 4).unwrap();
        let f = sample(|x| Complex64::new(x, -x), &g).unwrap();
        let mut buf = Vec::new();
        write_field_csv(&mut buf, &f, &["provenance: test".into()]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# provenance: test");
        assert!(lines[1].starts_with("# grid: center=1 dx=2 n=4"));
        assert_eq!(lines[2], "x,re,im");
        assert_eq!(lines.len(), 7);
        assert_eq!(lines[3], "-3,-3,3");
    }
}
