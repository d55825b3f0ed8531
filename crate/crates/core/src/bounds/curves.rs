use std::fmt::Write as _;
use std::str::FromStr;

use super::{h_p_chord, h_p_tangent, qrac_lower_bound, uncertainty_lower_bound, uncertainty_upper_bound};
use crate::error::{Error, Result};
use crate::linalg::{h_p, SchattenP};
use crate::povm::format_f64;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CurveKind {
    /// `(c̄, f(p, c̄, d))` over `[1/d, 1/√d]`.
    Qrac,
    /// `(τ, −log₂ τ, lower, upper)` over `[1/d, 1]`.
    Uncertainty,
    /// `(c, h_p(c), tangent, chord)` over `[0, 1]` with envelopes at `c̄`.
    HP { c_bar: f64 },
}

impl FromStr for CurveKind {
    type Err = Error;

    /// `qrac`, `uncertainty`, `h_p`/`hp` (envelopes at `c̄ = 1/2`).
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "qrac" => Ok(CurveKind::Qrac),
            "uncertainty" => Ok(CurveKind::Uncertainty),
            "h_p" | "hp" | "h-p" => Ok(CurveKind::HP { c_bar: 0.5 }),
            other => Err(Error::Parse(format!("unknown curve kind {other:?}"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct CurveTable {
    pub params: Vec<(String, String)>,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
}

impl CurveTable {
    /// CSV with a `#` parameter line, a column header and LF line endings.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("#");
        for (k, v) in &self.params {
            let _ = write!(out, " {k}={v}");
        }
        out.push('\n');
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&x| format_f64(x)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

fn grid(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    let step = (hi - lo) / (n - 1) as f64;
    (0..n).map(move |i| if i + 1 == n { hi } else { lo + step * i as f64 })
}

/// Evaluates a curve on `grid_n` evenly spaced points, endpoints included.
pub fn emit_curves(kind: CurveKind, d: usize, p: SchattenP, grid_n: usize) -> Result<CurveTable> {
    if grid_n < 2 {
        return Err(Error::Domain(format!("grid needs at least 2 points, got {grid_n}")));
    }
    if d < 2 {
        return Err(Error::Domain(format!("dimension must be at least 2, got {d}")));
    }
    let df = d as f64;
    let mut params = vec![
        ("kind".to_string(), String::new()),
        ("d".to_string(), d.to_string()),
        ("p".to_string(), p.to_string()),
    ];
    let (name, columns, rows) = match kind {
        CurveKind::Qrac => {
            let rows = grid(1.0 / df, 1.0 / df.sqrt(), grid_n)
                .map(|c| Ok(vec![c, qrac_lower_bound(p, c, d)?]))
                .collect::<Result<Vec<_>>>()?;
            ("qrac", vec!["c_bar", "f"], rows)
        }
        CurveKind::Uncertainty => {
            params.push(("log_base".to_string(), "2".to_string()));
            let rows = grid(1.0 / df, 1.0, grid_n)
                .map(|t| {
                    Ok(vec![t, -t.log2(), uncertainty_lower_bound(t, d, p)?, uncertainty_upper_bound(t, d, p)?])
                })
                .collect::<Result<Vec<_>>>()?;
            ("uncertainty", vec!["tau", "entropy_bound", "lower", "upper"], rows)
        }
        CurveKind::HP { c_bar } => {
            params.push(("c_bar".to_string(), format_f64(c_bar)));
            let rows = grid(0.0, 1.0, grid_n)
                .map(|c| Ok(vec![c, h_p(c, p)?, h_p_tangent(c, c_bar, p)?, h_p_chord(c, c_bar, p)?]))
                .collect::<Result<Vec<_>>>()?;
            ("h_p", vec!["c", "h_p", "tangent", "chord"], rows)
        }
    };
    params[0].1 = name.to_string();
    Ok(CurveTable { params, columns, rows })
}
