//! Tabulated stage-time curves in scaled units.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use crate::error::{DiveError, Result};
use crate::{gen_planner, sym_planner};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    /// T̂₂ and φ₂ of the symmetric rotor-on stage.
    T2,
    /// T̂₁ against s, one column per twist count.
    T1,
    /// T̂_tot against s (independent of n for the symmetric body).
    Ttot,
    GeneralT1,
    GeneralTtot,
}

impl FromStr for Figure {
    type Err = DiveError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "t2" => Figure::T2,
            "t1" => Figure::T1,
            "ttot" => Figure::Ttot,
            "general-t1" => Figure::GeneralT1,
            "general-ttot" => Figure::GeneralTtot,
            other => {
                return Err(DiveError::InvalidParams(format!(
                    "unknown figure '{other}' (expected t2, t1, ttot, general-t1 or general-ttot)"
                )))
            }
        })
    }
}

impl fmt::Display for Figure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Figure::T2 => "t2",
            Figure::T1 => "t1",
            Figure::Ttot => "ttot",
            Figure::GeneralT1 => "general-t1",
            Figure::GeneralTtot => "general-ttot",
        })
    }
}

impl Figure {
    pub fn is_general(&self) -> bool {
        matches!(self, Figure::GeneralT1 | Figure::GeneralTtot)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveSpec {
    pub figure: Figure,
    pub gamma: f64,
    pub m: f64,
    pub n_list: Vec<f64>,
    /// Required by the general figures, ignored otherwise.
    pub delta: Option<f64>,
    pub s_range: (f64, f64),
    pub samples: usize,
}

impl CurveSpec {
    pub fn new(figure: Figure) -> Self {
        Self {
            figure,
            gamma: 19.0,
            m: 1.5,
            n_list: vec![1.0, 2.0, 3.0, 4.0, 5.0],
            delta: None,
            s_range: (0.001, 0.6),
            samples: 120,
        }
    }

    fn validate(&self) -> Result<()> {
        let (lo, hi) = self.s_range;
        if !(0.0 < lo && lo < hi && hi < 1.0) {
            return Err(DiveError::InvalidParams(format!("s range ({lo}, {hi}) must satisfy 0 < lo < hi < 1")));
        }
        if self.samples < 2 {
            return Err(DiveError::InvalidParams("at least 2 samples are needed".into()));
        }
        if !(self.gamma > 0.0) {
            return Err(DiveError::InvalidParams(format!("gamma = {} must be positive", self.gamma)));
        }
        if self.figure.is_general() {
            match self.delta {
                Some(d) if d < 0.0 && d > -1.0 => {}
                Some(d) => return Err(DiveError::InvalidParams(format!("delta = {d} must lie in (-1, 0)"))),
                None => return Err(DiveError::InvalidParams(format!("figure {} needs --delta", self.figure))),
            }
        }
        if matches!(self.figure, Figure::T1 | Figure::GeneralT1 | Figure::GeneralTtot) && self.n_list.is_empty() {
            return Err(DiveError::InvalidParams("the n list is empty".into()));
        }
        Ok(())
    }
}

/// One marked point per twist count: the smallest admissible tilt and the
/// total time there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinimalTilt {
    pub n: f64,
    pub s: f64,
    pub that_tot: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveTable {
    pub header: Vec<String>,
    pub rows: Vec<(f64, Vec<Option<f64>>)>,
    /// Cells that could not be evaluated, one line each.
    pub comments: Vec<String>,
    pub dots: Vec<MinimalTilt>,
}

fn cell(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

impl CurveTable {
    pub fn column(&self, name: &str) -> Option<Vec<(f64, Option<f64>)>> {
        let j = self.header.iter().position(|h| h == name)?.checked_sub(1)?;
        Some(self.rows.iter().map(|(s, v)| (*s, v[j])).collect())
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for c in &self.comments {
            writeln!(w, "# {c}")?;
        }
        writeln!(w, "{}", self.header.join(","))?;
        for (s, vals) in &self.rows {
            let cells: Vec<String> = vals.iter().map(|v| cell(*v)).collect();
            writeln!(w, "{s},{}", cells.join(","))?;
        }
        if !self.dots.is_empty() {
            writeln!(w)?;
            writeln!(w, "# minimal tilt per twist count")?;
            writeln!(w, "n,{}_min,ttot_at_min", self.header[0])?;
            for d in &self.dots {
                writeln!(w, "{},{},{}", d.n, d.s, d.that_tot)?;
            }
        }
        Ok(())
    }
}

fn n_label(n: f64) -> String {
    format!("n={n}")
}

/// Tabulates the requested figure on a uniform grid.
pub fn curves(spec: &CurveSpec) -> Result<CurveTable> {
    spec.validate()?;
    let (lo, hi) = spec.s_range;
    let grid: Vec<f64> = (0..spec.samples)
        .map(|i| if i + 1 == spec.samples { hi } else { lo + (hi - lo) * i as f64 / (spec.samples - 1) as f64 })
        .collect();
    let (gamma, m) = (spec.gamma, spec.m);
    let delta = spec.delta.unwrap_or(0.0);
    let abscissa = if spec.figure.is_general() { "s_minus" } else { "s" };
    let mut header = vec![abscissa.to_string()];
    type Column<'a> = Box<dyn Fn(f64) -> Result<f64> + 'a>;
    let mut columns: Vec<Column> = Vec::new();
    match spec.figure {
        Figure::T2 => {
            header.extend(["t2_hat".to_string(), "phi2".to_string()]);
            columns.push(Box::new(move |s| sym_planner::t2_hat(s, gamma)));
            columns.push(Box::new(move |s| sym_planner::phi2(s, gamma)));
        }
        Figure::Ttot => {
            header.push("ttot_hat".to_string());
            columns.push(Box::new(move |s| Ok(2.0 * std::f64::consts::PI * m + 2.0 * sym_planner::t2_minus_phi2(s)?)));
        }
        Figure::T1 => {
            for &n in &spec.n_list {
                header.push(n_label(n));
                columns.push(Box::new(move |s| Ok(sym_planner::stage_times(s, gamma, m, n)?.that1)));
            }
        }
        Figure::GeneralT1 | Figure::GeneralTtot => {
            let nu = delta / gamma;
            let total = spec.figure == Figure::GeneralTtot;
            for &n in &spec.n_list {
                header.push(n_label(n));
                columns.push(Box::new(move |s| {
                    let band = gen_planner::TiltBand::from_s_minus(s, nu)?;
                    let d = crate::dynamics::DimensionlessParams::new(gamma, delta, 0.0);
                    let t = gen_planner::stage_times_general(&band, &d, m, n)?;
                    Ok(if total { t.that_tot } else { t.that1 })
                }));
            }
        }
    }
    let mut comments = Vec::new();
    let rows = grid
        .iter()
        .map(|&s| {
            let vals = columns
                .iter()
                .enumerate()
                .map(|(j, f)| match f(s) {
                    Ok(v) if v.is_finite() => Some(v),
                    Ok(v) => {
                        comments.push(format!("{}={s} {}: value {v}", abscissa, header[j + 1]));
                        None
                    }
                    Err(e) => {
                        comments.push(format!("{}={s} {}: {e}", abscissa, header[j + 1]));
                        None
                    }
                })
                .collect();
            (s, vals)
        })
        .collect();
    let mut dots = Vec::new();
    if spec.figure == Figure::GeneralTtot {
        for &n in &spec.n_list {
            match gen_planner::min_tilt_general(m, n, gamma, delta)
                .and_then(|s| Ok((s, gen_planner::total_time_general(s, m, n, gamma, delta)?)))
            {
                Ok((s, that_tot)) => dots.push(MinimalTilt { n, s, that_tot }),
                Err(e) => comments.push(format!("minimal tilt for n={n}: {e}")),
            }
        }
    }
    Ok(CurveTable { header, rows, comments, dots })
}
