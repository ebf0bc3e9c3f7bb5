//! CSV output. Every file starts with one `#` comment line naming the build,
//! seed and replication count; floats use the shortest representation that
//! round-trips.

use std::io::Write;

use crate::dp::CalibrationRow;
use crate::error::Result;
use crate::procedures::TreatmentQuality;

use super::{EvalReport, FrontierPoint};

/// Run-level metadata for the comment line.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CsvHeader {
    pub seed: Option<u64>,
    pub reps: Option<u64>,
}

impl CsvHeader {
    pub fn new(seed: u64, reps: u64) -> Self {
        Self {
            seed: Some(seed),
            reps: Some(reps),
        }
    }

    fn write(&self, out: &mut impl Write) -> std::io::Result<()> {
        write!(
            out,
            "# change-accel {} ({})",
            crate::VERSION,
            crate::GIT_DESCRIBE
        )?;
        if let Some(seed) = self.seed {
            write!(out, " seed={seed}")?;
        }
        if let Some(reps) = self.reps {
            write!(out, " reps={reps}")?;
        }
        writeln!(out)
    }
}

fn num(x: f64) -> String {
    format!("{x:?}")
}

fn write_rows<W: Write>(
    out: &mut W,
    header: &CsvHeader,
    columns: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<()> {
    header.write(out)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(columns)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_table2_csv<W: Write>(
    out: &mut W,
    header: &CsvHeader,
    reports: &[EvalReport],
) -> Result<()> {
    write_rows(
        out,
        header,
        &[
            "procedure",
            "alpha",
            "err",
            "err_se",
            "err_indicator",
            "ess",
            "ess_se",
            "mean_theta",
            "mean_delay",
            "e_n",
            "reps",
            "seed",
        ],
        reports.iter().map(|r| {
            vec![
                r.procedure.clone(),
                r.alpha.map(num).unwrap_or_default(),
                num(r.err.mean),
                num(r.err.se),
                num(r.err_indicator.mean),
                num(r.ess.mean),
                num(r.ess.se),
                num(r.mean_theta),
                num(r.mean_delay),
                r.cycles.map(|c| num(c.mean.mean)).unwrap_or_default(),
                r.reps.to_string(),
                r.seed.to_string(),
            ]
        }),
    )
}

pub fn write_frontier_csv<W: Write>(
    out: &mut W,
    header: &CsvHeader,
    points: &[FrontierPoint],
) -> Result<()> {
    write_rows(
        out,
        header,
        &[
            "procedure",
            "threshold_params",
            "err",
            "neg_log10_err",
            "ess",
            "ess_normalized",
            "reps",
            "seed",
        ],
        points.iter().map(|p| {
            vec![
                p.procedure.clone(),
                p.threshold_params.clone(),
                num(p.err.mean),
                num(p.neg_log10_err()),
                num(p.ess.mean),
                num(p.ess_normalized()),
                p.reps.to_string(),
                p.seed.to_string(),
            ]
        }),
    )
}

pub fn write_calibration_csv<W: Write>(
    out: &mut W,
    header: &CsvHeader,
    rows: &[CalibrationRow],
) -> Result<()> {
    write_rows(
        out,
        header,
        &[
            "c",
            "b_c",
            "err_estimate",
            "err_se",
            "ess",
            "ess_se",
            "reps",
            "seed",
        ],
        rows.iter().map(|r| {
            vec![
                num(r.cost),
                num(r.threshold),
                num(r.err.mean),
                num(r.err.se),
                num(r.ess.mean),
                num(r.ess.se),
                r.reps.to_string(),
                r.seed.to_string(),
            ]
        }),
    )
}

/// One row per treatment (1-based); `lambda_star` repeats on every row.
pub fn write_metrics_csv<W: Write>(out: &mut W, quality: &TreatmentQuality) -> Result<()> {
    write_rows(
        out,
        &CsvHeader {
            seed: None,
            reps: None,
        },
        &[
            "treatment",
            "i",
            "j",
            "d",
            "lambda",
            "zeta",
            "p",
            "lambda_star",
        ],
        quality.treatments.iter().enumerate().map(|(x, m)| {
            vec![
                (x + 1).to_string(),
                num(m.kl.post_pre),
                num(m.kl.pre_post),
                num(m.power),
                num(m.mean_change_time),
                num(m.min_transition),
                num(m.transition),
                num(quality.fastest_change_time),
            ]
        }),
    )
}
