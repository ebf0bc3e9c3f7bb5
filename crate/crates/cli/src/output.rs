//! Human-readable tables on stdout. The CSV files carry full precision;
//! these are rounded for reading.

use change_accel::dp::CalibrationRow;
use change_accel::evaluation::{EvalReport, FrontierPoint};
use change_accel::procedures::TreatmentQuality;

fn print_table(header: &[&str], rows: &[Vec<String>]) {
    let mut width: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in rows {
        for (w, cell) in width.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let line = |cells: Vec<&str>| {
        let padded: Vec<String> = cells
            .iter()
            .zip(&width)
            .map(|(c, w)| format!("{c:>w$}"))
            .collect();
        println!("{}", padded.join("  ").trim_end());
    };
    line(header.to_vec());
    for row in rows {
        line(row.iter().map(String::as_str).collect());
    }
}

fn est(mean: f64, se: f64) -> String {
    format!("{mean:.3e} ({se:.1e})")
}

pub fn print_metrics(q: &TreatmentQuality) {
    let rows: Vec<Vec<String>> = q
        .treatments
        .iter()
        .enumerate()
        .map(|(x, m)| {
            vec![
                (x + 1).to_string(),
                format!("{:.4}", m.kl.post_pre),
                format!("{:.4}", m.kl.pre_post),
                format!("{:.4}", m.power),
                format!("{:.4}", m.mean_change_time),
                format!("{:.4}", m.min_transition),
            ]
        })
        .collect();
    print_table(&["treatment", "I", "J", "D", "lambda", "zeta"], &rows);
    println!("lambda_* = {:.4}", q.fastest_change_time);
}

pub fn print_reports(reports: &[EvalReport]) {
    let rows: Vec<Vec<String>> = reports
        .iter()
        .map(|r| {
            vec![
                r.procedure.clone(),
                r.alpha
                    .map(|a| format!("{a:e}"))
                    .unwrap_or_else(|| "-".into()),
                est(r.err.mean, r.err.se),
                format!("{:.2} ({:.2})", r.ess.mean, r.ess.se),
                r.cycles
                    .map(|c| format!("{:.3}", c.mean.mean))
                    .unwrap_or_else(|| "-".into()),
                format!("{:.1?}", r.wall_time),
            ]
        })
        .collect();
    print_table(
        &["procedure", "alpha", "Err (se)", "ESS (se)", "E[N]", "time"],
        &rows,
    );
}

pub fn print_calibration(selected: &[(f64, CalibrationRow)]) {
    let rows: Vec<Vec<String>> = selected
        .iter()
        .map(|(a, r)| {
            vec![
                format!("{a:e}"),
                format!("{:e}", r.cost),
                format!("{:.8}", r.threshold),
                est(r.err.mean, r.err.se),
                format!("{:.2} ({:.2})", r.ess.mean, r.ess.se),
            ]
        })
        .collect();
    print_table(&["alpha", "c", "b_c", "Err (se)", "ESS (se)"], &rows);
}

pub fn print_frontier(points: &[FrontierPoint]) {
    let rows: Vec<Vec<String>> = points
        .iter()
        .map(|p| {
            vec![
                p.procedure.clone(),
                format!("{:.3e}", p.err.mean),
                format!("{:.3}", p.neg_log10_err()),
                format!("{:.2}", p.ess.mean),
                format!("{:.4}", p.ess_normalized()),
                format!("{:.2}", p.lower_bound),
            ]
        })
        .collect();
    print_table(
        &["procedure", "Err", "|log10 Err|", "ESS", "ESS / LB", "LB"],
        &rows,
    );
}
