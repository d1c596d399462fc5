//! CSV and JSON artifacts. CSV files have a header row, `.` decimals, `\n`
//! line endings and no quoting; floats use the shortest round-trip form.

use std::fmt::Write as _;
use std::path::Path;

use crate::cascade::{CascadeMean, TransitionHistogram};
use crate::error::Result;
use crate::induced::X_DENSITY_MASS;
use crate::limits::{CorrelationEstimate, TailReport, VarianceGrowth};

fn table(header: &str, rows: impl IntoIterator<Item = String>) -> String {
    let mut out = String::with_capacity(4096);
    out.push_str(header);
    out.push('\n');
    for row in rows {
        out.push_str(&row);
        out.push('\n');
    }
    out
}

pub fn clt_csv(values: &[f64]) -> String {
    table(
        "sample_index,value",
        values.iter().enumerate().map(|(i, v)| format!("{i},{v}")),
    )
}

pub fn variance_csv(vg: &VarianceGrowth) -> String {
    table(
        "n,var,var_over_n",
        vg.points
            .iter()
            .map(|p| format!("{},{},{}", p.n, p.var, p.var_over_n)),
    )
}

/// One row per `n` up to `max_n`; `prob` and `theory` are normalized
/// probabilities, `theory` being `ell^2 / (pi n^3)` over the density mass.
pub fn tails_csv(report: &TailReport, max_n: u64) -> String {
    let k = report.return_time.theory / X_DENSITY_MASS;
    table(
        "n,count,prob,theory",
        (1..=max_n).map(|n| {
            let count = report.counts.get(&n).copied().unwrap_or(0);
            format!("{n},{count},{},{}", report.prob(n), k / (n as f64).powi(3))
        }),
    )
}

pub fn correlations_csv(est: &[CorrelationEstimate]) -> String {
    table(
        "n,estimate,ci_lo,ci_hi,n_times_estimate",
        est.iter().map(|e| {
            format!(
                "{},{},{},{},{}",
                e.n, e.estimate, e.ci_lo, e.ci_hi, e.n_times_estimate
            )
        }),
    )
}

/// Rows for every `i` in `[1, 3n + n/3]` that was observed or lies in the
/// theoretical support `[n/3, 3n]`.
pub fn transitions_csv(hists: &[TransitionHistogram]) -> String {
    let mut rows = Vec::new();
    for h in hists {
        let lo = (h.n as f64 / 3.0).ceil() as u64;
        let hi = 3 * h.n;
        let top = h.counts.keys().next_back().copied().unwrap_or(hi).max(hi);
        for i in 1..=top {
            let inside = (lo..=hi).contains(&i);
            if !inside && !h.counts.contains_key(&i) {
                continue;
            }
            let theory = if inside { h.theory(i) } else { 0.0 };
            rows.push(format!("{},{i},{},{theory}", h.n, h.prob(i)));
        }
    }
    table("n,i,empirical_p,theory_p", rows)
}

pub fn cascade_csv(means: &[CascadeMean]) -> String {
    table(
        "n,mean_ratio,ci_lo,ci_hi,samples",
        means.iter().map(|m| {
            format!(
                "{},{},{},{},{}",
                m.n, m.mean_ratio, m.ci_lo, m.ci_hi, m.samples
            )
        }),
    )
}

/// Writes `contents` to `dir/name`, creating `dir` if needed.
pub fn write_artifact(dir: &Path, name: &str, contents: &str) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(name), contents)?;
    Ok(())
}

/// Pretty JSON with a trailing newline.
pub fn to_json(value: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("JSON values always serialize");
    let _ = writeln!(s);
    s
}
