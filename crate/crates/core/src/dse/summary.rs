use std::io::Write;

use super::config::SweepPoint;
use super::rows::ResultRow;
use crate::error::{Error, Result};
use crate::xbar::Resolution;

/// Accuracy drop (absolute) still counted as "matching the baseline".
pub const DROP_TOLERANCE: f64 = 0.01;

/// Aggregate over the trials of one point. Statistics cover successful
/// trials only and are `None` when every trial failed.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSummary {
    pub point: SweepPoint,
    pub trials: usize,
    pub failed: usize,
    pub mean: Option<f64>,
    pub min: Option<f64>,
    pub max: Option<f64>,
}

/// For one curve (everything fixed except α): the widest contiguous run of
/// α grid values whose mean accuracy stays within [`DROP_TOLERANCE`] of the
/// baseline.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaWindow {
    /// Any point of the curve; its α is meaningless here.
    pub curve: SweepPoint,
    pub baseline: f64,
    /// `(alpha_lo, alpha_hi)`, or `None` if no α qualifies.
    pub interval: Option<(f64, f64)>,
    /// Grid values inside the interval.
    pub alphas: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub points: Vec<PointSummary>,
    pub windows: Vec<AlphaWindow>,
}

fn same_curve(a: &SweepPoint, b: &SweepPoint) -> bool {
    a.mapping == b.mapping
        && a.adc_bits == b.adc_bits
        && a.i_hrs.to_bits() == b.i_hrs.to_bits()
        && a.i_lrs.to_bits() == b.i_lrs.to_bits()
        && a.sigma_lrs.to_bits() == b.sigma_lrs.to_bits()
        && a.sigma_hrs.to_bits() == b.sigma_hrs.to_bits()
}

fn same_device(a: &SweepPoint, b: &SweepPoint) -> bool {
    same_curve(
        a,
        &SweepPoint {
            adc_bits: a.adc_bits,
            ..*b
        },
    )
}

/// Per-point statistics plus α windows.
///
/// The baseline is `baseline` when given (e.g. the exact host accuracy);
/// otherwise each curve uses the mean of its own `adc_bits = inf, alpha = 1`
/// point and curves without one get no window.
pub fn summarize(rows: &[ResultRow], baseline: Option<f64>) -> Result<Summary> {
    if rows.is_empty() {
        return Err(Error::EmptyInput("no result rows to summarize".into()));
    }
    let mut ordered: Vec<&ResultRow> = rows.iter().collect();
    ordered.sort_by_key(|r| (r.point.index, r.trial));
    let mut groups: Vec<(SweepPoint, usize, Vec<f64>)> = Vec::new();
    for row in ordered {
        match groups.last_mut() {
            Some(g) if g.0.index == row.point.index => g.1 += 1,
            _ => groups.push((row.point, 1, Vec::new())),
        }
        if let Some(a) = row.accuracy {
            groups.last_mut().expect("pushed above").2.push(a);
        }
    }
    let points: Vec<PointSummary> = groups
        .into_iter()
        .map(|(point, trials, accs)| {
            let n = accs.len();
            PointSummary {
                point,
                trials,
                failed: trials - n,
                mean: (n > 0).then(|| accs.iter().sum::<f64>() / n as f64),
                min: accs.iter().copied().reduce(f64::min),
                max: accs.iter().copied().reduce(f64::max),
            }
        })
        .collect();

    let mut windows = Vec::new();
    let mut done = vec![false; points.len()];
    for i in 0..points.len() {
        if done[i] {
            continue;
        }
        let head = points[i].point;
        let mut curve: Vec<&PointSummary> = Vec::new();
        for (j, p) in points.iter().enumerate() {
            if same_curve(&head, &p.point) {
                done[j] = true;
                curve.push(p);
            }
        }
        let base = baseline.or_else(|| {
            points
                .iter()
                .find(|p| {
                    same_device(&head, &p.point)
                        && p.point.adc_bits == Resolution::Infinite
                        && p.point.alpha == 1.0
                })
                .and_then(|p| p.mean)
        });
        let Some(base) = base else { continue };
        curve.sort_by(|a, b| a.point.alpha.total_cmp(&b.point.alpha));
        let keeps = |p: &PointSummary| p.mean.is_some_and(|m| m >= base - DROP_TOLERANCE - 1e-12);
        let mut best: Option<(f64, f64, usize)> = None;
        let mut k = 0;
        while k < curve.len() {
            if !keeps(curve[k]) {
                k += 1;
                continue;
            }
            let start = k;
            while k + 1 < curve.len() && keeps(curve[k + 1]) {
                k += 1;
            }
            let (lo, hi, n) = (curve[start].point.alpha, curve[k].point.alpha, k - start + 1);
            let wider = best.is_none_or(|(blo, bhi, bn)| (hi - lo, n) > (bhi - blo, bn));
            if wider {
                best = Some((lo, hi, n));
            }
            k += 1;
        }
        windows.push(AlphaWindow {
            curve: head,
            baseline: base,
            interval: best.map(|(lo, hi, _)| (lo, hi)),
            alphas: best.map_or(0, |b| b.2),
        });
    }
    Ok(Summary { points, windows })
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn csv_err(e: impl std::fmt::Display) -> Error {
    Error::Config(format!("writing CSV: {e}"))
}

/// One line per point, then a blank line and one line per α window.
pub fn write_summary_csv<W: Write>(summary: &Summary, out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(out);
    w.write_record([
        "point", "mapping", "adc_bits", "alpha", "sigma_lrs", "sigma_hrs", "i_hrs", "i_lrs",
        "trials", "failed", "mean", "min", "max",
    ])
    .map_err(csv_err)?;
    for s in &summary.points {
        let p = &s.point;
        w.write_record([
            p.index.to_string(),
            p.mapping.name(),
            p.adc_bits.to_string(),
            p.alpha.to_string(),
            p.sigma_lrs.to_string(),
            p.sigma_hrs.to_string(),
            p.i_hrs.to_string(),
            p.i_lrs.to_string(),
            s.trials.to_string(),
            s.failed.to_string(),
            opt(s.mean),
            opt(s.min),
            opt(s.max),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(csv_err)?;
    let mut out = w.into_inner().map_err(csv_err)?;
    writeln!(out).map_err(csv_err)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "mapping", "adc_bits", "sigma_lrs", "sigma_hrs", "i_hrs", "i_lrs", "baseline",
        "alpha_lo", "alpha_hi", "alphas",
    ])
    .map_err(csv_err)?;
    for win in &summary.windows {
        let p = &win.curve;
        w.write_record([
            p.mapping.name(),
            p.adc_bits.to_string(),
            p.sigma_lrs.to_string(),
            p.sigma_hrs.to_string(),
            p.i_hrs.to_string(),
            p.i_lrs.to_string(),
            win.baseline.to_string(),
            opt(win.interval.map(|i| i.0)),
            opt(win.interval.map(|i| i.1)),
            win.alphas.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(csv_err)
}

/// Gnuplot data: one indexed block per curve with `alpha mean min max`
/// columns, blocks separated by two blank lines.
pub fn write_plot_data<W: Write>(summary: &Summary, mut out: W) -> Result<()> {
    let mut done = vec![false; summary.points.len()];
    let mut first = true;
    for i in 0..summary.points.len() {
        if done[i] {
            continue;
        }
        let head = summary.points[i].point;
        let mut curve: Vec<&PointSummary> = Vec::new();
        for (j, p) in summary.points.iter().enumerate() {
            if same_curve(&head, &p.point) {
                done[j] = true;
                curve.push(p);
            }
        }
        curve.sort_by(|a, b| a.point.alpha.total_cmp(&b.point.alpha));
        if !first {
            write!(out, "\n\n").map_err(csv_err)?;
        }
        first = false;
        writeln!(
            out,
            "# mapping={} adc_bits={} i_hrs={} i_lrs={} sigma_lrs={} sigma_hrs={}\n# alpha mean min max",
            head.mapping, head.adc_bits, head.i_hrs, head.i_lrs, head.sigma_lrs, head.sigma_hrs
        )
        .map_err(csv_err)?;
        for p in curve {
            let f = |x: Option<f64>| x.map_or("NaN".to_string(), |v| v.to_string());
            writeln!(out, "{} {} {} {}", p.point.alpha, f(p.mean), f(p.min), f(p.max))
                .map_err(csv_err)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::time::Duration;

    fn row(index: usize, trial: usize, bits: Resolution, alpha: f64, acc: Option<f64>) -> ResultRow {
        ResultRow {
            point: SweepPoint {
                index,
                mapping: "bnn-vi".parse().unwrap(),
                i_hrs: 5.0,
                i_lrs: 30.0,
                sigma_lrs: 0.0,
                sigma_hrs: 0.0,
                adc_bits: bits,
                alpha,
            },
            trial,
            seed: 0,
            samples: 100,
            correct: 0,
            accuracy: acc,
            writes: 0,
            mvms: 0,
            status: if acc.is_some() { "ok".into() } else { "error: x".into() },
            wall: Duration::ZERO,
        }
    }

    #[test]
    fn empty_table_is_error() {
        assert!(matches!(summarize(&[], None), Err(Error::EmptyInput(_))));
    }

    #[test]
    fn single_row_mean_min_max_agree() {
        let s = summarize(&[row(0, 0, Resolution::Infinite, 1.0, Some(0.9))], None).unwrap();
        let p = &s.points[0];
        assert_eq!((p.mean, p.min, p.max), (Some(0.9), Some(0.9), Some(0.9)));
        assert_eq!(s.windows[0].interval, Some((1.0, 1.0)));
    }

    #[test]
    fn hand_computed_aggregates_and_windows() {
        let inf = Resolution::Infinite;
        let b3 = Resolution::Bits(3);
        let rows = vec![
            row(0, 0, inf, 0.25, Some(0.80)),
            row(0, 1, inf, 0.25, Some(0.84)),
            row(1, 0, inf, 1.0, Some(0.90)),
            row(1, 1, inf, 1.0, Some(0.92)),
            // B = 3 curve: alphas 0.1, 0.2, 0.3, 0.5, 1.0
            row(2, 0, b3, 0.1, Some(0.70)),
            row(3, 0, b3, 0.2, Some(0.905)),
            row(4, 0, b3, 0.3, Some(0.91)),
            row(4, 1, b3, 0.3, None),
            row(5, 0, b3, 0.5, Some(0.85)),
            row(6, 0, b3, 1.0, Some(0.91)),
        ];
        let s = summarize(&rows, None).unwrap();
        assert_eq!(s.points.len(), 7);
        let p0 = &s.points[0];
        assert!((p0.mean.unwrap() - 0.82).abs() < 1e-12);
        assert_eq!((p0.min, p0.max), (Some(0.80), Some(0.84)));
        assert_eq!((s.points[4].trials, s.points[4].failed, s.points[4].mean), (2, 1, Some(0.91)));

        // baseline = 0.91; threshold 0.90
        let w_inf = &s.windows[0];
        assert!((w_inf.baseline - 0.91).abs() < 1e-12);
        assert_eq!(w_inf.interval, Some((1.0, 1.0)));
        let w3 = &s.windows[1];
        // runs: [0.2, 0.3] (width 0.1) and [1.0] (width 0)
        assert_eq!((w3.interval, w3.alphas), (Some((0.2, 0.3)), 2));

        let fixed = summarize(&rows, Some(0.95)).unwrap();
        assert_eq!(fixed.windows[1].interval, None);

        let mut csv = Vec::new();
        write_summary_csv(&s, &mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert!(text.contains("\n4,bnn-vi+cells,3,0.3,0,0,5,30,2,1,0.91,0.91,0.91\n"), "{text}");
        assert!(text.contains("bnn-vi+cells,3,0,0,5,30,0.91,0.2,0.3,2"), "{text}");

        let mut dat = Vec::new();
        write_plot_data(&s, &mut dat).unwrap();
        let dat = String::from_utf8(dat).unwrap();
        assert_eq!(dat.matches("# mapping=").count(), 2);
        assert!(dat.contains("\n\n\n# mapping=bnn-vi+cells adc_bits=3"));
    }
}
