//! Trade-off sweep: train one decision model per trade-off factor and
//! report how predictions distribute over the dialects on held-out
//! requests. Data first: CSV always, bar-chart SVGs on request.

use std::fmt;
use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::Context;
use serde::Serialize;
use vp_ddm::{train, TrainingConfig};

use crate::artifacts::write_atomic;
use crate::config::Settings;
use crate::ops::train::{dialect_costs, generate_corpus};
use crate::ops::Protocol;

/// Keeps the held-out request set disjoint from the training corpus
/// while still a pure function of the user's seed.
const HOLDOUT_SEED_SALT: u64 = 0x484f_4c44;

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub a_values: Vec<f64>,
    pub train_size: usize,
    pub holdout_size: usize,
    /// Overrides the per-objective epoch schedule.
    pub epochs: Option<usize>,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub svg: bool,
}

/// The prediction histogram one trained model produced.
#[derive(Debug, Clone, Serialize)]
pub struct SweepPoint {
    pub trade_off: f64,
    /// Counts by dialect index (0-based; dialect ids are index + 1).
    pub counts: Vec<usize>,
}

impl SweepPoint {
    /// Fraction of held-out predictions landing on the dialect at
    /// `index`.
    pub fn fraction(&self, index: usize) -> f64 {
        let total: usize = self.counts.iter().sum();
        if total == 0 {
            return 0.0;
        }
        self.counts[index] as f64 / total as f64
    }

    /// `(index, count)` of the most- and second-most-predicted dialects.
    pub fn top_two(&self) -> ((usize, usize), (usize, usize)) {
        let mut ranked: Vec<(usize, usize)> =
            self.counts.iter().copied().enumerate().collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        (ranked[0], ranked[1])
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub points: Vec<SweepPoint>,
    pub holdout_size: usize,
    pub csv_path: PathBuf,
    pub svg_paths: Vec<PathBuf>,
}

impl fmt::Display for SweepReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for point in &self.points {
            let (top, second) = point.top_two();
            writeln!(
                f,
                "a = {:<4}: top dialect {:>2} at {:>6.2}%, second dialect {:>2} at {:>6.2}%",
                point.trade_off,
                top.0 + 1,
                point.fraction(top.0) * 100.0,
                second.0 + 1,
                point.fraction(second.0) * 100.0,
            )?;
        }
        writeln!(f, "wrote {}", self.csv_path.display())?;
        for path in &self.svg_paths {
            writeln!(f, "wrote {}", path.display())?;
        }
        Ok(())
    }
}

/// Trains one model per trade-off factor and histograms its predictions
/// over a held-out corpus disjoint from the training one.
pub fn cmd_sweep_tradeoff(spec: &SweepSpec, settings: &Settings) -> anyhow::Result<SweepReport> {
    anyhow::ensure!(!spec.a_values.is_empty(), "need at least one trade-off factor");
    anyhow::ensure!(
        spec.a_values.iter().all(|a| (0.0..=1.0).contains(a)),
        "trade-off factors must lie in [0, 1]"
    );

    let costs = dialect_costs(Protocol::Ftp, settings);
    let train_corpus = generate_corpus(Protocol::Ftp, spec.train_size, spec.seed)?;
    let holdout = generate_corpus(
        Protocol::Ftp,
        spec.holdout_size,
        spec.seed ^ HOLDOUT_SEED_SALT,
    )?;

    let mut points = Vec::with_capacity(spec.a_values.len());
    for &a in &spec.a_values {
        let mut config = TrainingConfig::for_trade_off(a);
        config.seed = spec.seed;
        if let Some(epochs) = spec.epochs {
            config.epochs = epochs;
        }
        let (model, _) = train(&train_corpus, &costs, &config)
            .with_context(|| format!("training at a = {a}"))?;
        let mut counts = vec![0usize; costs.len()];
        for request in &holdout {
            counts[model.predict_dialect(request).index()] += 1;
        }
        log::info!("trade-off {a}: histogram {counts:?}");
        points.push(SweepPoint {
            trade_off: a,
            counts,
        });
    }

    let csv_path = spec.out_dir.join("sweep.csv");
    write_atomic(&csv_path, render_csv(&points).as_bytes())
        .with_context(|| format!("writing {}", csv_path.display()))?;

    let mut svg_paths = Vec::new();
    if spec.svg {
        for point in &points {
            let path = spec
                .out_dir
                .join(format!("tradeoff-a{:.2}.svg", point.trade_off));
            write_atomic(&path, render_svg(point, spec.holdout_size).as_bytes())
                .with_context(|| format!("writing {}", path.display()))?;
            svg_paths.push(path);
        }
    }

    Ok(SweepReport {
        points,
        holdout_size: spec.holdout_size,
        csv_path,
        svg_paths,
    })
}

fn render_csv(points: &[SweepPoint]) -> String {
    let mut csv = String::from("a,dialect,count\n");
    for point in points {
        for (index, count) in point.counts.iter().enumerate() {
            let _ = writeln!(csv, "{},{},{}", point.trade_off, index + 1, count);
        }
    }
    csv
}

/// A self-contained bar chart: one bar per dialect, counts on top.
fn render_svg(point: &SweepPoint, holdout: usize) -> String {
    const BAR_WIDTH: f64 = 30.0;
    const GAP: f64 = 10.0;
    const LEFT: f64 = 20.0;
    const TOP: f64 = 40.0;
    const PLOT_HEIGHT: f64 = 280.0;

    let bars = point.counts.len() as f64;
    let width = LEFT * 2.0 + bars * BAR_WIDTH + (bars - 1.0) * GAP;
    let height = TOP + PLOT_HEIGHT + 40.0;
    let max = point.counts.iter().copied().max().unwrap_or(0).max(1) as f64;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    );
    let _ = writeln!(svg, r#"<rect width="{width}" height="{height}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="24" text-anchor="middle" font-family="monospace" font-size="14">predicted dialects at trade-off {} ({holdout} held-out requests)</text>"#,
        width / 2.0,
        point.trade_off
    );
    for (index, &count) in point.counts.iter().enumerate() {
        let bar_height = count as f64 / max * PLOT_HEIGHT;
        let x = LEFT + index as f64 * (BAR_WIDTH + GAP);
        let y = TOP + PLOT_HEIGHT - bar_height;
        let _ = writeln!(
            svg,
            r##"<rect x="{x:.1}" y="{y:.1}" width="{BAR_WIDTH}" height="{bar_height:.1}" fill="#4472a8"/>"##
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-family="monospace" font-size="10">{count}</text>"#,
            x + BAR_WIDTH / 2.0,
            y - 4.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-family="monospace" font-size="11">{}</text>"#,
            x + BAR_WIDTH / 2.0,
            TOP + PLOT_HEIGHT + 16.0,
            index + 1
        );
    }
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_lists_every_dialect_per_factor() {
        let points = vec![
            SweepPoint {
                trade_off: 1.0,
                counts: vec![5, 0, 1],
            },
            SweepPoint {
                trade_off: 0.5,
                counts: vec![2, 2, 2],
            },
        ];
        let csv = render_csv(&points);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "a,dialect,count");
        assert_eq!(lines[1], "1,1,5");
        assert_eq!(lines[3], "1,3,1");
        assert_eq!(lines[4], "0.5,1,2");
        assert_eq!(lines.len(), 7);
    }

    #[test]
    fn top_two_ranks_by_count_then_index() {
        let point = SweepPoint {
            trade_off: 0.8,
            counts: vec![3, 9, 9, 1],
        };
        let (top, second) = point.top_two();
        assert_eq!(top, (1, 9));
        assert_eq!(second, (2, 9));
        assert!((point.fraction(1) - 9.0 / 22.0).abs() < 1e-12);
    }

    #[test]
    fn svg_has_one_bar_per_dialect() {
        let point = SweepPoint {
            trade_off: 0.0,
            counts: vec![4, 4, 4, 4, 4],
        };
        let svg = render_svg(&point, 20);
        assert_eq!(svg.matches("<rect").count(), 6, "background + 5 bars");
        assert!(svg.contains("trade-off 0"));
    }
}
