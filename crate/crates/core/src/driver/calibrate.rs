//! Repeated seeded runs scored against oracle counts.

use rayon::prelude::*;
use serde::Serialize;

use super::generate::Generator;
use super::{run_search, ConfigError, CountReport, RunConfig, Status};
use crate::backend::CnfBackend;
use crate::oracle::{exact_count, OracleError, DEFAULT_LIMIT};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalibrationRow {
    pub seed: u64,
    pub true_count: u64,
    pub status: Status,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub exact_count: Option<u64>,
    pub covered: bool,
    pub queries: u64,
    pub iterations: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalibrationTable {
    pub generator: String,
    pub rows: Vec<CalibrationRow>,
    /// Fraction of runs whose result contains the true count.
    pub coverage: f64,
    /// Mean interval length over runs that ended with an interval.
    pub mean_width: Option<f64>,
    pub mean_queries: f64,
    pub median_queries: f64,
}

impl CalibrationTable {
    fn from_rows(generator: String, rows: Vec<CalibrationRow>) -> Self {
        let n = rows.len() as f64;
        let coverage = rows.iter().filter(|r| r.covered).count() as f64 / n;
        let widths: Vec<f64> = rows
            .iter()
            .filter(|r| r.status == Status::Interval)
            .filter_map(|r| Some(r.upper? - r.lower?))
            .collect();
        let mean_width = (!widths.is_empty()).then(|| widths.iter().sum::<f64>() / widths.len() as f64);
        let mut q: Vec<u64> = rows.iter().map(|r| r.queries).collect();
        q.sort_unstable();
        let mean_queries = q.iter().sum::<u64>() as f64 / n;
        let mid = q.len() / 2;
        let median_queries = if q.len() % 2 == 1 {
            q[mid] as f64
        } else {
            (q[mid - 1] + q[mid]) as f64 / 2.0
        };
        CalibrationTable {
            generator,
            rows,
            coverage,
            mean_width,
            mean_queries,
            median_queries,
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = format!(
            "{:>6} {:>8} {:>9} {:>9} {:>9} {:>8} {:>7}\n",
            "seed", "truth", "status", "lower", "upper", "queries", "covered"
        );
        let f = |x: Option<f64>| x.map_or("-".to_string(), |v| format!("{v:.3}"));
        for r in &self.rows {
            let status = match r.status {
                Status::Interval => "interval",
                Status::Exact => "exact",
                Status::Aborted => "aborted",
            };
            s.push_str(&format!(
                "{:>6} {:>8} {:>9} {:>9} {:>9} {:>8} {:>7}\n",
                r.seed,
                r.true_count,
                status,
                f(r.lower),
                f(r.upper),
                r.queries,
                if r.covered { "yes" } else { "no" }
            ));
        }
        s.push_str(&format!(
            "generator: {}\nruns: {} coverage: {:.3} mean width: {} mean queries: {:.1} median queries: {:.1}\n",
            self.generator,
            self.rows.len(),
            self.coverage,
            f(self.mean_width),
            self.mean_queries,
            self.median_queries
        ));
        s
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CalibrationError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("need at least one run")]
    NoRuns,
}

fn one_run<G: Generator>(
    generator: &G,
    seed: u64,
    config: &RunConfig,
) -> Result<CalibrationRow, CalibrationError> {
    let formula = generator.generate(seed);
    let truth = exact_count(&formula, DEFAULT_LIMIT)?.count;
    let cfg = RunConfig {
        seed,
        ..config.clone()
    };
    let mut backend = CnfBackend::new(formula).with_timeout(config.timeout);
    let report: CountReport = run_search(&mut backend, &cfg)?;
    Ok(CalibrationRow {
        seed,
        true_count: truth,
        status: report.status,
        lower: report.lower,
        upper: report.upper,
        exact_count: report.exact_count,
        covered: report.contains_count(truth),
        queries: report.total_queries,
        iterations: report.iterations,
    })
}

/// Runs `runs` searches with seeds `config.seed, config.seed + 1, ...`,
/// each on the generator's formula for that seed, in parallel. Rows are in
/// seed order regardless of scheduling.
pub fn calibrate<G: Generator>(
    generator: &G,
    runs: usize,
    config: &RunConfig,
) -> Result<CalibrationTable, CalibrationError> {
    if runs == 0 {
        return Err(CalibrationError::NoRuns);
    }
    config.validate()?;
    let rows = (0..runs as u64)
        .into_par_iter()
        .map(|i| one_run(generator, config.seed.wrapping_add(i), config))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(CalibrationTable::from_rows(generator.describe(), rows))
}

#[cfg(test)]
mod tests {
    use super::super::PlantedGenerator;
    use super::*;

    #[test]
    fn single_run_table() {
        let g = PlantedGenerator::new(4, 8);
        let t = calibrate(&g, 1, &RunConfig::default()).unwrap();
        assert_eq!(t.rows.len(), 1);
        assert_eq!(t.rows[0].true_count, 16);
        assert_eq!(t.median_queries, t.rows[0].queries as f64);
        assert!(t.to_text().contains("runs: 1"));
    }

    #[test]
    fn rows_in_seed_order_and_deterministic() {
        let g = PlantedGenerator::new(6, 10);
        let cfg = RunConfig {
            seed: 40,
            ..RunConfig::default()
        };
        let a = calibrate(&g, 6, &cfg).unwrap();
        let b = calibrate(&g, 6, &cfg).unwrap();
        assert_eq!(a, b);
        let seeds: Vec<u64> = a.rows.iter().map(|r| r.seed).collect();
        assert_eq!(seeds, (40..46).collect::<Vec<_>>());
        assert!(calibrate(&g, 0, &cfg).is_err());
    }
}
