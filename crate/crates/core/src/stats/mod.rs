//! Post hoc statistical machinery: normality testing, omnibus and
//! pairwise nonparametric tests, multiplicity correction, effect sizes
//! and critical-difference inputs. All functions are pure.

pub mod cdd;
pub mod cliffs;
pub mod dunn;
pub mod friedman;
pub mod holm;
pub mod kruskal;
pub mod rank;
pub mod shapiro;
pub mod special;
pub mod wilcoxon;

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;

pub use cdd::{cdd_inputs, CddInputs, PairwiseComparison};
pub use cliffs::cliffs_delta;
pub use dunn::dunn_pairwise;
pub use friedman::friedman;
pub use holm::holm_bonferroni;
pub use kruskal::kruskal_wallis;
pub use shapiro::shapiro_wilk;
pub use wilcoxon::wilcoxon_signed_rank;

/// Significance threshold used throughout the reporting layer.
pub const ALPHA: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestMethod {
    ShapiroWilk,
    KruskalWallis,
    Dunn,
    Friedman,
    Wilcoxon,
    CliffsDelta,
}

impl TestMethod {
    pub fn name(&self) -> &'static str {
        match self {
            TestMethod::ShapiroWilk => "shapiro_wilk",
            TestMethod::KruskalWallis => "kruskal_wallis",
            TestMethod::Dunn => "dunn",
            TestMethod::Friedman => "friedman",
            TestMethod::Wilcoxon => "wilcoxon",
            TestMethod::CliffsDelta => "cliffs_delta",
        }
    }
}

/// Outcome of one test: the statistic slot houses W, H, Z, chi_F^2 or
/// delta depending on the method.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StatTestResult {
    pub method: TestMethod,
    pub statistic: f64,
    pub p: f64,
    pub p_adj: Option<f64>,
    /// Group indices for pairwise methods.
    pub pair: Option<(usize, usize)>,
}

/// Rank bookkeeping for grouped data (pooled midranks).
#[derive(Debug, Clone)]
pub struct RankSummary {
    pub group_sizes: Vec<usize>,
    pub rank_sums: Vec<f64>,
    pub mean_ranks: Vec<f64>,
    pub total: usize,
    pub tie_group_sizes: Vec<usize>,
}

/// Writes results as CSV: method, groups, statistic, p, p_adj.
pub fn write_results_csv(
    results: &[(String, StatTestResult)],
    mut out: impl Write,
) -> Result<usize> {
    writeln!(out, "method,groups,statistic,p,p_adj")?;
    for (label, r) in results {
        let p_adj = r.p_adj.map_or(String::new(), |v| format!("{v:e}"));
        writeln!(
            out,
            "{},{},{},{:e},{}",
            r.method.name(),
            label,
            r.statistic,
            r.p,
            p_adj
        )?;
    }
    Ok(results.len())
}
