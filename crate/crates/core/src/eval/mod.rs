//! Graph statistics, MMD comparisons of snapshot populations over time, reports and plots.

mod mmd;
mod plot;
mod report;
mod stats;

#[cfg(test)]
mod tests;

pub use mmd::{
    common_length, curve, mmd2, mmd_bar, mmd_per_timestep, stat_curve, total_variation, Curve,
    DEFAULT_SIGMA,
};
pub use plot::write_plots;
pub use report::{build_report, DegreeDistribution, EvalReport, ReportMeta, StatReport};
pub use stats::{
    adjacency_eigenvalues, assortativity, closeness, community_density, curve_value,
    global_scalar_stat, local_clustering, node_histogram_stat, node_values,
    normalized_laplacian_eigenvalues, spectral_bipartivity, statistic, transitivity, StatValue,
    StatisticId, CLUSTERING_BINS, SPECTRAL_BINS,
};
