//! Metrics, cross-validation, the feature-set ablation grid and report
//! rendering.

mod ablation;
mod cv;
mod metrics;
mod report;

pub use ablation::{ablate, AblationCell, AblationGrid, AblationRow, ABLATION_COLUMNS, ABLATION_ROWS};
pub use cv::{cross_validate, evaluate, EvalOptions, EvalReport, Prediction, Protocol};
pub use metrics::{
    average_reports, format_2dp, metrics, percent, round_half_up, ClassMetrics, ConfusionMatrix, MetricsReport,
};
pub use report::{
    parse_grid_csv, parse_metrics_csv, render_grid_csv, render_grid_text, render_metrics_csv,
    render_metrics_text, GridCsv, MetricsCsvRow,
};
