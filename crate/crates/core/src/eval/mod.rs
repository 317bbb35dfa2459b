//! Multi-step prediction metrics, β grid search and the sigmoid lab.

pub mod grid;
pub mod r2;
pub mod report;
pub mod sigmoid_lab;

pub use grid::{fold_partition, grid_search_beta, BetaSummary, GridCell, GridSearchConfig, GridSearchRecord, BETA_GRID, TIE_TOLERANCE};
pub use r2::{r2_bar, r2_bar_of, r2_curve, relative_improvement, R2Curve};
pub use report::R2Format;
pub use sigmoid_lab::{
    loss_landscape_scan, sigmoid_ablation, AblationConfig, AblationReport, AblationRun, AblationSummary, LandscapeConfig, LandscapeScan,
};
