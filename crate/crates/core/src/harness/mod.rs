//! Command-line front end and experiment plumbing.

pub mod cli;
pub mod config;
pub mod experiment;
pub mod figures;
pub mod plot;
pub mod tasks;

pub use config::{ExperimentConfig, FigureConfig, KvConfig, Variant};
pub use experiment::{run_figure, summary_text, RunRecord};
pub use figures::{builtin_config, FIGURE_IDS};
pub use plot::render_svg;
pub use tasks::{default_data_dir, DataContext, TaskSpec, DATA_DIR_ENV};
