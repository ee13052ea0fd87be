//! Report generation behind the `pathdepth` command-line tool.

pub mod error;
pub mod record;
pub mod render;
pub mod tables;

pub use error::CliError;
pub use record::{
    analyze, analyze_all, analyze_graph, tradeoff, AnalysisRecord, AnalyzeOptions, Source,
};
pub use tables::{load_reference_accuracy, ReferenceAccuracyTable};
