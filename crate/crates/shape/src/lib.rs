//! Std companion of `shape-core`: dataset files, report output, a threaded
//! executor and the external evaluator wire protocol.

pub mod config;
pub mod echo;
pub mod external;
pub mod format;
pub mod output;
pub mod protocol;
pub mod run;
pub mod threads;

pub use config::RunConfig;
pub use external::ExternalEvaluator;
pub use threads::ThreadExecutor;

/// Version string embedded in every report.
pub const TOOL_VERSION: &str = concat!("shape ", env!("CARGO_PKG_VERSION"));
