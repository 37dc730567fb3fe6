//! Pipeline subcommands.

mod gen_labels;
mod gen_scenes;
mod report;
mod rollout;
mod train;

pub use gen_labels::cmd_gen_labels;
pub use gen_scenes::cmd_gen_scenes;
pub use report::{cmd_report, ReportRow};
pub use rollout::cmd_rollout;
pub use train::cmd_train;
