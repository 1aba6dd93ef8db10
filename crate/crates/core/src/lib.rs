//! Fair scheduling of talks for virtual conferences.
//!
//! Talks are assigned to non-overlapping time slots so as to trade total
//! expected participation against two kinds of fairness: how evenly
//! participants are served (normalized cumulative gain) and how evenly
//! speakers draw a crowd (normalized expected crowd).
//!
//! ```
//! use fairconf::fixtures::example_problem_2;
//! use fairconf::metrics::tep;
//! use fairconf::solvers::solve_em;
//!
//! let instance = example_problem_2();
//! let result = solve_em(&instance);
//! assert!((tep(&instance, &result.schedule) - 1.4).abs() < 1e-12);
//! ```

pub mod cli;
pub mod clustering;
pub mod datagen;
pub mod error;
pub mod fixtures;
pub mod io;
pub mod lp;
pub mod metrics;
pub mod model;
pub mod pipeline;
pub mod solvers;

pub use error::{Error, Result};
pub use metrics::MetricsReport;
pub use model::{Assignment, Matrix, MultiRoundSchedule, Schedule, SchedulingInstance};
pub use solvers::{ObjectiveSpec, SolveResult};
