//! Top-level algorithms built on the grid, functional and fiber layers.

pub mod battery;
pub mod excited;
pub mod ground;
pub mod qp;
pub mod report;
pub mod scans;

pub use battery::{gn_battery, random_field};
pub use excited::excited_state;
pub use ground::{normalized_ground_state, ContinuationSchedule, GroundStateOptions};
pub use qp::{a_star, critical_profile, critical_seed, sharp_gn, shoot_qp, shoot_qp_from, QpProfile};
pub use report::{ReportJson, SolveReport};
pub use scans::{concentration_study, critical_fiber_scan, ConcentrationRow, FiberClass, ScanRow};
