//! Integer-programming model export, solution audit and lower bounds.

mod bounds;
mod lp;
mod validate;

pub use bounds::{congestion_lower_bound, weak_lower_bound};
pub use lp::{
    emit_full_model, emit_relaxed_lb_model, warm_start, LightpathVar, ModelPhase, VariableSpace, WarmStartError,
};
pub use validate::{validate_solution, AuditReport, Violation, ViolationClass};
