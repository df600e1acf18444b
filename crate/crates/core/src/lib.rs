// Negated float comparisons reject NaN on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod par;
pub mod certificate;
pub mod cli;
pub mod constructors;
pub mod error;
pub mod gram;
pub mod holder;
pub mod integral;
pub mod kernel;
pub mod kernel_metric;
pub mod metric;
pub mod point;
pub mod predicate;
pub mod verifier;
