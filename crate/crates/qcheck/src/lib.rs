//! Bounded model checking of QoS properties over communicating finite-state machines.

pub mod aggregation;
pub mod frontends;
pub mod gchor;
pub mod generate;
pub mod lts;
pub mod model;
pub mod projection;
pub mod ql;
pub mod smt;
pub mod syntax;
