//! Higher-order logic locking for combinational netlists.

pub mod attacker;
pub mod cnf;
pub mod keyrel;
pub mod locker;
pub mod netlist;
pub mod synth;
