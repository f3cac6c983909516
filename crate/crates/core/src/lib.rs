//! Star products with separation of variables, computed exactly on jets.

pub mod kernel;
pub mod diffop;
pub mod star;
pub mod berezin;
pub mod distalg;
pub mod oscact;
pub mod calabi;
pub mod cli;
