//! Mechanical construction of the constraint-programming model: placement
//! expressions, their automata, the full variable/constraint export, and an
//! independent checker for assignments against an export.

pub mod dfa;
pub mod regex;
pub mod model;
pub mod verify;
