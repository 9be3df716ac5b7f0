//! Verification workbench for finite algebra-valued models of set theory
//! with a paraconsistent negation.

pub mod evaluator;
pub mod fidel;
pub mod formula;
pub mod frontend;
pub mod lattice;
pub mod names;
pub mod proplogic;
pub mod zfcheck;
