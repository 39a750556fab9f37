#![allow(dead_code)]

pub mod corpus;
pub mod invariants;
pub mod ops;
