//! Exact computations around improved Hodge polygons and T-adic Newton
//! polygons of two-variable exponential sums over a triangle.

pub mod beta;
pub mod combos;
pub mod dwork;
pub mod hodge;
pub mod lattice;
pub mod polygon;
