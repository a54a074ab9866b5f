pub mod dyadic;
pub mod error;
pub mod exact;
pub mod interval;
pub mod machine;
pub mod elementary;
pub mod expr;
pub mod norm;
pub mod real;
pub mod signal;
pub mod witness;
pub mod fuzz;
pub mod verify;
pub mod compile;
pub mod desc;
