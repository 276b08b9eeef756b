pub mod bench;
pub mod convert;
pub mod eval;
pub mod run;
