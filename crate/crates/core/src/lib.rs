pub mod analysis;
pub mod design;
pub mod digest;
pub mod fixtures;
pub mod rng;
pub mod runner;
pub mod spec;
pub mod sut;
pub mod terms;
