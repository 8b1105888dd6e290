pub mod analyze;
pub mod design;
pub mod recommend;
pub mod run;
pub mod screen;
pub mod validate;
