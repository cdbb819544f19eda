pub mod approx;
pub mod detsys;
pub mod expr;
pub mod jet;
pub mod numeval;
pub mod parse;
pub mod verify;
