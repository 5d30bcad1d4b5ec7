pub mod evaluate;
pub mod group;
pub mod import;
pub mod simulate;
