pub mod adapters;
pub mod cli;
pub mod compare;
pub mod parser;
pub mod render;
pub mod scenario;
pub mod stats;
