pub mod analysis;
pub mod cli;
pub mod engine;
pub mod storage;
pub mod syntax;
