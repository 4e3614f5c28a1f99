pub mod maze;
pub mod agents;
pub mod analysis;
pub mod protocol;
pub mod service;
pub mod cli;
