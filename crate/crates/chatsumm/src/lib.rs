pub mod cli;
pub mod config;
pub mod io;
pub mod pipeline;
pub mod remote;
pub mod report;
pub mod store;
