//! Exact perfect-matching counts on plane bipartite graphs.

pub mod ciucu;
pub mod cli;
pub mod compound;
pub mod corpus;
pub mod graph;
pub mod oracle;
pub mod regions;
pub mod report;
pub mod ring;
pub mod sign;
