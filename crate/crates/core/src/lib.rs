pub mod clause;
pub mod flow;
pub mod formats;
pub mod generators;
pub mod graph;
pub mod lp;
pub mod sa;
pub mod search;
pub mod translate;
