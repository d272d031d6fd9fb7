//! Model files, artifacts and the commands of the `sp2brst` tool.

pub mod artifact;
pub mod commands;
pub mod model_file;
