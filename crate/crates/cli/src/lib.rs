//! File formats, the compilation pipeline and the `epr-route` command line
//! on top of `epr-core`.

pub mod commands;
pub mod device_io;
pub mod pipeline;
pub mod qasm;
pub mod report;
