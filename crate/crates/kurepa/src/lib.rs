//! File formats and the `kurepa` command line over [`kurepa_core`].

pub mod cli;
pub mod io;
