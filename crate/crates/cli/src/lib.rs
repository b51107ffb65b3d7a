//! Command-line front end and file formats for `hodgetrack-core`.
//!
//! Every command reads one input file, writes its outputs atomically and
//! leaves a `<output>.manifest.json` with the input hash, the parameters and
//! the tolerances next to its primary output.
//!
//! Formats:
//!
//! * point CSV: `x,y` (or `x,y,z`) per line, no header;
//! * complex JSON: `{"simplices": [[0],[1],[0,1]], "values": [0,0,1.5]}` with
//!   an optional `"points"` array of coordinates;
//! * spectrum JSON, trajectory CSV/JSON, label CSV, HGC CSV, boundary CSV;
//! * SVG 1.1 drawings of trajectories and planar complexes.

pub mod commands;
pub mod error;
pub mod formats;
pub mod manifest;
pub mod output;
pub mod svg;

pub use commands::{run, Cli, Command};
pub use error::CliError;
