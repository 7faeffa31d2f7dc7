//! Two-phase experiment engine: ideal Monte Carlo decoding, then replay of the
//! recorded trial counts through the buffered, controlled system.

pub mod ideal;
pub mod io;
pub mod system;
pub mod timing;

pub use ideal::{frozen_hash, run_ideal_sim, IdealMeta, IdealRun, IdealTrace};
pub use io::{
    load_ideal_trace, read_ideal_trace, save_ideal_trace, write_ideal_trace, LoadedTrace,
};
pub use system::{calc_fer_impact, run_system_sim, SimTrace, SystemConfig, SystemSim};
pub use timing::{format_upsilon, parse_upsilon, resolve_timing, upsilon_f64, UPSILON_PRESETS};
