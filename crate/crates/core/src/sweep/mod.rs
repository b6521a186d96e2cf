//! Configuration, sweeps, overlap calibration and result files.

mod calibrate;
mod config;
mod emit;
mod run;

pub use calibrate::{calibrate_r_ol, default_points, Calibration, CalibrationPoint};
pub use config::{load_config, parse_config, Format, Metric, OracleMode, OracleSettings, SweepConfig, Variant};
pub use emit::{csv_header, emit, parse_csv, to_csv, to_json, to_svg, CsvTable, JSON_SCHEMA_VERSION};
pub use run::{evaluate_point, receiver_at, run_sweep, run_sweep_with_jobs, OracleRow, Row, Series, SweepResult};
