//! Host side of the GEMM benchmarking harness: kernel registry, parallel
//! dispatch, point execution, sensors, sweeps, the experiment repository and
//! report rendering. Computation lives in [`gemmbench_core`].

pub mod engine;
pub mod environment;
pub mod explorer;
pub mod harness;
pub mod registry;
pub mod report;
pub mod repository;
pub mod sensors;
pub mod settings;

pub use gemmbench_core as core;

pub use engine::{run_kernel, Dispatch};
pub use explorer::{explore_order, explore_tiles, Target, TileSweep, TileWinner};
pub use harness::{run_point, RunOptions};
pub use registry::{Registry, RegistryError};
pub use report::{
    export_csv, export_markdown, render_chart_data, render_energy_table, render_order_table, render_validation_table,
    ReportError, Table,
};
pub use repository::{ExperimentEntry, ExperimentMeta, RepoError, Repository};
pub use sensors::{FileProbeSensor, SensorConfig};
pub use settings::Settings;
