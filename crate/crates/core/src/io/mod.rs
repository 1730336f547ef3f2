//! Scenario documents in, CSV and JSON results out.

mod config;
mod output;

pub use config::{load_scenario, parse_scenario, scenario_to_json, serialize_scenario};
pub use output::{
    run_summary_row, write_ledger_csv, write_links_csv, write_plan_csv, write_region_maps,
    write_sca_trace, write_summary,
};
