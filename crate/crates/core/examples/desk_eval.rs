//! Both arms over the bundled eight-task suite.
//!
//!     cargo run --example desk_eval

use clarifier::eval::{aggregate, load_suite, run_suite, scripted_pair, RunOptions};
use clarifier::fixtures;
use clarifier::SessionConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let suite = fixtures::desk_suite_dir();
    let tasks = load_suite(&suite)?;
    let out = tempfile::tempdir()?;
    let scripts = suite.join("scripts");
    let results = run_suite(
        &tasks,
        &SessionConfig::default(),
        |task| scripted_pair(&scripts, &task.id).map_err(|e| e.to_string()),
        &RunOptions::new(out.path()),
        4,
    );
    let report = aggregate(&results)?;
    print!("{}", report.render_table());
    Ok(())
}
