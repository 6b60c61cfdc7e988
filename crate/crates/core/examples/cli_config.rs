//! Running a JSON experiment config from code and writing its report.

use ergolab::experiment::{run, ExperimentConfig};

fn main() -> ergolab::Result<()> {
    let cfg = ExperimentConfig::from_json(r#"{"system": "cat_map", "task": "lyapunov", "n": 10000}"#)?;
    let report = run(&cfg)?;
    for c in &report.checks {
        println!("{}: expected {}, observed {}, pass {}", c.quantity, c.expected, c.observed, c.pass);
    }
    let dir = tempfile::tempdir()?;
    report.write_to(dir.path())?;
    for (name, _) in report.csv_files() {
        println!("wrote {name}");
    }
    Ok(())
}
