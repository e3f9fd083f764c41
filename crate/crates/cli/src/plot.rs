//! Long-format `(series, x, y)` tables from artifacts.

use std::path::Path;

use serde::Deserialize;

use crate::error::CliError;
use crate::run::{PlotSeries, Table};

#[derive(Deserialize)]
struct PlotOnly {
    name: String,
    plot: Vec<PlotSeries>,
}

/// Reads the plot series of each artifact. With more than one artifact the
/// series are tagged `<scenario>/<series>`.
pub fn plot_table(artifacts: &[impl AsRef<Path>]) -> Result<Table, CliError> {
    if artifacts.is_empty() {
        return Err(CliError::Config { path: String::new(), msg: "no artifacts given".into() });
    }
    let tag = artifacts.len() > 1;
    let mut table = Table { headers: vec!["series".into(), "x".into(), "y".into()], rows: Vec::new() };
    for path in artifacts {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let a: PlotOnly = serde_json::from_str(&text)
            .map_err(|e| CliError::Config { path: path.display().to_string(), msg: format!("not an artifact: {e}") })?;
        for s in a.plot {
            let name = if tag { format!("{}/{}", a.name, s.series) } else { s.series };
            for (x, y) in s.points {
                table.rows.push(vec![name.clone(), x.to_string(), y.to_string()]);
            }
        }
    }
    Ok(table)
}
