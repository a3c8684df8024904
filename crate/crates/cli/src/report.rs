// SPDX-License-Identifier: Apache-2.0

//! Tidy tables from frontier CSVs and metric JSONs.

use std::path::Path;

use anyhow::{bail, Context, Result};
use axsel::surrogate::PredictionReport;

const OBJECTIVES: [&str; 4] = ["area", "power", "latency", "ssim"];

fn field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// One row per frontier point; objective columns missing from a source stay
/// empty.
pub fn frontier_table(sources: &[(String, String)]) -> Result<String> {
    let mut out = String::from("source,config_hash,generation");
    for kind in ["verified", "predicted"] {
        for o in OBJECTIVES {
            out.push_str(&format!(",{kind}_{o}"));
        }
    }
    out.push('\n');
    for (name, text) in sources {
        let mut lines = text.lines();
        let header: Vec<&str> = lines.next().context("empty frontier file")?.split(',').collect();
        let col = |h: &str| header.iter().position(|c| *c == h);
        let (Some(hash), Some(generation)) = (col("config_hash"), col("generation")) else {
            bail!("{name} is not a frontier table");
        };
        for line in lines.filter(|l| !l.trim().is_empty()) {
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() != header.len() {
                bail!("{name}: row has {} cells, header {}", cells.len(), header.len());
            }
            out.push_str(&format!("{},{},{}", field(name), cells[hash], cells[generation]));
            for kind in ["verified", "predicted"] {
                for o in OBJECTIVES {
                    out.push(',');
                    if let Some(i) = col(&format!("{kind}_{o}")) {
                        out.push_str(cells[i]);
                    }
                }
            }
            out.push('\n');
        }
    }
    Ok(out)
}

/// One row per metric value.
pub fn metrics_table(sources: &[(String, PredictionReport)]) -> String {
    let mut out = String::from("source,target,metric,value\n");
    for (name, r) in sources {
        let name = field(name);
        for t in &r.targets {
            for (metric, v) in [("r2", t.r2), ("mape", t.mape)] {
                let v = v.map(|x| x.to_string()).unwrap_or_default();
                out.push_str(&format!("{name},{},{metric},{v}\n", t.target));
            }
        }
        if let Some(a) = r.critical_accuracy {
            out.push_str(&format!("{name},critical,accuracy,{a}\n"));
        }
    }
    out
}

pub enum Input {
    Frontier(String),
    Metrics(PredictionReport),
}

pub fn classify(path: &Path, text: String) -> Result<Input> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("csv") => Ok(Input::Frontier(text)),
        Some("json") => Ok(Input::Metrics(
            serde_json::from_str(&text).with_context(|| format!("{} is not a metrics report", path.display()))?,
        )),
        _ => bail!("{}: expected a .csv frontier or a .json metrics report", path.display()),
    }
}
