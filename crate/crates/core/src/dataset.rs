//! JSON Lines dataset files: one time series per line,
//! `{"id": "...", "n": <int>, "graphs": [[[i, j], ...], ...]}` with 0-indexed `i < j`.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, NetworkTimeSeries};

#[derive(Serialize, Deserialize)]
struct Record {
    id: String,
    n: usize,
    graphs: Vec<Vec<[usize; 2]>>,
}

impl From<&NetworkTimeSeries> for Record {
    fn from(s: &NetworkTimeSeries) -> Self {
        Record {
            id: s.id.clone(),
            n: s.n,
            graphs: s
                .graphs
                .iter()
                .map(|g| g.edges().map(|(i, j)| [i, j]).collect())
                .collect(),
        }
    }
}

pub fn write_nts<W: Write>(series: &[NetworkTimeSeries], mut w: W) -> Result<()> {
    for s in series {
        serde_json::to_writer(&mut w, &Record::from(s))?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_nts(series: &[NetworkTimeSeries], path: impl AsRef<Path>) -> Result<()> {
    let file = File::create(path.as_ref())?;
    write_nts(series, BufWriter::new(file))
}

/// Parses a dataset. `origin` only labels error messages.
pub fn read_nts<R: BufRead>(reader: R, origin: &Path) -> Result<Vec<NetworkTimeSeries>> {
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = |msg: String| Error::Parse {
            path: origin.to_path_buf(),
            line: lineno,
            msg,
        };
        let rec: Record = serde_json::from_str(&line).map_err(|e| parse_err(e.to_string()))?;
        let mut graphs = Vec::with_capacity(rec.graphs.len());
        for (t, edges) in rec.graphs.iter().enumerate() {
            let g = Graph::from_edges(rec.n, edges.iter().map(|&[i, j]| (i, j)))
                .map_err(|e| parse_err(format!("timestep {t}: {e}")))?;
            graphs.push(g);
        }
        out.push(NetworkTimeSeries::new(rec.id, rec.n, graphs));
    }
    Ok(out)
}

pub fn load_nts(path: impl AsRef<Path>) -> Result<Vec<NetworkTimeSeries>> {
    let path = path.as_ref();
    let file = File::open(path)?;
    read_nts(BufReader::new(file), path)
}
