//! Serialized forms of the analysis results.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analytic::SweepTable;
use crate::error::{Error, Result};
use crate::simulator::SimulationRun;
use crate::spectral::Spectrum;

/// Write to `path`, or to stdout when it is `None`.
pub fn emit(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            std::fs::write(p, bytes)?;
        }
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
        }
    }
    Ok(())
}

pub fn json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut s = serde_json::to_vec_pretty(value)?;
    s.push(b'\n');
    Ok(s)
}

/// `mode,lambda,omega,node,component`.
pub fn spectrum_csv(spectrum: &Spectrum) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["mode", "lambda", "omega", "node", "component"])?;
    for mu in 0..spectrum.n() {
        for i in 0..spectrum.n() {
            w.serialize((
                mu,
                spectrum.lambdas[mu],
                spectrum.omegas[mu],
                i,
                spectrum.component(mu, i),
            ))?;
        }
    }
    into_bytes(w)
}

/// `omega,node,energy`.
pub fn sweep_csv(table: &SweepTable) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["omega", "node", "energy"])?;
    for row in table.rows() {
        w.serialize(row)?;
    }
    into_bytes(w)
}

/// One row of a simulation CSV; `K_ma` is empty where the centred window
/// does not fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimRow {
    pub t: f64,
    pub node: usize,
    pub x: f64,
    pub v: f64,
    #[serde(rename = "K")]
    pub kinetic: f64,
    #[serde(rename = "K_ma")]
    pub kinetic_ma: Option<f64>,
}

/// `t,node,x,v,K,K_ma`, time-major.
pub fn simulation_csv(run: &SimulationRun) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for (s, &t) in run.times.iter().enumerate() {
        for i in 0..run.n() {
            w.serialize(SimRow {
                t,
                node: i,
                x: run.x[i][s],
                v: run.v[i][s],
                kinetic: run.kinetic[i][s],
                kinetic_ma: run.kinetic_ma_at(i, s),
            })?;
        }
    }
    into_bytes(w)
}

#[derive(Debug, Serialize)]
pub struct NodeSeries<'a> {
    pub node: usize,
    pub x: &'a [f64],
    pub v: &'a [f64],
    #[serde(rename = "K")]
    pub kinetic: &'a [f64],
    /// Starts at sample `ma_offset`.
    #[serde(rename = "K_ma")]
    pub kinetic_ma: &'a [f64],
}

pub fn node_series(run: &SimulationRun) -> Vec<NodeSeries<'_>> {
    (0..run.n())
        .map(|i| NodeSeries {
            node: i,
            x: &run.x[i],
            v: &run.v[i],
            kinetic: &run.kinetic[i],
            kinetic_ma: &run.kinetic_ma[i],
        })
        .collect()
}

/// Per-node series recovered from a simulation CSV.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct NodeTrace {
    pub times: Vec<f64>,
    pub x: Vec<f64>,
    pub ma_times: Vec<f64>,
    pub kinetic_ma: Vec<f64>,
}

pub fn read_simulation_csv<R: Read>(reader: R) -> Result<BTreeMap<usize, NodeTrace>> {
    let mut traces: BTreeMap<usize, NodeTrace> = BTreeMap::new();
    for row in csv::Reader::from_reader(reader).deserialize() {
        let row: SimRow = row?;
        let trace = traces.entry(row.node).or_default();
        trace.times.push(row.t);
        trace.x.push(row.x);
        if let Some(k) = row.kinetic_ma {
            trace.ma_times.push(row.t);
            trace.kinetic_ma.push(k);
        }
    }
    if traces.is_empty() {
        return Err(Error::InvalidParameter("simulation CSV has no rows".into()));
    }
    Ok(traces)
}

fn into_bytes(w: csv::Writer<Vec<u8>>) -> Result<Vec<u8>> {
    w.into_inner()
        .map_err(|e| Error::Io(e.into_error()))
}
