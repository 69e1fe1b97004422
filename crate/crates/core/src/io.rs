//! Persistence: run manifests, result tables, golden constants and the decay plot.

use std::io::{Read, Write};
use std::path::Path;

use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::TwoPointTable;
use crate::mcmc::{DecayRow, LoopStats};

/// Versioned golden constants shipped with the crate.
pub const GOLDEN_JSON: &str = include_str!("../fixtures/golden.json");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GoldenConstant {
    pub name: String,
    pub value: u64,
    pub method: String,
    pub note: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GoldenFile {
    pub version: u32,
    pub constants: Vec<GoldenConstant>,
}

pub fn golden() -> Result<GoldenFile> {
    Ok(serde_json::from_str(GOLDEN_JSON)?)
}

pub fn golden_value(name: &str) -> Result<u64> {
    golden()?
        .constants
        .into_iter()
        .find(|c| c.name == name)
        .map(|c| c.value)
        .ok_or_else(|| Error::InvalidArgument(format!("no golden constant named {name}")))
}

/// Record of one command invocation, written next to its outputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub params: serde_json::Value,
    pub seed: Option<u64>,
    pub fixture_version: u32,
    pub wall_clock_secs: f64,
    pub version: String,
}

impl RunManifest {
    pub fn new(command: &str, params: serde_json::Value, seed: Option<u64>) -> Result<RunManifest> {
        Ok(RunManifest {
            command: command.into(),
            params,
            seed,
            fixture_version: golden()?.version,
            wall_clock_secs: 0.0,
            version: env!("CARGO_PKG_VERSION").into(),
        })
    }
}

/// Exact or sampled two-point function with its provenance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableDocument {
    pub graph: String,
    pub params: serde_json::Value,
    pub kind: String,
    pub table: TwoPointTable,
}

/// One row of the results CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub observable: String,
    #[serde(rename = "L")]
    pub l: usize,
    #[serde(rename = "K")]
    pub k: usize,
    pub rho: f64,
    #[serde(rename = "N")]
    pub n: u32,
    pub value: f64,
    pub err: f64,
    pub n_sweeps: usize,
}

/// Flattens loop statistics and the walk table into result rows.
pub fn result_rows(stats: &LoopStats, table: Option<&TwoPointTable>, l: usize, k: usize) -> Vec<ResultRow> {
    let row = |observable: String, value: f64, err: f64| ResultRow {
        observable,
        l,
        k,
        rho: stats.rho,
        n: stats.n_colors,
        value,
        err,
        n_sweeps: stats.measured_sweeps,
    };
    let mut out = vec![
        row("closed_fraction".into(), stats.closed_fraction.value, stats.closed_fraction.err),
        row("mean_origin_loop".into(), stats.mean_origin_loop.value, stats.mean_origin_loop.err),
        row("loop_fraction".into(), stats.loop_fraction.value, stats.loop_fraction.err),
        row("monomer_density".into(), stats.monomer_density.value, stats.monomer_density.err),
        row("cesaro".into(), stats.cesaro.value, stats.cesaro.err),
    ];
    for (eps, e) in &stats.tails {
        out.push(row(format!("tail_{eps}"), e.value, e.err));
    }
    for (len, e) in stats.loop_len_dist.iter().enumerate() {
        out.push(row(format!("loop_len_{len}"), e.value, e.err));
    }
    for (x, e) in stats.connected.iter().enumerate() {
        out.push(row(format!("connected_{x}"), e.value, e.err));
    }
    for (kind, rate) in &stats.acceptance {
        out.push(row(format!("acceptance_{kind}"), *rate, 0.0));
    }
    if let Some(t) = table {
        for e in &t.entries {
            out.push(row(format!("walk_{}", e.y), e.value, e.err));
        }
    }
    out
}

pub fn write_csv<T: Serialize, W: Write>(w: W, rows: &[T]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for r in rows {
        wr.serialize(r)?;
    }
    wr.flush()?;
    Ok(())
}

pub fn read_csv<T: DeserializeOwned, R: Read>(r: R) -> Result<Vec<T>> {
    let mut rd = csv::Reader::from_reader(r);
    rd.deserialize().map(|x| x.map_err(Error::from)).collect()
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    serde_json::to_writer_pretty(&mut f, value)?;
    f.write_all(b"\n")?;
    Ok(())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    Ok(serde_json::from_reader(std::io::BufReader::new(std::fs::File::open(path)?))?)
}

/// Log-x SVG of Cesàro sums against `L` with error bars and the reference curve.
pub fn emit_decay_plot(csv_text: &str) -> Result<String> {
    let rows: Vec<DecayRow> = read_csv(csv_text.as_bytes())?;
    if rows.is_empty() {
        return Err(Error::InvalidArgument("decay CSV has no rows".into()));
    }
    let mut rows = rows;
    rows.sort_by_key(|r| r.l);
    let (w, h, m) = (640.0, 400.0, 60.0);
    let lx: Vec<f64> = rows.iter().map(|r| (r.l as f64).ln()).collect();
    let (x0, x1) = (lx[0] - 0.2, lx[lx.len() - 1] + 0.2);
    let ymax = rows.iter().map(|r| (r.cesaro + r.err).max(r.reference)).fold(0.0, f64::max) * 1.1;
    let ymax = if ymax > 0.0 { ymax } else { 1.0 };
    let px = |x: f64| m + (x - x0) / (x1 - x0) * (w - 2.0 * m);
    let py = |y: f64| h - m - y / ymax * (h - 2.0 * m);
    let mut s = String::new();
    s.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n"
    ));
    s.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    s.push_str(&format!(
        "<line class=\"axis\" x1=\"{m}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"black\"/>\n",
        h - m,
        w - m,
        h - m
    ));
    s.push_str(&format!("<line class=\"axis\" x1=\"{m}\" y1=\"{m}\" x2=\"{m}\" y2=\"{:.2}\" stroke=\"black\"/>\n", h - m));
    for (r, &x) in rows.iter().zip(&lx) {
        s.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"12\" text-anchor=\"middle\">{}</text>\n",
            px(x),
            h - m + 18.0,
            r.l
        ));
    }
    for i in 0..=4 {
        let y = ymax * i as f64 / 4.0;
        s.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"12\" text-anchor=\"end\">{:.3}</text>\n",
            m - 6.0,
            py(y) + 4.0,
            y
        ));
    }
    s.push_str(&format!(
        "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"13\" text-anchor=\"middle\">L (log scale), K = {}</text>\n",
        w / 2.0,
        h - 16.0,
        rows[0].k
    ));
    let pts: Vec<String> = rows.iter().zip(&lx).map(|(r, &x)| format!("{:.2},{:.2}", px(x), py(r.reference))).collect();
    s.push_str(&format!(
        "<polyline class=\"reference\" points=\"{}\" fill=\"none\" stroke=\"gray\" stroke-dasharray=\"6 4\"/>\n",
        pts.join(" ")
    ));
    for (r, &x) in rows.iter().zip(&lx) {
        s.push_str(&format!(
            "<line class=\"errorbar\" x1=\"{0:.2}\" y1=\"{1:.2}\" x2=\"{0:.2}\" y2=\"{2:.2}\" stroke=\"black\"/>\n",
            px(x),
            py((r.cesaro - r.err).max(0.0)),
            py(r.cesaro + r.err)
        ));
        s.push_str(&format!(
            "<circle class=\"marker\" cx=\"{:.2}\" cy=\"{:.2}\" r=\"4\" fill=\"steelblue\"/>\n",
            px(x),
            py(r.cesaro)
        ));
    }
    s.push_str("</svg>\n");
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows() -> Vec<DecayRow> {
        [(8, 0.13), (16, 0.09), (32, 0.046)]
            .iter()
            .map(|&(l, c)| DecayRow {
                l,
                k: 1,
                cesaro: c,
                err: 0.002,
                reference: 0.13 * ((8f64).ln() / (l as f64).ln()).sqrt(),
                loop_fraction: c / 2.0,
                loop_err: 0.001,
                loop_reference: 0.065,
                converged: true,
            })
            .collect()
    }

    #[test]
    fn golden_constants_load() {
        assert_eq!(golden_value("dimer_covers_torus4x1").unwrap(), 272);
        assert!(golden_value("missing").is_err());
    }

    #[test]
    fn decay_csv_round_trip_and_plot() {
        let mut buf = Vec::new();
        write_csv(&mut buf, &rows()).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("L,K,cesaro,err,reference,"));
        let back: Vec<DecayRow> = read_csv(text.as_bytes()).unwrap();
        assert_eq!(back, rows());
        let svg = emit_decay_plot(&text).unwrap();
        assert_eq!(svg.matches("class=\"marker\"").count(), 3);
        assert_eq!(svg.matches("class=\"reference\"").count(), 1);
        assert_eq!(svg, emit_decay_plot(&text).unwrap());
        assert!(emit_decay_plot("L,K,cesaro,err,reference,loop_fraction,loop_err,loop_reference,converged\n").is_err());
    }

    #[test]
    fn manifest_round_trip() {
        let m = RunManifest::new("sample", serde_json::json!({"rho": 1.0}), Some(3)).unwrap();
        let dir = std::env::temp_dir().join(format!("loopforge-io-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let p = dir.join("manifest.json");
        write_json(&p, &m).unwrap();
        let back: RunManifest = read_json(&p).unwrap();
        assert_eq!(back, m);
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
