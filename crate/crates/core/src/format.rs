//! Text file format for count matrices.
//!
//! ```text
//! format = "snxp-count-matrix"
//! format_version = 1
//!
//! [config]
//! ...
//!
//! [truth]          # synthetic data only
//! ...
//! ---
//! <n_time_bins lines of n_detunings space-separated integers>
//! ```

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::synth::{CountMatrix, SweepConfig, Truth};

pub const FORMAT_NAME: &str = "snxp-count-matrix";
pub const FORMAT_VERSION: u32 = 1;
const SEPARATOR: &str = "---";

#[derive(Serialize, Deserialize)]
struct Header {
    format: String,
    format_version: u32,
    config: SweepConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    truth: Option<Truth>,
}

pub fn write_count_matrix(m: &CountMatrix) -> Result<String> {
    if m.config.rng_seed > i64::MAX as u64 {
        return Err(Error::Format(format!(
            "rng_seed {} does not fit the header",
            m.config.rng_seed
        )));
    }
    let header = Header {
        format: FORMAT_NAME.into(),
        format_version: FORMAT_VERSION,
        config: m.config,
        truth: m.truth.clone(),
    };
    let mut out = toml::to_string(&header).map_err(|e| Error::Format(e.to_string()))?;
    out.push_str(SEPARATOR);
    out.push('\n');
    for row in m.counts.rows() {
        let line: Vec<String> = row.iter().map(|c| c.to_string()).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    Ok(out)
}

pub fn read_count_matrix(text: &str) -> Result<CountMatrix> {
    let mut header_text = String::new();
    let mut lines = text.lines();
    let mut found = false;
    for line in lines.by_ref() {
        if line.trim_end() == SEPARATOR {
            found = true;
            break;
        }
        header_text.push_str(line);
        header_text.push('\n');
    }
    if !found {
        return Err(Error::Format("missing `---` line after the header".into()));
    }
    let header: Header =
        toml::from_str(&header_text).map_err(|e| Error::Format(format!("header: {e}")))?;
    if header.format != FORMAT_NAME {
        return Err(Error::Format(format!(
            "expected format `{FORMAT_NAME}`, found `{}`",
            header.format
        )));
    }
    if header.format_version != FORMAT_VERSION {
        return Err(Error::Format(format!(
            "unsupported format version {} (expected {FORMAT_VERSION})",
            header.format_version
        )));
    }
    let cfg = header.config;
    cfg.validate()?;
    let mut counts = Array2::zeros((cfg.n_time_bins, cfg.n_detunings));
    let mut rows = 0;
    for (k, line) in lines.filter(|l| !l.trim().is_empty()).enumerate() {
        if k >= cfg.n_time_bins {
            return Err(Error::Format(format!(
                "more than {} matrix rows",
                cfg.n_time_bins
            )));
        }
        let mut cols = 0;
        for (j, field) in line.split_whitespace().enumerate() {
            if j >= cfg.n_detunings {
                return Err(Error::Format(format!("row {k} has too many columns")));
            }
            counts[[k, j]] = field
                .parse::<u64>()
                .map_err(|e| Error::Format(format!("row {k}, column {j}: {e}")))?;
            cols += 1;
        }
        if cols != cfg.n_detunings {
            return Err(Error::Format(format!(
                "row {k} has {cols} columns, expected {}",
                cfg.n_detunings
            )));
        }
        rows += 1;
    }
    if rows != cfg.n_time_bins {
        return Err(Error::Format(format!(
            "{rows} matrix rows, expected {}",
            cfg.n_time_bins
        )));
    }
    CountMatrix::new(counts, cfg, header.truth)
}
