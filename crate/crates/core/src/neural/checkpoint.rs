//! Text checkpoint of parameter values.
//!
//! ```text
//! xsrl-params 1
//! sidecar-sha256 <64 hex digits>
//! params <count>
//! <name> <frozen 0|1> <ndim> <dim>...
//! <row-major values, space separated>
//! ...
//! ```
//!
//! Values use the shortest exponent notation that round-trips, so a
//! checkpoint read and written again is byte-identical. Optimizer moments
//! are not stored.

use std::io::{BufRead, Write};

use super::{NeuralError, ParamStore, Tensor};

pub const MAGIC: &str = "xsrl-params";
pub const VERSION: u32 = 1;

fn bad(message: impl Into<String>) -> NeuralError {
    NeuralError::Checkpoint(message.into())
}

pub fn write_params<W: Write>(
    store: &ParamStore,
    sidecar_sha256: &str,
    mut w: W,
) -> Result<(), NeuralError> {
    let io = |e: std::io::Error| bad(e.to_string());
    writeln!(w, "{MAGIC} {VERSION}").map_err(io)?;
    writeln!(w, "sidecar-sha256 {sidecar_sha256}").map_err(io)?;
    writeln!(w, "params {}", store.len()).map_err(io)?;
    for (_, p) in store.iter() {
        let dims: Vec<String> = p.value.shape().iter().map(usize::to_string).collect();
        writeln!(
            w,
            "{} {} {} {}",
            p.name,
            u8::from(p.frozen),
            dims.len(),
            dims.join(" ")
        )
        .map_err(io)?;
        let mut line = String::new();
        for (i, v) in p.value.data().iter().enumerate() {
            if i > 0 {
                line.push(' ');
            }
            line.push_str(&format!("{v:e}"));
        }
        writeln!(w, "{line}").map_err(io)?;
    }
    w.flush().map_err(io)
}

/// Read a checkpoint; returns the parameters and the recorded sidecar digest.
pub fn read_params<R: BufRead>(r: R) -> Result<(ParamStore, String), NeuralError> {
    let mut lines = r.lines();
    let mut next = |what: &str| -> Result<String, NeuralError> {
        match lines.next() {
            Some(Ok(l)) => Ok(l),
            Some(Err(e)) => Err(bad(e.to_string())),
            None => Err(bad(format!("unexpected end of file, expected {what}"))),
        }
    };

    let header = next("header")?;
    if header != format!("{MAGIC} {VERSION}") {
        return Err(bad(format!("unsupported header {header:?}")));
    }
    let digest = next("sidecar digest")?
        .strip_prefix("sidecar-sha256 ")
        .map(str::to_string)
        .ok_or_else(|| bad("missing sidecar-sha256 line"))?;
    let count: usize = next("parameter count")?
        .strip_prefix("params ")
        .and_then(|n| n.parse().ok())
        .ok_or_else(|| bad("malformed params line"))?;

    let mut store = ParamStore::new();
    for _ in 0..count {
        let meta = next("parameter header")?;
        let fields: Vec<&str> = meta.split(' ').collect();
        if fields.len() < 3 {
            return Err(bad(format!("malformed parameter header {meta:?}")));
        }
        let frozen = match fields[1] {
            "0" => false,
            "1" => true,
            other => return Err(bad(format!("bad frozen flag {other:?}"))),
        };
        let ndim: usize = fields[2]
            .parse()
            .map_err(|_| bad(format!("bad rank in {meta:?}")))?;
        if fields.len() != 3 + ndim {
            return Err(bad(format!("rank {ndim} does not match dims in {meta:?}")));
        }
        let shape = fields[3..]
            .iter()
            .map(|d| {
                d.parse::<usize>()
                    .map_err(|_| bad(format!("bad dim {d:?}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let values_line = next("parameter values")?;
        let data = values_line
            .split(' ')
            .filter(|s| !s.is_empty())
            .map(|v| match v.parse::<f64>() {
                Ok(x) if x.is_finite() => Ok(x),
                _ => Err(bad(format!("bad value {v:?} in {}", fields[0]))),
            })
            .collect::<Result<Vec<_>, _>>()?;
        let tensor = Tensor::new(shape, data).map_err(|e| bad(format!("{}: {e}", fields[0])))?;
        store.add(fields[0], tensor, frozen)?;
    }
    Ok((store, digest))
}
