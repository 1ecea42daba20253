//! Text checkpoint of a [`TimeLoopState`].
//!
//! Layout, whitespace separated:
//!
//! ```text
//! nodal-mhd-checkpoint 1
//! ncomp ndof step time tau levels
//! <levels lines: time of each history level, most recent first>
//! <ndof viscosity values>
//! <ncomp*ndof values of U^n, component-major>
//! <ncomp*ndof values per history level, most recent first>
//! ```

use std::io::{BufRead, Write};

use super::TimeLoopState;
use crate::error::{Error, Result};
use crate::field::Field;
use crate::viscosity::ViscosityField;

const MAGIC: &str = "nodal-mhd-checkpoint 1";

pub fn write_checkpoint(state: &TimeLoopState, mut w: impl Write) -> Result<()> {
    writeln!(w, "{MAGIC}")?;
    writeln!(
        w,
        "{} {} {} {:e} {:e} {}",
        state.u.ncomp(),
        state.u.ndof(),
        state.step,
        state.time,
        state.tau,
        state.history.len()
    )?;
    for (_, t) in &state.history {
        writeln!(w, "{t:e}")?;
    }
    let mut dump = |xs: &[f64]| -> Result<()> {
        for x in xs {
            writeln!(w, "{x:e}")?;
        }
        Ok(())
    };
    dump(&state.eps.values)?;
    dump(state.u.as_slice())?;
    for (f, _) in &state.history {
        dump(f.as_slice())?;
    }
    Ok(())
}

pub fn read_checkpoint(r: impl BufRead) -> Result<TimeLoopState> {
    let mut tokens = Vec::new();
    let mut lines = r.lines();
    let first = lines.next().transpose()?.unwrap_or_default();
    if first.trim() != MAGIC {
        return Err(bad("missing checkpoint header"));
    }
    for line in lines {
        tokens.extend(line?.split_whitespace().map(str::to_owned));
    }
    let mut it = tokens.into_iter();
    let mut next = || it.next().ok_or_else(|| bad("truncated checkpoint"));
    let int = |s: String| s.parse::<usize>().map_err(|_| bad(&format!("bad integer '{s}'")));
    let real = |s: String| s.parse::<f64>().map_err(|_| bad(&format!("bad number '{s}'")));
    let ncomp = int(next()?)?;
    let ndof = int(next()?)?;
    let step = int(next()?)?;
    let time = real(next()?)?;
    let tau = real(next()?)?;
    let levels = int(next()?)?;
    let times = (0..levels).map(|_| real(next()?)).collect::<Result<Vec<_>>>()?;
    let mut field = |n: usize| (0..n).map(|_| real(next()?)).collect::<Result<Vec<_>>>();
    let eps = field(ndof)?;
    let as_field = |v: Vec<f64>| Field::from_components(v.chunks(ndof.max(1)).map(<[f64]>::to_vec).collect());
    let u = as_field(field(ncomp * ndof)?);
    let mut history = Vec::with_capacity(levels);
    for t in times {
        history.push((as_field(field(ncomp * ndof)?), t));
    }
    Ok(TimeLoopState {
        u,
        history,
        eps: ViscosityField { values: eps, time },
        time,
        tau,
        step,
    })
}

fn bad(msg: &str) -> Error {
    Error::Config(format!("checkpoint: {msg}"))
}
