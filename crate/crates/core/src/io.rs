//! File formats: the observation interchange CSV and the Pd curve CSV.
//!
//! Observation files hold one complex sample per row:
//!
//! ```text
//! transmitter,channel,receiver,sample,re,im
//! 0,s,0,0,0.125,-1.5
//! ```
//!
//! `channel` is `s` (surveillance), `r` (reference) or `u` (known
//! transmitted signal, receiver always 0). Reference and known-signal rows
//! are optional but must cover every sample when present. Floats are
//! written in shortest round-trip form, so reading a written file restores
//! the exact values.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::{Observations, TransmitterObservation};
use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::montecarlo::PdCurve;

#[derive(Debug, Serialize, Deserialize)]
struct SampleRow {
    transmitter: usize,
    channel: char,
    receiver: usize,
    sample: usize,
    re: f64,
    im: f64,
}

fn csv_error(e: csv::Error) -> Error {
    match e.kind() {
        csv::ErrorKind::Io(_) => Error::Io(e.to_string()),
        _ => Error::Malformed(e.to_string()),
    }
}

pub fn write_observations<W: Write>(obs: &Observations, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut emit = |transmitter, channel, receiver, sample, z: Complex64| {
        w.serialize(SampleRow {
            transmitter,
            channel,
            receiver,
            sample,
            re: z.re,
            im: z.im,
        })
        .map_err(csv_error)
    };
    for (i, t) in obs.transmitters.iter().enumerate() {
        let mut matrix = |channel, phi: &ComplexMatrix| -> Result<()> {
            for j in 0..phi.cols() {
                for k in 0..phi.rows() {
                    emit(i, channel, j, k, phi[(k, j)])?;
                }
            }
            Ok(())
        };
        matrix('s', &t.phi_s)?;
        if let Some(r) = &t.phi_r {
            matrix('r', r)?;
        }
        if let Some(u) = &t.u {
            for (k, &z) in u.iter().enumerate() {
                emit(i, 'u', 0, k, z)?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Default)]
struct Collected {
    s: BTreeMap<(usize, usize), Complex64>,
    r: BTreeMap<(usize, usize), Complex64>,
    u: BTreeMap<usize, Complex64>,
}

pub fn read_observations<R: Read>(input: R) -> Result<Observations> {
    let mut rdr = csv::Reader::from_reader(input);
    let mut per_tx: BTreeMap<usize, Collected> = BTreeMap::new();
    for (line, row) in rdr.deserialize::<SampleRow>().enumerate() {
        let row = row.map_err(csv_error)?;
        let z = Complex64::new(row.re, row.im);
        if !z.re.is_finite() || !z.im.is_finite() {
            return Err(Error::Malformed(format!(
                "row {}: non-finite value",
                line + 1
            )));
        }
        let c = per_tx.entry(row.transmitter).or_default();
        let fresh = match row.channel {
            's' => c.s.insert((row.sample, row.receiver), z).is_none(),
            'r' => c.r.insert((row.sample, row.receiver), z).is_none(),
            'u' if row.receiver == 0 => c.u.insert(row.sample, z).is_none(),
            'u' => {
                return Err(Error::Malformed(format!(
                    "row {}: known signal has receiver 0",
                    line + 1
                )))
            }
            other => {
                return Err(Error::Malformed(format!(
                    "row {}: unknown channel `{other}`",
                    line + 1
                )))
            }
        };
        if !fresh {
            return Err(Error::Malformed(format!(
                "row {}: duplicate entry",
                line + 1
            )));
        }
    }
    if per_tx.is_empty() {
        return Err(Error::Malformed("no observations".into()));
    }
    if *per_tx.keys().last().unwrap() + 1 != per_tx.len() {
        return Err(Error::Malformed(
            "transmitter indices are not contiguous".into(),
        ));
    }

    let mut transmitters = Vec::with_capacity(per_tx.len());
    for (i, c) in per_tx {
        let n = c.s.keys().map(|k| k.0 + 1).max().unwrap_or(0);
        let nr = c.s.keys().map(|k| k.1 + 1).max().unwrap_or(0);
        let dense =
            |m: &BTreeMap<(usize, usize), Complex64>, name: &str| -> Result<ComplexMatrix> {
                if m.len() != n * nr || m.keys().any(|&(k, j)| k >= n || j >= nr) {
                    return Err(Error::Malformed(format!(
                    "transmitter {i}: {name} channel does not cover {n} samples x {nr} receivers"
                )));
                }
                Ok(ComplexMatrix::from_fn(n, nr, |k, j| m[&(k, j)]))
            };
        let phi_s = dense(&c.s, "surveillance")?;
        let phi_r = if c.r.is_empty() {
            None
        } else {
            Some(dense(&c.r, "reference")?)
        };
        let u = if c.u.is_empty() {
            None
        } else if c.u.len() == n && c.u.keys().all(|&k| k < n) {
            Some(c.u.into_values().collect())
        } else {
            return Err(Error::Malformed(format!(
                "transmitter {i}: known signal length != {n}"
            )));
        };
        transmitters.push(TransmitterObservation { phi_s, phi_r, u });
    }
    Ok(Observations { transmitters })
}

/// One row of `curves.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub detector: String,
    pub snr_db: f64,
    pub pd: f64,
    pub stderr: f64,
}

/// Writes curves with columns `detector,snr_db,pd,stderr`.
pub fn write_curves<W: Write>(curves: &[PdCurve], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for c in curves {
        for p in &c.points {
            w.serialize(CurveRow {
                detector: c.detector.name().to_string(),
                snr_db: p.snr_db,
                pd: p.pd,
                stderr: p.stderr,
            })
            .map_err(csv_error)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_curves<R: Read>(input: R) -> Result<Vec<CurveRow>> {
    csv::Reader::from_reader(input)
        .deserialize()
        .map(|r| r.map_err(csv_error))
        .collect()
}
