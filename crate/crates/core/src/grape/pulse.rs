use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Piecewise-constant RF amplitudes: `amplitudes[step][channel] = [x, y]` in Hz.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseSequence {
    /// Step length in seconds.
    pub dt: f64,
    pub amplitudes: Vec<Vec<[f64; 2]>>,
}

#[derive(Debug, Serialize, Deserialize)]
struct CsvRow {
    step: usize,
    channel: usize,
    amp_x_hz: f64,
    amp_y_hz: f64,
}

impl PulseSequence {
    pub fn new(dt: f64, amplitudes: Vec<Vec<[f64; 2]>>) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::Domain(format!("step length {dt} must be positive")));
        }
        if let Some(first) = amplitudes.first() {
            if amplitudes.iter().any(|s| s.len() != first.len()) {
                return Err(Error::Dimension("steps have different channel counts".into()));
            }
        }
        if amplitudes.iter().flatten().flatten().any(|a| !a.is_finite()) {
            return Err(Error::Validation("non-finite amplitude".into()));
        }
        Ok(PulseSequence { dt, amplitudes })
    }

    pub fn zeros(steps: usize, channels: usize, dt: f64) -> Result<Self> {
        PulseSequence::new(dt, vec![vec![[0.0; 2]; channels]; steps])
    }

    pub fn steps(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn channels(&self) -> usize {
        self.amplitudes.first().map_or(0, Vec::len)
    }

    pub fn duration(&self) -> f64 {
        self.dt * self.steps() as f64
    }

    /// Largest `√(x² + y²)` over all steps and channels.
    pub fn peak_amplitude(&self) -> f64 {
        self.amplitudes.iter().flatten().map(|[x, y]| x.hypot(*y)).fold(0.0, f64::max)
    }

    /// Scales any `(x, y)` pair whose magnitude exceeds `cap` back onto it.
    pub fn clip(&mut self, cap: f64) {
        for a in self.amplitudes.iter_mut().flatten() {
            let m = a[0].hypot(a[1]);
            if m > cap {
                a[0] *= cap / m;
                a[1] *= cap / m;
            }
        }
    }

    pub(crate) fn flat(&self) -> Vec<f64> {
        self.amplitudes.iter().flatten().flatten().copied().collect()
    }

    pub(crate) fn from_flat(&self, v: &[f64]) -> PulseSequence {
        let ch = self.channels();
        let amplitudes = (0..self.steps())
            .map(|k| (0..ch).map(|c| [v[2 * (k * ch + c)], v[2 * (k * ch + c) + 1]]).collect())
            .collect();
        PulseSequence { dt: self.dt, amplitudes }
    }

    /// CSV with header `step,channel,amp_x_hz,amp_y_hz`, 0-based step and 1-based channel.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for (step, row) in self.amplitudes.iter().enumerate() {
            for (ch, [x, y]) in row.iter().enumerate() {
                w.serialize(CsvRow { step, channel: ch + 1, amp_x_hz: *x, amp_y_hz: *y })?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R, dt: f64) -> Result<Self> {
        let mut rows: Vec<CsvRow> = Vec::new();
        for r in csv::Reader::from_reader(input).deserialize() {
            rows.push(r?);
        }
        let steps = rows.iter().map(|r| r.step + 1).max().unwrap_or(0);
        let channels = rows.iter().map(|r| r.channel).max().unwrap_or(0);
        if rows.iter().any(|r| r.channel == 0) || rows.len() != steps * channels {
            return Err(Error::Parse("pulse CSV must list every (step, channel) once".into()));
        }
        let mut amplitudes = vec![vec![[f64::NAN; 2]; channels]; steps];
        for r in rows {
            let slot = &mut amplitudes[r.step][r.channel - 1];
            if !slot[0].is_nan() {
                return Err(Error::Parse(format!("duplicate row {} {}", r.step, r.channel)));
            }
            *slot = [r.amp_x_hz, r.amp_y_hz];
        }
        PulseSequence::new(dt, amplitudes)
    }
}
