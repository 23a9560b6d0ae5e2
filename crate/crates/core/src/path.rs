//! Discretely sampled multichannel paths and the per-round context windows
//! cut from them.
//!
//! Samples are stored row-major: row `i` holds the `channels` values observed
//! at `times[i]`. Windows include both endpoints, so consecutive windows share
//! their boundary sample.

use crate::error::{Error, Result};

/// Which extremum [`DiscretePath::channel_extremum`] returns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extremum {
    Max,
    Min,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscretePath {
    times: Vec<f64>,
    values: Vec<f64>,
    channels: usize,
}

impl DiscretePath {
    /// Builds a path from timestamps and row-major values.
    ///
    /// Timestamps must be strictly increasing and every entry finite. A single
    /// sample is accepted (window statistics are defined for it), but
    /// signatures need at least two.
    pub fn from_flat(times: Vec<f64>, values: Vec<f64>, channels: usize) -> Result<Self> {
        if channels == 0 {
            return Err(Error::InvalidPath(
                "a path needs at least one channel".into(),
            ));
        }
        if times.is_empty() {
            return Err(Error::InvalidPath(
                "a path needs at least one sample".into(),
            ));
        }
        if values.len() != times.len() * channels {
            return Err(Error::InvalidPath(format!(
                "{} values do not fill {} samples x {} channels",
                values.len(),
                times.len(),
                channels
            )));
        }
        if let Some(bad) = times.iter().chain(values.iter()).find(|v| !v.is_finite()) {
            return Err(Error::InvalidPath(format!("non-finite entry {bad}")));
        }
        if let Some(w) = times.windows(2).find(|w| w[1] <= w[0]) {
            return Err(Error::InvalidPath(format!(
                "timestamps not strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        Ok(Self {
            times,
            values,
            channels,
        })
    }

    pub fn from_rows(times: Vec<f64>, rows: &[Vec<f64>]) -> Result<Self> {
        let channels = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != channels) {
            return Err(Error::InvalidPath("ragged sample rows".into()));
        }
        Self::from_flat(times, rows.concat(), channels)
    }

    /// Single-channel convenience constructor.
    pub fn scalar(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        Self::from_flat(times, values, 1)
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.channels..(i + 1) * self.channels]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.channels)
    }

    pub fn first_row(&self) -> &[f64] {
        self.row(0)
    }

    pub fn start_time(&self) -> f64 {
        self.times[0]
    }

    pub fn end_time(&self) -> f64 {
        self.times[self.times.len() - 1]
    }

    pub fn channel(&self, channel: usize) -> Result<impl Iterator<Item = f64> + '_> {
        if channel >= self.channels {
            return Err(Error::BadChannel {
                channel,
                channels: self.channels,
            });
        }
        Ok(self.rows().map(move |r| r[channel]))
    }

    fn grid_index(&self, t: f64) -> Result<usize> {
        let i = self.times.partition_point(|&s| s < t);
        match self.times.get(i) {
            Some(&s) if s == t => Ok(i),
            _ => Err(Error::GridMismatch(t)),
        }
    }

    /// Samples with `t_start <= time <= t_end`. Both endpoints must be exact
    /// grid timestamps.
    pub fn slice_window(&self, t_start: f64, t_end: f64) -> Result<DiscretePath> {
        if !(t_start < t_end) {
            return Err(Error::InvalidRange {
                start: t_start,
                end: t_end,
            });
        }
        let lo = self.grid_index(t_start)?;
        let hi = self.grid_index(t_end)?;
        Ok(self.slice_indices(lo, hi))
    }

    /// Rows `lo..=hi`; indices must be valid with `lo <= hi`.
    pub(crate) fn slice_indices(&self, lo: usize, hi: usize) -> DiscretePath {
        DiscretePath {
            times: self.times[lo..=hi].to_vec(),
            values: self.values[lo * self.channels..(hi + 1) * self.channels].to_vec(),
            channels: self.channels,
        }
    }

    /// Prepends the timestamp as channel 0. Not idempotent: augmenting twice
    /// yields two time channels.
    pub fn time_augment(&self) -> DiscretePath {
        let channels = self.channels + 1;
        let mut values = Vec::with_capacity(self.len() * channels);
        for (t, row) in self.times.iter().zip(self.rows()) {
            values.push(*t);
            values.extend_from_slice(row);
        }
        DiscretePath {
            times: self.times.clone(),
            values,
            channels,
        }
    }

    /// Shifts all timestamps so the path starts at time 0.
    pub fn shift_to_origin(&self) -> DiscretePath {
        let t0 = self.times[0];
        DiscretePath {
            times: self.times.iter().map(|t| t - t0).collect(),
            values: self.values.clone(),
            channels: self.channels,
        }
    }

    /// Per-channel arithmetic mean of the sample rows.
    pub fn mean_value(&self) -> Vec<f64> {
        let mut acc = vec![0.0; self.channels];
        for row in self.rows() {
            for (a, v) in acc.iter_mut().zip(row) {
                *a += v;
            }
        }
        let n = self.len() as f64;
        acc.iter_mut().for_each(|a| *a /= n);
        acc
    }

    pub fn channel_extremum(&self, channel: usize, mode: Extremum) -> Result<f64> {
        let it = self.channel(channel)?;
        Ok(match mode {
            Extremum::Max => it.fold(f64::NEG_INFINITY, f64::max),
            Extremum::Min => it.fold(f64::INFINITY, f64::min),
        })
    }

    /// Replaces each sample `v` by `ln(v / v_first)` channelwise.
    pub fn log_normalize(&self) -> Result<DiscretePath> {
        if let Some(&bad) = self.values.iter().find(|&&v| v <= 0.0) {
            return Err(Error::NonPositiveValue(bad));
        }
        let first = self.first_row().to_vec();
        let values = self
            .rows()
            .flat_map(|row| row.iter().zip(&first).map(|(v, f)| (v / f).ln()))
            .collect();
        Ok(DiscretePath {
            times: self.times.clone(),
            values,
            channels: self.channels,
        })
    }
}

/// The context observed at one round: the path restricted to
/// `[round - length, round]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Window {
    pub round: usize,
    pub path: DiscretePath,
    pub length: f64,
}

impl Window {
    pub fn new(round: usize, path: DiscretePath) -> Self {
        let length = path.end_time() - path.start_time();
        Self {
            round,
            path,
            length,
        }
    }
}
