use crate::error::{Error, Result};

/// Photon detection times of one channel, in integer picoseconds.
///
/// Timestamps are strictly increasing and never exceed `duration`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TimeTagStream {
    channel: u8,
    timestamps: Vec<u64>,
    duration: u64,
}

impl TimeTagStream {
    pub fn new(channel: u8, timestamps: Vec<u64>, duration: u64) -> Result<Self> {
        if let Some(i) = timestamps.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::Validation(format!(
                "timestamps not strictly increasing at index {} ({} then {})",
                i + 1,
                timestamps[i],
                timestamps[i + 1]
            )));
        }
        if let Some(&last) = timestamps.last() {
            if last > duration {
                return Err(Error::Validation(format!(
                    "timestamp {last} ps exceeds duration {duration} ps"
                )));
            }
        }
        Ok(TimeTagStream {
            channel,
            timestamps,
            duration,
        })
    }

    pub fn empty(channel: u8, duration: u64) -> Self {
        TimeTagStream {
            channel,
            timestamps: Vec::new(),
            duration,
        }
    }

    pub(crate) fn from_sorted_unchecked(channel: u8, timestamps: Vec<u64>, duration: u64) -> Self {
        debug_assert!(timestamps.windows(2).all(|w| w[0] < w[1]));
        TimeTagStream {
            channel,
            timestamps,
            duration,
        }
    }

    pub fn channel(&self) -> u8 {
        self.channel
    }

    pub fn with_channel(mut self, channel: u8) -> Self {
        self.channel = channel;
        self
    }

    pub fn timestamps(&self) -> &[u64] {
        &self.timestamps
    }

    pub fn into_timestamps(self) -> Vec<u64> {
        self.timestamps
    }

    /// Acquisition duration in picoseconds.
    pub fn duration(&self) -> u64 {
        self.duration
    }

    pub fn len(&self) -> usize {
        self.timestamps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.timestamps.is_empty()
    }

    /// Mean detection rate in counts per second.
    pub fn mean_rate(&self) -> f64 {
        if self.duration == 0 {
            return 0.0;
        }
        self.timestamps.len() as f64 / (self.duration as f64 * 1e-12)
    }

    /// Appends `other` shifted to start after this stream's acquisition window.
    pub fn concat(&self, other: &TimeTagStream) -> TimeTagStream {
        let offset = self.duration;
        let mut ts = self.timestamps.clone();
        ts.extend(other.timestamps.iter().map(|t| t + offset));
        // a tag at exactly `offset` would collide only if both streams used it
        ts.dedup();
        TimeTagStream {
            channel: self.channel,
            timestamps: ts,
            duration: self.duration + other.duration,
        }
    }
}
