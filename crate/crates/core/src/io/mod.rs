//! Datasets, the EEGB container, synthetic data, and text reports.

mod eegb;
mod report;
mod synth;

pub use eegb::{decode_dataset, encode_dataset, load_dataset, save_dataset, EEGB_MAGIC, EEGB_VERSION};
pub use report::{read_report, write_report, Report, Section, REPORT_HEADER};
pub use synth::{generate_synthetic, SynthConfig};

use crate::csp::{ClassId, EegEpoch};
use crate::error::{Error, Result};

/// A labeled two-class recording session.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub subject_id: String,
    pub fs_hz: f64,
    pub class_names: [String; 2],
    /// Cue time within each trial, in seconds.
    pub cue_offset_s: f64,
    pub trials: Vec<EegEpoch>,
}

impl Dataset {
    pub fn new(
        subject_id: impl Into<String>,
        fs_hz: f64,
        class_names: [String; 2],
        cue_offset_s: f64,
        trials: Vec<EegEpoch>,
    ) -> Result<Self> {
        let d = Dataset { subject_id: subject_id.into(), fs_hz, class_names, cue_offset_s, trials };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fs_hz.is_finite() && self.fs_hz > 0.0) {
            return Err(Error::Parameter(format!("sampling rate must be positive, got {}", self.fs_hz)));
        }
        let first = self.trials.first().ok_or(Error::EmptyClass(1))?;
        let (channels, samples) = (first.channels(), first.samples());
        for (i, t) in self.trials.iter().enumerate() {
            if t.channels() != channels || t.samples() != samples {
                return Err(Error::Dimension(format!(
                    "trial {i} is {}x{}, expected {channels}x{samples}",
                    t.channels(),
                    t.samples()
                )));
            }
            if t.fs_hz != self.fs_hz {
                return Err(Error::Parameter(format!("trial {i} sampled at {} Hz, dataset at {} Hz", t.fs_hz, self.fs_hz)));
            }
        }
        for class in [1, 2] {
            if !self.trials.iter().any(|t| t.label == class) {
                return Err(Error::EmptyClass(class));
            }
        }
        let duration = samples as f64 / self.fs_hz;
        if !(self.cue_offset_s.is_finite() && (0.0..duration).contains(&self.cue_offset_s)) {
            return Err(Error::Parameter(format!(
                "cue offset {} s outside trial duration {duration} s",
                self.cue_offset_s
            )));
        }
        Ok(())
    }

    pub fn channels(&self) -> usize {
        self.trials[0].channels()
    }

    pub fn samples(&self) -> usize {
        self.trials[0].samples()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples() as f64 / self.fs_hz
    }

    pub fn labels(&self) -> Vec<ClassId> {
        self.trials.iter().map(|t| t.label).collect()
    }

    pub fn class_count(&self, class: ClassId) -> usize {
        self.trials.iter().filter(|t| t.label == class).count()
    }
}
