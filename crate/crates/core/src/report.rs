//! Run output containers shared by all models.

use serde::{Deserialize, Serialize};

/// Kind of loss-of-regularity signal raised during a run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OnsetKind {
    None,
    TailOscillation,
    Overflow,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OnsetReport {
    pub kind: OnsetKind,
    pub t_onset: Option<f64>,
    /// `(t, tau)` pairs of the tail-ratio indicator.
    pub trace: Vec<(f64, f64)>,
}

impl OnsetReport {
    pub fn none(trace: Vec<(f64, f64)>) -> Self {
        Self {
            kind: OnsetKind::None,
            t_onset: None,
            trace,
        }
    }

    pub fn is_none(&self) -> bool {
        self.kind == OnsetKind::None
    }
}

/// One row of the diagnostics time series. Fields that do not apply to the
/// model are left as `None`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticRow {
    pub step: usize,
    pub t: f64,
    pub tail_ratio: f64,
    /// Sum of squared u-coefficients (over all nodes for radial models).
    pub energy: f64,
    /// Toy models: max |u|; radial models: max |v1| on the symmetry axis.
    pub peak_value: f64,
    /// Position of `peak_value` (angle for toy models, radius otherwise).
    pub peak_position: f64,
    /// Toy models: max |u'|; radial models: max |dv1/dr| on the axis.
    pub max_gradient: f64,
    pub zero_mode: f64,
    pub l2_velocity: Option<f64>,
    pub compat_residual: Option<f64>,
    pub asymmetry: Option<f64>,
}

/// A coefficient pair at one mode (and node, for radial models).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoeffEntry {
    pub n: usize,
    pub l: Option<usize>,
    pub node: Option<usize>,
    pub r: Option<f64>,
    pub c: f64,
    pub d: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub step: usize,
    pub t: f64,
    pub entries: Vec<CoeffEntry>,
}

/// A sampled curve, e.g. `u(phi)` or `v1(r)` on the axis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    pub t: f64,
    pub name: String,
    pub coordinate: Vec<f64>,
    pub value: Vec<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub diagnostics: Vec<DiagnosticRow>,
    pub snapshots: Vec<Snapshot>,
    pub profiles: Vec<Profile>,
    pub onset: Option<OnsetReport>,
    pub steps: usize,
    pub t_end: f64,
}

impl RunReport {
    pub fn onset(&self) -> &OnsetReport {
        static NONE: OnsetReport = OnsetReport {
            kind: OnsetKind::None,
            t_onset: None,
            trace: Vec::new(),
        };
        self.onset.as_ref().unwrap_or(&NONE)
    }

    /// Diagnostics row whose time is closest to `t`.
    pub fn row_near(&self, t: f64) -> Option<&DiagnosticRow> {
        self.diagnostics
            .iter()
            .min_by(|a, b| (a.t - t).abs().total_cmp(&(b.t - t).abs()))
    }

    /// Profiles named `name`, in time order.
    pub fn profiles_named<'a>(&'a self, name: &'a str) -> impl Iterator<Item = &'a Profile> + 'a {
        self.profiles.iter().filter(move |p| p.name == name)
    }
}

/// Output cadences shared by the time-dependent models.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cadence {
    /// Steps between diagnostics rows (and onset-detector samples).
    pub diag_every: usize,
    /// Steps between coefficient snapshots and profile curves.
    pub snapshot_every: usize,
    pub stop_on_onset: bool,
}

impl Default for Cadence {
    fn default() -> Self {
        Self {
            diag_every: 10,
            snapshot_every: 100,
            stop_on_onset: true,
        }
    }
}

impl Cadence {
    pub(crate) fn diag_due(&self, step: usize, last: bool) -> bool {
        last || step.is_multiple_of(self.diag_every.max(1))
    }

    pub(crate) fn snapshot_due(&self, step: usize, last: bool) -> bool {
        last || step.is_multiple_of(self.snapshot_every.max(1))
    }
}
