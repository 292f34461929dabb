//! Pinned configurations for each figure and the exponent table.

use crate::config::Experiment;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pipeline {
    Sweep(Experiment),
    /// Equilibrium `F_Q(h -> 0)` and peak per `(a, L)`, with exponent fits.
    EqScaling,
    /// Dynamic figure of merit at `h -> 0` and at its peak per `(a, L)`.
    DynScaling,
    /// Peak search, then full series at `h -> 0`, at the peak and at `h`.
    DynPeakSeries,
    /// Runs the scaling presets and collects their meta-fits.
    Table,
}

#[derive(Debug, Clone, Copy)]
pub struct Preset {
    pub id: &'static str,
    pub pipeline: Pipeline,
    pub text: &'static str,
}

macro_rules! preset {
    ($id:literal, $pipeline:expr) => {
        Preset {
            id: $id,
            pipeline: $pipeline,
            text: include_str!(concat!("../presets/", $id, ".conf")),
        }
    };
}

pub const PRESETS: &[Preset] = &[
    preset!("fig1a", Pipeline::Sweep(Experiment::EqSweep)),
    preset!("fig1b", Pipeline::EqScaling),
    preset!("fig1c", Pipeline::EqScaling),
    preset!("fig2a", Pipeline::Sweep(Experiment::EqSweep)),
    preset!("fig2b", Pipeline::EqScaling),
    preset!("fig2c", Pipeline::EqScaling),
    preset!("fig3a", Pipeline::Sweep(Experiment::EqSweep)),
    preset!("fig3b", Pipeline::EqScaling),
    preset!("fig4a", Pipeline::Sweep(Experiment::GapScan)),
    preset!("fig4b", Pipeline::Sweep(Experiment::GapScan)),
    preset!("fig5a", Pipeline::Sweep(Experiment::DynSweep)),
    preset!("fig5b", Pipeline::Sweep(Experiment::DynSweep)),
    preset!("fig5c", Pipeline::DynScaling),
    preset!("fig5d", Pipeline::DynScaling),
    preset!("fig6a", Pipeline::DynPeakSeries),
    preset!("fig6b", Pipeline::Sweep(Experiment::DynSweep)),
    preset!("fig6c", Pipeline::Sweep(Experiment::DynSweep)),
    preset!("fig6d", Pipeline::DynScaling),
    preset!("table1", Pipeline::Table),
];

pub fn preset(id: &str) -> Option<&'static Preset> {
    PRESETS.iter().find(|p| p.id == id)
}
