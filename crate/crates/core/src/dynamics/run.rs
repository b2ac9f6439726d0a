use crate::error::{Error, Result};

use super::integrator::Integrator;
use super::params::SimParams;
use super::state::ChainState;

pub const DEFAULT_OBSERVATION_INTERVAL: f64 = 1e-2;

/// Callback invoked at each point of the observation schedule.
pub trait Observer {
    fn observe(&mut self, state: &ChainState) -> Result<()>;
}

impl<F: FnMut(&ChainState) -> Result<()>> Observer for F {
    fn observe(&mut self, state: &ChainState) -> Result<()> {
        self(state)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub steps: u64,
    /// Times at which observers were called, starting with the initial time.
    pub observed: Vec<f64>,
    pub t_end: f64,
}

/// Advances `state` to `t_end`, calling every observer at the start and then every
/// `interval` time units (the final interval may be shorter). Each interval is split into
/// the smallest whole number of steps not exceeding `params.dt`, so the schedule is hit
/// exactly.
pub fn run(state: &mut ChainState, params: &SimParams, t_end: f64, interval: f64, observers: &mut [&mut dyn Observer]) -> Result<RunSummary> {
    let t0 = state.t;
    if !(t_end > t0) {
        return Err(Error::Precondition(format!("t_end = {t_end} must exceed the current time {t0}")));
    }
    if !(interval > 0.0) {
        return Err(Error::Precondition(format!("observation interval must be positive, got {interval}")));
    }
    let mut integ = Integrator::new(params.clone())?;
    let mut summary = RunSummary { steps: 0, observed: Vec::new(), t_end };
    let notify = |state: &ChainState, observers: &mut [&mut dyn Observer], summary: &mut RunSummary| -> Result<()> {
        for o in observers.iter_mut() {
            o.observe(state)?;
        }
        summary.observed.push(state.t);
        Ok(())
    };
    notify(state, observers, &mut summary)?;
    let intervals = ((t_end - t0) / interval * (1.0 - 1e-12)).ceil() as u64;
    for j in 1..=intervals {
        let start = state.t;
        let target = if j == intervals { t_end } else { t0 + j as f64 * interval };
        let span = target - start;
        let steps = (span / params.dt * (1.0 - 1e-12)).ceil().max(1.0) as u64;
        integ.set_dt(span / steps as f64);
        integ.advance(state, steps)?;
        state.t = target;
        summary.steps += steps;
        notify(state, observers, &mut summary)?;
    }
    Ok(summary)
}
