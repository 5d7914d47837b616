//! Reversible-jump updates of SIR infection and recovery times.
//!
//! Each individual's trajectory is described by an optional infection time
//! (first infective time-point) and an optional recovery time (first
//! recovered time-point). An update picks an individual and one of the
//! applicable moves uniformly:
//!
//! * move: shift one existing event, chosen uniformly, to a uniform time in
//!   its feasible window (infection before recovery, recovery after
//!   infection);
//! * add: add an infection uniformly on `0..T` if there is none, else a
//!   recovery uniformly after the infection;
//! * remove: delete the last event (the recovery if present, else the
//!   infection).
//!
//! The target is the full latent density over all individuals, since one
//! trajectory changes everyone's infection pressure.

use rand::Rng;

use crate::chmm::{log_prior, EmissionTable, HiddenStateMatrix, ModelSpec, State};
use crate::error::{Error, Result};
use crate::kernel::{observation_loglik, LatentKernel, UpdateRecord};
use crate::random::{open_unit, SamplerRng};

const SUSCEPTIBLE: State = 0;
const INFECTIVE: State = 1;
const RECOVERED: State = 2;

/// Event times of one individual, 0-based time indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EventTimes {
    pub infection: Option<usize>,
    pub recovery: Option<usize>,
}

impl EventTimes {
    pub fn new(infection: Option<usize>, recovery: Option<usize>) -> Result<Self> {
        let e = Self { infection, recovery };
        e.validate(usize::MAX)?;
        Ok(e)
    }

    fn validate(&self, num_timepoints: usize) -> Result<()> {
        let bad = match (self.infection, self.recovery) {
            (None, Some(_)) => true,
            (Some(a), Some(b)) => b <= a || b >= num_timepoints,
            (Some(a), None) => a >= num_timepoints,
            (None, None) => false,
        };
        if bad {
            return Err(Error::InvalidParameter(format!(
                "inconsistent event times: infection {:?}, recovery {:?}",
                self.infection, self.recovery
            )));
        }
        Ok(())
    }

    pub fn num_events(&self) -> usize {
        self.infection.is_some() as usize + self.recovery.is_some() as usize
    }
}

/// The trajectory `S..S I..I R..R` described by `events`.
pub fn events_to_states(events: &EventTimes, num_timepoints: usize) -> Result<Vec<State>> {
    events.validate(num_timepoints)?;
    Ok((0..num_timepoints)
        .map(|t| match (events.infection, events.recovery) {
            (_, Some(b)) if t >= b => RECOVERED,
            (Some(a), _) if t >= a => INFECTIVE,
            _ => SUSCEPTIBLE,
        })
        .collect())
}

/// Event times of an SIR trajectory; fails unless the trajectory is
/// `S..S I..I R..R` with at least one infective time-point before any
/// recovery.
pub fn states_to_events(trajectory: &[State]) -> Result<EventTimes> {
    if trajectory.windows(2).any(|w| w[1] < w[0]) || trajectory.iter().any(|&s| s > RECOVERED) {
        return Err(Error::InvalidParameter(format!(
            "not an SIR trajectory: {trajectory:?}"
        )));
    }
    let infection = trajectory.iter().position(|&s| s >= INFECTIVE);
    let recovery = trajectory.iter().position(|&s| s == RECOVERED);
    let e = EventTimes { infection, recovery };
    e.validate(trajectory.len())?;
    Ok(e)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Move {
    Shift,
    Add,
    Remove,
}

fn applicable_moves(e: &EventTimes, num_timepoints: usize) -> Vec<Move> {
    let mut moves = Vec::with_capacity(3);
    if e.infection.is_some() {
        moves.push(Move::Shift);
    }
    let can_add = match (e.infection, e.recovery) {
        (None, _) => true,
        (Some(a), None) => a + 1 < num_timepoints,
        (Some(_), Some(_)) => false,
    };
    if can_add {
        moves.push(Move::Add);
    }
    if e.infection.is_some() {
        moves.push(Move::Remove);
    }
    moves
}

/// Number of times an added recovery can take after infection at `a`.
fn recovery_window(a: usize, num_timepoints: usize) -> usize {
    num_timepoints - 1 - a
}

/// A proposal for one individual and its log proposal ratio
/// `log q(e | e*) - log q(e* | e)`.
fn propose<R: Rng + ?Sized>(e: &EventTimes, num_timepoints: usize, rng: &mut R) -> (EventTimes, f64) {
    let t_count = num_timepoints;
    let moves = applicable_moves(e, t_count);
    let mv = moves[rng.gen_range(0..moves.len())];
    let mut next = *e;
    let log_window_ratio = match mv {
        Move::Shift => {
            let pick_recovery = e.recovery.is_some() && rng.gen_bool(0.5);
            if pick_recovery {
                let a = e.infection.expect("recovery implies infection");
                next.recovery = Some(rng.gen_range(a + 1..t_count));
            } else {
                let upper = e.recovery.unwrap_or(t_count);
                next.infection = Some(rng.gen_range(0..upper));
            }
            0.0
        }
        Move::Add => match e.infection {
            None => {
                next.infection = Some(rng.gen_range(0..t_count));
                (t_count as f64).ln()
            }
            Some(a) => {
                next.recovery = Some(rng.gen_range(a + 1..t_count));
                (recovery_window(a, t_count) as f64).ln()
            }
        },
        Move::Remove => {
            if e.recovery.is_some() {
                next.recovery = None;
                let a = e.infection.expect("recovery implies infection");
                -(recovery_window(a, t_count) as f64).ln()
            } else {
                next.infection = None;
                -(t_count as f64).ln()
            }
        }
    };
    let reverse_moves = applicable_moves(&next, t_count).len();
    let log_q = (moves.len() as f64).ln() - (reverse_moves as f64).ln() + log_window_ratio;
    (next, log_q)
}

/// Reversible-jump sampler for the SIR model (states 0, 1, 2).
#[derive(Debug, Clone)]
pub struct RjmcmcSampler<M> {
    model: M,
    emissions: EmissionTable,
    x: HiddenStateMatrix,
    events: Vec<EventTimes>,
    log_target: f64,
}

impl<M: ModelSpec> RjmcmcSampler<M> {
    pub fn new(model: M, emissions: EmissionTable, x0: HiddenStateMatrix) -> Result<Self> {
        let unsupported = |reason: &str| Error::UnsupportedKernel {
            kernel: "rjmcmc-sir".into(),
            reason: reason.into(),
        };
        if model.num_states() != 3 {
            return Err(unsupported("needs a three-state SIR model"));
        }
        let mut probs = [0.0; 3];
        for j in 0..x0.num_individuals() {
            model.initial_probs(j, &mut probs);
            if probs[RECOVERED] > 0.0 {
                return Err(unsupported("individuals may not start recovered"));
            }
        }
        emissions.check_shape(x0.num_timepoints(), x0.num_individuals())?;
        let events = (0..x0.num_individuals())
            .map(|j| states_to_events(&x0.column(j)))
            .collect::<Result<Vec<_>>>()?;
        let log_target = log_prior(&model, &x0) + observation_loglik(&x0, &emissions);
        if log_target == f64::NEG_INFINITY {
            return Err(Error::InvalidParameter(
                "initial latent state has zero posterior density".into(),
            ));
        }
        Ok(Self {
            model,
            emissions,
            x: x0,
            events,
            log_target,
        })
    }

    pub fn events(&self) -> &[EventTimes] {
        &self.events
    }
}

/// One reversible-jump update.
pub fn rj_update<M: ModelSpec>(sampler: &mut RjmcmcSampler<M>, rng: &mut SamplerRng) -> UpdateRecord {
    let t_count = sampler.x.num_timepoints();
    let i = rng.gen_range(0..sampler.x.num_individuals());
    let (next, log_q) = propose(&sampler.events[i], t_count, rng);
    let old_column = sampler.x.column(i);
    let new_column = events_to_states(&next, t_count).expect("proposals keep events ordered");
    let ripple_size = old_column.iter().zip(&new_column).filter(|(a, b)| a != b).count();
    sampler.x.set_column(i, &new_column);
    let log_target =
        log_prior(&sampler.model, &sampler.x) + observation_loglik(&sampler.x, &sampler.emissions);
    let mut log_ratio = log_target - sampler.log_target + log_q;
    if log_ratio.is_nan() {
        log_ratio = f64::NEG_INFINITY;
    }
    let accepted = log_ratio >= 0.0 || open_unit(rng).ln() < log_ratio;
    if accepted {
        sampler.events[i] = next;
        sampler.log_target = log_target;
        debug_assert_eq!(states_to_events(&new_column).ok(), Some(next));
    } else {
        sampler.x.set_column(i, &old_column);
    }
    UpdateRecord {
        kappa: None,
        kappa_requested: None,
        explored: false,
        proposed: true,
        accepted,
        ripple_size,
        log_ratio,
        earliest_flipped: None,
    }
}

impl<M: ModelSpec> LatentKernel<M> for RjmcmcSampler<M> {
    fn name(&self) -> &'static str {
        "rjmcmc-sir"
    }

    fn update(&mut self, rng: &mut SamplerRng) -> UpdateRecord {
        rj_update(self, rng)
    }

    fn state(&self) -> &HiddenStateMatrix {
        &self.x
    }

    fn model(&self) -> &M {
        &self.model
    }

    fn set_model(&mut self, model: M) -> Result<()> {
        self.log_target = log_prior(&model, &self.x) + observation_loglik(&self.x, &self.emissions);
        self.model = model;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn event_encoding() {
        assert_eq!(
            events_to_states(&EventTimes::default(), 4).unwrap(),
            vec![0, 0, 0, 0]
        );
        let e = EventTimes::new(Some(2), Some(6)).unwrap();
        assert_eq!(
            events_to_states(&e, 10).unwrap(),
            vec![0, 0, 1, 1, 1, 1, 2, 2, 2, 2]
        );
        assert!(EventTimes::new(None, Some(3)).is_err());
        assert!(EventTimes::new(Some(3), Some(3)).is_err());
        assert!(states_to_events(&[0, 2, 2]).is_err());
        assert!(states_to_events(&[1, 0]).is_err());
    }

    #[test]
    fn shifting_to_the_same_time_has_unit_ratio() {
        let e = EventTimes::new(Some(0), None).unwrap();
        let mut rng = <SamplerRng as rand::SeedableRng>::seed_from_u64(0);
        for _ in 0..200 {
            let (next, log_q) = propose(&e, 1 + 1, &mut rng);
            if next == e {
                assert_eq!(log_q, 0.0);
            }
        }
    }

    proptest! {
        #[test]
        fn columns_round_trip(t_count in 2usize..30, a in 0usize..30, len in 1usize..30, infected: bool, recovers: bool) {
            let infection = (infected && a < t_count).then_some(a);
            let recovery = infection.and_then(|a| (recovers && a + len < t_count).then_some(a + len));
            let e = EventTimes { infection, recovery };
            let col = events_to_states(&e, t_count).unwrap();
            prop_assert_eq!(states_to_events(&col).unwrap(), e);
        }
    }
}
