//! Gripper lifecycle: `idle -> picking -> holding -> releasing -> idle`.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::domain::Action;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub enum GripperPhase {
    #[default]
    Idle,
    Picking(String),
    Holding(String),
    Releasing(String),
}

impl GripperPhase {
    /// Phase name as it appears in status payloads.
    pub fn name(&self) -> &'static str {
        match self {
            GripperPhase::Idle => "idle",
            GripperPhase::Picking(_) => "picking",
            GripperPhase::Holding(_) => "holding",
            GripperPhase::Releasing(_) => "releasing",
        }
    }

    pub fn block(&self) -> Option<&str> {
        match self {
            GripperPhase::Idle => None,
            GripperPhase::Picking(b) | GripperPhase::Holding(b) | GripperPhase::Releasing(b) => {
                Some(b)
            }
        }
    }

    /// Idle and Holding are the only phases observable between actions.
    pub fn is_resting(&self) -> bool {
        matches!(self, GripperPhase::Idle | GripperPhase::Holding(_))
    }
}

impl fmt::Display for GripperPhase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.block() {
            Some(block) => write!(f, "{}({block})", self.name()),
            None => f.write_str(self.name()),
        }
    }
}

impl Serialize for GripperPhase {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum GripperEvent {
    GraspStart(String),
    GraspDone,
    ReleaseStart,
    ReleaseDone,
}

impl fmt::Display for GripperEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GripperEvent::GraspStart(b) => write!(f, "grasp_start({b})"),
            GripperEvent::GraspDone => f.write_str("grasp_done"),
            GripperEvent::ReleaseStart => f.write_str("release_start"),
            GripperEvent::ReleaseDone => f.write_str("release_done"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FsmError {
    #[error("invalid gripper transition: {event} in phase {phase}")]
    InvalidTransition {
        phase: GripperPhase,
        event: GripperEvent,
    },
}

pub fn transition(phase: &GripperPhase, event: &GripperEvent) -> Result<GripperPhase, FsmError> {
    use GripperEvent as E;
    use GripperPhase as P;
    match (phase, event) {
        (P::Idle, E::GraspStart(block)) => Ok(P::Picking(block.clone())),
        (P::Picking(block), E::GraspDone) => Ok(P::Holding(block.clone())),
        (P::Holding(block), E::ReleaseStart) => Ok(P::Releasing(block.clone())),
        (P::Releasing(_), E::ReleaseDone) => Ok(P::Idle),
        _ => Err(FsmError::InvalidTransition {
            phase: phase.clone(),
            event: event.clone(),
        }),
    }
}

/// Event pair an action drives the gripper through.
pub fn events_for(action: &Action) -> [GripperEvent; 2] {
    if action.is_acquire() {
        [
            GripperEvent::GraspStart(action.block().to_string()),
            GripperEvent::GraspDone,
        ]
    } else {
        [GripperEvent::ReleaseStart, GripperEvent::ReleaseDone]
    }
}

/// Runs the action's event pair from `phase`, returning every phase visited.
pub fn run_action(phase: &GripperPhase, action: &Action) -> Result<Vec<GripperPhase>, FsmError> {
    let mut visited = Vec::with_capacity(2);
    let mut current = phase.clone();
    for event in events_for(action) {
        current = transition(&current, &event)?;
        visited.push(current.clone());
    }
    Ok(visited)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defined_edges() {
        assert_eq!(
            transition(&GripperPhase::Idle, &GripperEvent::GraspStart("A".into())),
            Ok(GripperPhase::Picking("A".into()))
        );
        let err = transition(
            &GripperPhase::Picking("A".into()),
            &GripperEvent::ReleaseStart,
        );
        assert!(matches!(err, Err(FsmError::InvalidTransition { .. })));
    }

    #[test]
    fn full_cycle() {
        let phases = run_action(&GripperPhase::Idle, &Action::pick_up("A")).unwrap();
        assert_eq!(
            phases,
            vec![
                GripperPhase::Picking("A".into()),
                GripperPhase::Holding("A".into())
            ]
        );
        let phases = run_action(&phases[1], &Action::stack("A", "B")).unwrap();
        assert_eq!(
            phases,
            vec![GripperPhase::Releasing("A".into()), GripperPhase::Idle]
        );
    }

    #[test]
    fn only_the_four_cycle_edges_exist() {
        let phases = [
            GripperPhase::Idle,
            GripperPhase::Picking("A".into()),
            GripperPhase::Holding("A".into()),
            GripperPhase::Releasing("A".into()),
        ];
        let events = [
            GripperEvent::GraspStart("A".into()),
            GripperEvent::GraspDone,
            GripperEvent::ReleaseStart,
            GripperEvent::ReleaseDone,
        ];
        let mut valid = 0;
        for (i, phase) in phases.iter().enumerate() {
            for (j, event) in events.iter().enumerate() {
                let result = transition(phase, event);
                assert_eq!(result.is_ok(), i == j, "{phase} + {event}");
                if let Ok(next) = result {
                    assert_eq!(next, phases[(i + 1) % 4]);
                    valid += 1;
                }
            }
        }
        assert_eq!(valid, 4);
    }

    #[test]
    fn acquire_from_holding_is_rejected() {
        assert!(run_action(&GripperPhase::Holding("A".into()), &Action::pick_up("B")).is_err());
        assert!(run_action(&GripperPhase::Idle, &Action::put_down("B")).is_err());
    }

    #[test]
    fn phase_names_on_the_wire() {
        assert_eq!(
            serde_json::to_string(&GripperPhase::Releasing("A".into())).unwrap(),
            "\"releasing\""
        );
    }
}
