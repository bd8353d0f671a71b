//! Dry-run verification of complete plans.
//!
//! Wire format: `{"steps":[{"action":"pick_up|put_down|stack|unstack","block":"X","target":"Y"}]}`
//! where `target` is required for `stack`/`unstack` and forbidden otherwise.
//! A malformed step does not fail the whole request; it is rejected at its
//! index like any other invalid step.

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::constraints::{validate, ConstraintSetId, RuleId, Violation};
use crate::domain::{is_goal, Action, ActionKind, GoalSpec, WorldState};

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Plan {
    pub steps: Vec<Action>,
}

impl Plan {
    pub fn new(steps: Vec<Action>) -> Self {
        Self { steps }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

impl From<Vec<Action>> for Plan {
    fn from(steps: Vec<Action>) -> Self {
        Self { steps }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("plan document must be an object with a `steps` array")]
pub struct PlanFormatError;

/// A plan whose steps were parsed individually; malformed steps keep their slot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedPlan {
    pub steps: Vec<Result<Action, String>>,
}

impl From<&Plan> for ParsedPlan {
    fn from(plan: &Plan) -> Self {
        Self {
            steps: plan.steps.iter().cloned().map(Ok).collect(),
        }
    }
}

pub fn parse_plan(doc: &Value) -> Result<ParsedPlan, PlanFormatError> {
    let steps = doc
        .as_object()
        .and_then(|o| o.get("steps"))
        .and_then(Value::as_array)
        .ok_or(PlanFormatError)?;
    Ok(ParsedPlan {
        steps: steps.iter().map(parse_step).collect(),
    })
}

/// Parses one `{"action","block","target"?}` step.
pub fn parse_step(step: &Value) -> Result<Action, String> {
    let obj = step
        .as_object()
        .ok_or_else(|| String::from("a step must be a JSON object"))?;
    if let Some(key) = obj
        .keys()
        .find(|k| !matches!(k.as_str(), "action" | "block" | "target"))
    {
        return Err(format!("unexpected field `{key}` in step"));
    }
    let kind: ActionKind = obj
        .get("action")
        .and_then(Value::as_str)
        .ok_or_else(|| String::from("missing string field `action`"))?
        .parse()?;
    let block = match obj.get("block").and_then(Value::as_str) {
        Some(b) if !b.is_empty() => b.to_string(),
        _ => return Err(String::from("missing string field `block`")),
    };
    let target = match obj.get("target") {
        None => None,
        Some(Value::String(t)) if !t.is_empty() => Some(t.clone()),
        Some(_) => return Err(String::from("field `target` must be a nonempty string")),
    };
    match (kind.takes_target(), target.is_some()) {
        (true, false) => Err(format!("{kind} requires a `target` block")),
        (false, true) => Err(format!("{kind} does not take a `target` block")),
        _ => Ok(Action::from_parts(kind, block, target).expect("arity checked")),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum PlanVerdict {
    Verified {
        reaches_goal: bool,
        steps: usize,
    },
    Rejected {
        first_bad_index: usize,
        violation: Violation,
    },
}

impl PlanVerdict {
    pub fn is_verified(&self) -> bool {
        matches!(self, PlanVerdict::Verified { .. })
    }

    pub fn reaches_goal(&self) -> bool {
        matches!(
            self,
            PlanVerdict::Verified {
                reaches_goal: true,
                ..
            }
        )
    }

    /// English summary. Step numbers are 1-based here, 0-based in payloads.
    pub fn message(&self) -> String {
        match self {
            PlanVerdict::Verified {
                reaches_goal: true,
                steps,
            } => format!(
                "Plan verified; reaches goal. All {steps} steps are executable and the final state satisfies the goal."
            ),
            PlanVerdict::Verified {
                reaches_goal: false,
                steps,
            } => format!(
                "Plan verified; does not reach goal. All {steps} steps are executable but the final state does not satisfy the goal."
            ),
            PlanVerdict::Rejected {
                first_bad_index,
                violation,
            } => {
                let shown = violation
                    .action
                    .as_ref()
                    .map(|a| format!(" ({a})"))
                    .unwrap_or_default();
                format!(
                    "Step {}{shown} is invalid: {}",
                    first_bad_index + 1,
                    violation.message
                )
            }
        }
    }

    pub fn report(&self, total_steps: usize) -> VerifyReport {
        let (first_bad_index, rule_id) = match self {
            PlanVerdict::Rejected {
                first_bad_index,
                violation,
            } => (Some(*first_bad_index), Some(violation.rule_id)),
            PlanVerdict::Verified { .. } => (None, None),
        };
        VerifyReport {
            verified: self.is_verified(),
            reaches_goal: self.reaches_goal(),
            steps: total_steps,
            first_bad_index,
            rule_id,
            message: self.message(),
        }
    }
}

/// Flat verification payload served by the REST and MCP surfaces.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub verified: bool,
    pub reaches_goal: bool,
    pub steps: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub first_bad_index: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rule_id: Option<RuleId>,
    pub message: String,
}

/// Simulates `plan` on a copy of `state`; `state` itself is never modified.
pub fn verify_plan(
    state: &WorldState,
    goal: &GoalSpec,
    plan: &Plan,
    cs: ConstraintSetId,
) -> PlanVerdict {
    verify_parsed(state, goal, &ParsedPlan::from(plan), cs)
}

pub fn verify_parsed(
    state: &WorldState,
    goal: &GoalSpec,
    plan: &ParsedPlan,
    cs: ConstraintSetId,
) -> PlanVerdict {
    let mut current = state.clone();
    for (index, step) in plan.steps.iter().enumerate() {
        let action = match step {
            Ok(action) => action,
            Err(reason) => {
                return PlanVerdict::Rejected {
                    first_bad_index: index,
                    violation: Violation::malformed(format!("Malformed step: {reason}.")),
                }
            }
        };
        if let Err(violation) = validate(&current, action, cs) {
            return PlanVerdict::Rejected {
                first_bad_index: index,
                violation,
            };
        }
        current = current.apply(action).expect("validated action applies");
    }
    PlanVerdict::Verified {
        reaches_goal: is_goal(&current, goal),
        steps: plan.steps.len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{Block, GripperStatus};
    use serde_json::json;

    fn two_singles() -> (WorldState, GoalSpec) {
        let st = WorldState::new(
            [Block::unit("A"), Block::unit("B")],
            vec![vec!["A".into()], vec!["B".into()], vec![]],
            GripperStatus::Idle,
        )
        .unwrap();
        let goal = GoalSpec::new(vec![vec!["A".into(), "B".into()]]);
        (st, goal)
    }

    #[test]
    fn empty_plan_reports_goal_status() {
        let (st, goal) = two_singles();
        assert_eq!(
            verify_plan(&st, &goal, &Plan::default(), ConstraintSetId::Base),
            PlanVerdict::Verified {
                reaches_goal: false,
                steps: 0
            }
        );
        let done = GoalSpec::new(vec![vec!["A".into()], vec!["B".into()]]);
        assert!(verify_plan(&st, &done, &Plan::default(), ConstraintSetId::Base).reaches_goal());
    }

    #[test]
    fn second_grasp_is_rejected_at_index_one() {
        let (st, goal) = two_singles();
        let plan = Plan::new(vec![Action::pick_up("A"), Action::pick_up("B")]);
        match verify_plan(&st, &goal, &plan, ConstraintSetId::Base) {
            PlanVerdict::Rejected {
                first_bad_index,
                violation,
            } => {
                assert_eq!(first_bad_index, 1);
                assert_eq!(violation.rule_id, RuleId::GripperOccupied);
            }
            other => panic!("expected rejection, got {other:?}"),
        }
        let verdict = verify_plan(&st, &goal, &plan, ConstraintSetId::Base);
        assert!(verdict
            .message()
            .starts_with("Step 2 (pick_up(B)) is invalid"));
        let report = verdict.report(2);
        assert_eq!(report.first_bad_index, Some(1));
        assert_eq!(report.rule_id, Some(RuleId::GripperOccupied));
    }

    #[test]
    fn valid_plan_reaches_goal() {
        let (st, goal) = two_singles();
        let plan = Plan::new(vec![Action::pick_up("B"), Action::stack("B", "A")]);
        let verdict = verify_plan(&st, &goal, &plan, ConstraintSetId::Base);
        assert!(verdict.reaches_goal());
        assert!(verdict.message().starts_with("Plan verified; reaches goal"));
    }

    #[test]
    fn step_parsing() {
        assert_eq!(
            parse_step(&json!({"action": "stack", "block": "A", "target": "B"})),
            Ok(Action::stack("A", "B"))
        );
        assert!(parse_step(&json!({"action": "stack", "block": "A"})).is_err());
        assert!(parse_step(&json!({"action": "pick_up", "block": "A", "target": "B"})).is_err());
        assert!(parse_step(&json!({"action": "fly", "block": "A"})).is_err());
        assert!(parse_step(&json!({"action": "pick_up", "block": "A", "speed": 3})).is_err());
        assert!(parse_step(&json!("pick_up A")).is_err());
        assert!(parse_plan(&json!({"plan": []})).is_err());
    }

    #[test]
    fn malformed_step_is_rejected_in_place() {
        let (st, goal) = two_singles();
        let doc = json!({"steps": [
            {"action": "pick_up", "block": "B"},
            {"action": "stack", "block": "B"}
        ]});
        let plan = parse_plan(&doc).unwrap();
        match verify_parsed(&st, &goal, &plan, ConstraintSetId::Base) {
            PlanVerdict::Rejected {
                first_bad_index: 1,
                violation,
            } => assert_eq!(violation.rule_id, RuleId::Malformed),
            other => panic!("unexpected verdict {other:?}"),
        }
    }

    #[test]
    fn plan_json_shape() {
        let plan = Plan::new(vec![Action::pick_up("A"), Action::stack("A", "B")]);
        assert_eq!(
            serde_json::to_value(&plan).unwrap(),
            json!({"steps": [
                {"action": "pick_up", "block": "A"},
                {"action": "stack", "block": "A", "target": "B"}
            ]})
        );
    }
}
