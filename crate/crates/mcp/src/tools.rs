//! The seven tool descriptors and their argument handling.

use serde::Serialize;
use serde_json::{json, Map, Value};

pub const TOOL_NAMES: [&str; 7] = [
    "get_rules",
    "get_status",
    "verify_plan",
    "pick_up",
    "put_down",
    "stack",
    "unstack",
];

/// Headings every description contains, in order.
pub const SECTIONS: [&str; 5] = [
    "Functionality:",
    "Preconditions:",
    "Effects:",
    "Arguments:",
    "Response:",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ToolDescriptor {
    pub name: &'static str,
    pub description: String,
    #[serde(rename = "inputSchema")]
    pub input_schema: Value,
}

struct Text {
    functionality: &'static str,
    preconditions: &'static str,
    effects: &'static str,
    arguments: &'static str,
    response: &'static str,
}

impl Text {
    fn render(&self) -> String {
        let parts = [
            self.functionality,
            self.preconditions,
            self.effects,
            self.arguments,
            self.response,
        ];
        SECTIONS
            .iter()
            .zip(parts)
            .map(|(heading, body)| format!("{heading} {body}"))
            .collect::<Vec<_>>()
            .join("\n")
    }
}

const ACTION_RESPONSE: &str = "On success, the confirmation message and the updated status \
    (same shape as get_status). If the action breaks a rule, nothing changes and the result \
    carries a rule_id and a message explaining which rule was violated.";

fn text(name: &str) -> Text {
    match name {
        "get_rules" => Text {
            functionality: "Returns the rules of the running simulation: the available actions, \
                the physical constraints, and any extra constraints of the active constraint set.",
            preconditions: "A simulation has been started.",
            effects: "None; the world is not changed.",
            arguments: "None.",
            response: "An object with `constraint_set` and `rules`, the rules as English text.",
        },
        "get_status" => Text {
            functionality: "Returns the current state of the world: the stack on each table \
                position, block properties, the robot gripper, and the goal.",
            preconditions: "A simulation has been started.",
            effects: "None; the world is not changed.",
            arguments: "None.",
            response: "An object with `stacks` (one bottom-to-top list per position; blocks that \
                cannot be identified read \"unknown\"), `blocks` (name and size of identifiable \
                blocks), `gripper` (`state` idle or holding, `block`, `phase`), `goal` (target \
                stacks and description), `positions` and `steps` taken so far.",
        },
        "verify_plan" => Text {
            functionality: "Simulates a complete plan on a copy of the current state and reports \
                whether every step is executable and whether the goal is reached.",
            preconditions: "A simulation has been started.",
            effects: "None; the live world is never changed by verification.",
            arguments: "`steps`: list of actions in execution order, each \
                {\"action\": \"pick_up\"|\"put_down\"|\"stack\"|\"unstack\", \"block\": name, \
                \"target\": name (stack and unstack only)}.",
            response: "An object with `verified`, `reaches_goal`, `steps`, a `message`, and for \
                an invalid plan the 0-based `first_bad_index` and the violated `rule_id`.",
        },
        "pick_up" => Text {
            functionality: "Grasps a block that stands directly on the table.",
            preconditions: "The gripper is empty, the block stands directly on the table, and \
                nothing is on top of it.",
            effects: "The robot holds the block and its table position becomes free.",
            arguments: "`block`: name of the block to grasp.",
            response: ACTION_RESPONSE,
        },
        "put_down" => Text {
            functionality: "Places the held block on the table.",
            preconditions: "The robot holds the block and at least one table position is free.",
            effects: "The block stands alone on the lowest-numbered free position and the \
                gripper is empty.",
            arguments: "`block`: name of the held block.",
            response: ACTION_RESPONSE,
        },
        "stack" => Text {
            functionality: "Places the held block on top of another block.",
            preconditions: "The robot holds the block and the target block is located on top of \
                a stack (nothing rests on it). Under the block_size constraint set the held \
                block may not be larger than the target.",
            effects: "The block rests on the target and the gripper is empty.",
            arguments: "`block`: name of the held block; `target`: name of the block to stack \
                it on.",
            response: ACTION_RESPONSE,
        },
        "unstack" => Text {
            functionality: "Takes a block off the block it rests on.",
            preconditions: "The gripper is empty, the block rests directly on the target block, \
                and nothing is on top of the block.",
            effects: "The robot holds the block and the target becomes the top of its stack.",
            arguments: "`block`: name of the block to take; `target`: name of the block it \
                rests on.",
            response: ACTION_RESPONSE,
        },
        other => unreachable!("no tool named {other}"),
    }
}

fn schema(name: &str) -> Value {
    let block = json!({"type": "string", "description": "Block name"});
    match name {
        "get_rules" | "get_status" => {
            json!({"type": "object", "properties": {}, "additionalProperties": false})
        }
        "verify_plan" => json!({
            "type": "object",
            "properties": {
                "steps": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "properties": {
                            "action": {"type": "string", "enum": ["pick_up", "put_down", "stack", "unstack"]},
                            "block": {"type": "string"},
                            "target": {"type": "string"}
                        },
                        "required": ["action", "block"],
                        "additionalProperties": false
                    }
                }
            },
            "required": ["steps"],
            "additionalProperties": false
        }),
        "pick_up" | "put_down" => json!({
            "type": "object",
            "properties": {"block": block},
            "required": ["block"],
            "additionalProperties": false
        }),
        _ => json!({
            "type": "object",
            "properties": {"block": block, "target": block},
            "required": ["block", "target"],
            "additionalProperties": false
        }),
    }
}

pub fn descriptors() -> Vec<ToolDescriptor> {
    TOOL_NAMES
        .iter()
        .map(|&name| ToolDescriptor {
            name,
            description: text(name).render(),
            input_schema: schema(name),
        })
        .collect()
}

/// Upstream request a tool call maps to.
#[derive(Debug, Clone, PartialEq)]
pub enum Route {
    Get(&'static str),
    Post(String, Value),
}

/// Maps a call to its REST route after checking the argument shape.
pub fn route(name: &str, arguments: &Map<String, Value>) -> Result<Route, String> {
    let string = |key: &str| -> Result<Value, String> {
        match arguments.get(key) {
            Some(Value::String(s)) if !s.is_empty() => Ok(Value::String(s.clone())),
            _ => Err(format!("`{key}` must be a nonempty string")),
        }
    };
    let only = |keys: &[&str]| -> Result<(), String> {
        match arguments.keys().find(|k| !keys.contains(&k.as_str())) {
            Some(k) => Err(format!("unexpected argument `{k}`")),
            None => Ok(()),
        }
    };
    match name {
        "get_rules" => only(&[]).map(|()| Route::Get("/rules")),
        "get_status" => only(&[]).map(|()| Route::Get("/status")),
        "verify_plan" => {
            only(&["steps"])?;
            if !arguments.get("steps").is_some_and(Value::is_array) {
                return Err(String::from("`steps` must be an array"));
            }
            Ok(Route::Post(
                "/verify".into(),
                Value::Object(arguments.clone()),
            ))
        }
        "pick_up" | "put_down" => {
            only(&["block"])?;
            let body = json!({"block": string("block")?});
            Ok(Route::Post(format!("/actions/{name}"), body))
        }
        "stack" | "unstack" => {
            only(&["block", "target"])?;
            let body = json!({"block": string("block")?, "target": string("target")?});
            Ok(Route::Post(format!("/actions/{name}"), body))
        }
        other => Err(format!("unknown tool `{other}`")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_description_has_all_sections_in_order() {
        for tool in descriptors() {
            let mut from = 0;
            for heading in SECTIONS {
                let at = tool.description[from..]
                    .find(heading)
                    .unwrap_or_else(|| panic!("{} lacks {heading}", tool.name));
                from += at + heading.len();
            }
        }
    }

    #[test]
    fn argument_checks() {
        let args = |v: Value| v.as_object().unwrap().clone();
        assert_eq!(
            route("stack", &args(json!({"block": "A", "target": "B"}))),
            Ok(Route::Post(
                "/actions/stack".into(),
                json!({"block": "A", "target": "B"})
            ))
        );
        assert!(route("stack", &args(json!({"block": "A"}))).is_err());
        assert!(route("pick_up", &args(json!({"block": "A", "x": 1}))).is_err());
        assert!(route("get_status", &args(json!({"verbose": true}))).is_err());
        assert!(route("verify_plan", &args(json!({"steps": "all"}))).is_err());
    }
}
