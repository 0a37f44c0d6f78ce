use serde::Serialize;
use serde_json::{Map, Value};

use crate::catalog::{FunctionSpec, Tag};

pub const SCHEMA: u32 = 1;
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// The JSON document every command emits.
#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub schema: u32,
    pub tool_version: &'static str,
    pub command: String,
    /// The function in spec grammar, parseable back into the same function.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub function: Option<String>,
    pub parameters: Map<String, Value>,
    pub results: Value,
    pub disclaimers: Vec<String>,
}

impl RunReport {
    pub fn new(command: &str, spec: Option<&FunctionSpec>) -> Self {
        let disclaimers = spec.map_or_else(Vec::new, |s| s.tags().iter().map(|t| tag_disclaimer(*t).to_string()).collect());
        RunReport {
            schema: SCHEMA,
            tool_version: TOOL_VERSION,
            command: command.to_string(),
            function: spec.map(|s| s.to_string()),
            parameters: Map::new(),
            results: Value::Null,
            disclaimers,
        }
    }

    pub fn param(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        self.parameters
            .insert(key.to_string(), serde_json::to_value(value).expect("serializable"));
        self
    }

    pub fn disclaim(&mut self, text: &str) -> &mut Self {
        if !self.disclaimers.iter().any(|d| d == text) {
            self.disclaimers.push(text.to_string());
        }
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable") + "\n"
    }
}

pub fn tag_disclaimer(tag: Tag) -> &'static str {
    match tag {
        Tag::AttractingBasin => {
            "0 < lambda < 1/e: the origin lies in the immediate basin of an attracting fixed point"
        }
        Tag::TotallyDisconnected => {
            "K(f) is totally disconnected for this function; pixel-scale components are illustrative only"
        }
        Tag::IllustrativeConstants => "product constants are illustrative, not taken from a specific construction",
        Tag::Quasiregular => "g is quasiregular, not entire; derivatives are finite-difference estimates",
    }
}

pub const ORBIT_DISCLAIMER: &str =
    "bounded means the orbit stayed inside bound_radius for max_iter iterations; escaped means it passed escape_radius";
pub const RASTER_DISCLAIMER: &str = "component counts are pixel-scale illustrations of K(f)";
pub const CERTIFICATE_DISCLAIMER: &str =
    "m_lower uses sampled derivative bounds between circle samples and is semi-rigorous";
