//! Published JSON schemas for request and response bodies.
//!
//! Schemas reference shared definitions in `common.schema.json` by relative
//! URI; validators must register it as a resource.

pub const BASE_URI: &str = "https://trailrag.local/schemas/";

pub const COMMON: &str = include_str!("../schemas/common.schema.json");
pub const CHAT_REQUEST: &str = include_str!("../schemas/chat_request.schema.json");
pub const CHAT_RESPONSE: &str = include_str!("../schemas/chat_response.schema.json");
pub const TRAIL_LIST: &str = include_str!("../schemas/trail_list.schema.json");
pub const REVIEW_LIST: &str = include_str!("../schemas/review_list.schema.json");
pub const INGEST_REPORT: &str = include_str!("../schemas/ingest_report.schema.json");
pub const STATS: &str = include_str!("../schemas/stats.schema.json");
pub const ERROR: &str = include_str!("../schemas/error.schema.json");

/// `(file name, contents)` for every schema.
pub const ALL: &[(&str, &str)] = &[
    ("common.schema.json", COMMON),
    ("chat_request.schema.json", CHAT_REQUEST),
    ("chat_response.schema.json", CHAT_RESPONSE),
    ("trail_list.schema.json", TRAIL_LIST),
    ("review_list.schema.json", REVIEW_LIST),
    ("ingest_report.schema.json", INGEST_REPORT),
    ("stats.schema.json", STATS),
    ("error.schema.json", ERROR),
];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_schema_is_json_with_matching_id() {
        for (name, text) in ALL {
            let v: serde_json::Value = serde_json::from_str(text).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert_eq!(v["$id"], format!("{BASE_URI}{name}"), "{name}");
        }
    }
}
