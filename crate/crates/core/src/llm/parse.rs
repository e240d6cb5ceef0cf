//! Pure reply parsers. Each returns a well-formed value or a typed error.

use std::sync::LazyLock;

use regex::Regex;

use crate::error::{Error, Result};
use crate::types::{parse_configuration, Configuration, Goal};

static VERDICT: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?i)\b(valid|invalid)\b").unwrap());
static YES_NO: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?i)\b(yes|no)\b").unwrap());
static ESTIMATE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?i)\bis\s+(-?\s*\d+)").unwrap());
static SUBGOAL: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?i)\bsubgoal\s*:").unwrap());

/// True for valid. The last valid/invalid token in the reply decides.
pub fn parse_verdict(reply: &str) -> Result<bool> {
    VERDICT
        .captures_iter(reply)
        .last()
        .map(|c| c[1].eq_ignore_ascii_case("valid"))
        .ok_or_else(|| Error::UnparseableVerdict(reply.to_string()))
}

/// The last yes/no token in the reply.
pub fn parse_yes_no(reply: &str) -> Result<bool> {
    YES_NO
        .captures_iter(reply)
        .last()
        .map(|c| c[1].eq_ignore_ascii_case("yes"))
        .ok_or_else(|| Error::UnparseableVerdict(reply.to_string()))
}

/// The step count N of the last `is N` phrase; must be non-negative.
pub fn parse_value(reply: &str) -> Result<u32> {
    let cap = ESTIMATE.captures_iter(reply).last().ok_or_else(|| Error::UnparseableValue(reply.to_string()))?;
    let digits: String = cap[1].chars().filter(|c| !c.is_whitespace()).collect();
    if digits.starts_with('-') {
        return Err(Error::UnparseableValue(reply.to_string()));
    }
    digits.parse::<u32>().map_err(|_| Error::UnparseableValue(reply.to_string()))
}

/// The configuration after the last `Subgoal:` marker, as a goal.
pub fn parse_subgoal(reply: &str) -> Result<Goal> {
    let m = SUBGOAL.find_iter(reply).last().ok_or_else(|| Error::Parse("reply has no Subgoal: marker".into()))?;
    match parse_configuration(&reply[m.end()..])? {
        Configuration::Graph(room) => Ok(Goal::room(room)),
        c => Ok(Goal::configuration(c)),
    }
}
