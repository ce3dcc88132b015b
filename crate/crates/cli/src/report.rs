use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Table,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommandResult {
    pub index: usize,
    pub op: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verdict: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reverified: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub data: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub version: u32,
    pub results: Vec<CommandResult>,
}

impl Report {
    pub fn has_errors(&self) -> bool {
        self.results.iter().any(|r| r.error.is_some() || r.reverified == Some(false))
    }

    pub fn has_unknown(&self) -> bool {
        self.results.iter().any(|r| r.verdict.as_deref() == Some("unknown"))
    }

    /// 1 on any error or failed re-verification, 2 on an unknown verdict
    /// under `strict`, else 0.
    pub fn exit_code(&self, strict: bool) -> i32 {
        if self.has_errors() {
            1
        } else if strict && self.has_unknown() {
            2
        } else {
            0
        }
    }
}

pub fn emit_report(report: &Report, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("reports serialize");
            s.push('\n');
            s
        }
        Format::Table => {
            let mut s = String::from("#\top\tverdict\treverified\tdetail\n");
            for r in &report.results {
                let detail = r.error.as_deref().or(r.reason.as_deref()).unwrap_or("");
                s.push_str(&format!(
                    "{}\t{}\t{}\t{}\t{}\n",
                    r.index,
                    r.op,
                    r.verdict.as_deref().unwrap_or("-"),
                    r.reverified.map_or("-".to_string(), |b| b.to_string()),
                    detail
                ));
            }
            s
        }
    }
}
