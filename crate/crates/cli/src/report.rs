use serde::Serialize;
use serde_json::Value;
use sheafsep::laws::LawReport;

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub checked: usize,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub details: Vec<String>,
}

impl From<LawReport> for Check {
    fn from(r: LawReport) -> Check {
        Check { passed: r.passed(), name: r.name, checked: r.checked, details: r.violations }
    }
}

/// What a command prints. Everything except `elapsed_ms` is a function of
/// the inputs.
#[derive(Debug, Serialize)]
pub struct Report {
    pub command: String,
    pub arguments: serde_json::Map<String, Value>,
    pub model: String,
    pub passed: bool,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<Value>,
    /// Human-readable body for text output.
    #[serde(skip)]
    pub text: String,
    pub elapsed_ms: u128,
}

impl Report {
    pub fn new(command: &str, model: &str) -> Report {
        Report {
            command: command.into(),
            arguments: serde_json::Map::new(),
            model: model.into(),
            passed: true,
            checks: Vec::new(),
            result: None,
            text: String::new(),
            elapsed_ms: 0,
        }
    }

    pub fn arg(&mut self, key: &str, value: impl ToString) {
        self.arguments.insert(key.into(), Value::String(value.to_string()));
    }

    pub fn check(&mut self, c: Check) {
        self.passed &= c.passed;
        self.checks.push(c);
    }

    pub fn render_text(&self) -> String {
        let mut out = format!("{} on {}\n", self.command, self.model);
        for c in &self.checks {
            let status = if c.passed { "PASS" } else { "FAIL" };
            out.push_str(&format!("{status} {} ({} checked)\n", c.name, c.checked));
            for d in &c.details {
                for line in d.lines() {
                    out.push_str(&format!("    {line}\n"));
                }
            }
        }
        out.push_str(&self.text);
        out.push_str(if self.passed { "result: pass\n" } else { "result: fail\n" });
        out
    }
}

/// The object printed on any error path.
#[derive(Debug, Serialize)]
pub struct ErrorReport {
    pub error: ErrorBody,
}

#[derive(Debug, Serialize)]
pub struct ErrorBody {
    pub kind: &'static str,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
}
