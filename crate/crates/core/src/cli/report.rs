//! JSON report of a verification run.

use serde::Serialize;

use super::Ctx;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Residual {
    Zero,
    Nonzero,
    Error,
}

/// The truncation window a check ran in and the ν-order its verdict
/// covers.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Window {
    pub nu_max: i32,
    pub deg_max: u32,
    pub certified_order: Option<i32>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub anchor: String,
    pub window: Option<Window>,
    pub residual: Residual,
    pub detail: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runtime_ms: Option<u64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConfigEcho {
    pub potential: String,
    pub m: usize,
    pub l: Option<usize>,
    pub nu_max: i32,
    pub deg_max: u32,
    pub suites: Vec<String>,
    pub seed: u64,
    pub mutate: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub config: ConfigEcho,
    pub total: usize,
    pub failed: usize,
    pub passed: bool,
    pub checks: Vec<CheckRecord>,
}

impl Report {
    pub fn new(ctx: &Ctx, checks: Vec<CheckRecord>) -> Report {
        let failed = checks.iter().filter(|c| c.residual != Residual::Zero).count();
        Report {
            schema_version: SCHEMA_VERSION,
            config: ConfigEcho {
                potential: ctx.label.clone(),
                m: ctx.m,
                l: ctx.l,
                nu_max: ctx.nu_max,
                deg_max: ctx.deg_max,
                suites: ctx.suites.iter().map(|s| s.name().to_string()).collect(),
                seed: ctx.seed,
                mutate: ctx.mutate.map(|x| x.name().to_string()),
            },
            total: checks.len(),
            failed,
            passed: failed == 0,
            checks,
        }
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed {
            0
        } else {
            1
        }
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckRecord> {
        self.checks.iter().filter(|c| c.residual != Residual::Zero)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }
}
