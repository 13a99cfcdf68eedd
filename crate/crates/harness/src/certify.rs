//! Re-checks the regret inequalities on a recorded trace.

use std::fmt;

use maler_core::experts::ExpertRegret;
use maler_core::universal::{
    expert_certificates, meta_certificate, rate_certificate, regret_bounds_certificate,
    RegretDiagnostics, POTENTIAL_SLACK,
};
use maler_core::{Execution, ExpertGrid, Families, LearnerKind};
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::experiment::Trace;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckGroup {
    /// Meta regret per expert.
    Meta,
    /// Surrogate regret of each expert.
    Expert,
    /// Simultaneous regret bounds.
    Regret,
    /// Curvature-specific rate.
    Rate,
    /// Potential monotone and at most one.
    Potential,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub group: CheckGroup,
    pub name: String,
    pub value: f64,
    pub bound: f64,
    pub holds: bool,
    /// Within 10% of the bound.
    pub near_boundary: bool,
}

impl Check {
    fn new(group: CheckGroup, name: impl Into<String>, value: f64, bound: f64) -> Self {
        let holds = value <= bound;
        Self {
            group,
            name: name.into(),
            value,
            bound,
            holds,
            near_boundary: holds && value > 0.9 * bound,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub algo: LearnerKind,
    pub diagnostics: RegretDiagnostics,
    pub checks: Vec<Check>,
}

impl CertificateReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.holds)
    }

    pub fn group(&self, group: CheckGroup) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(move |c| c.group == group)
    }

    pub fn group_passed(&self, group: CheckGroup) -> bool {
        self.group(group).all(|c| c.holds)
    }
}

impl fmt::Display for CertificateReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{}: regret {:.6} (linearized {:.6}), V_s {:.6}, V_ell {:.6}",
            self.algo,
            self.diagnostics.regret,
            self.diagnostics.linearized,
            self.diagnostics.v_s,
            self.diagnostics.v_ell
        )?;
        for c in &self.checks {
            let status = match (c.holds, c.near_boundary) {
                (false, _) => "FAIL",
                (true, true) => "near",
                (true, false) => "ok",
            };
            writeln!(
                f,
                "  [{status:>4}] {:?}/{}: {:.6} <= {:.6}",
                c.group, c.name, c.value, c.bound
            )?;
        }
        write!(
            f,
            "{}",
            if self.passed() {
                "all checks hold"
            } else {
                "VIOLATIONS FOUND"
            }
        )
    }
}

fn families(algo: LearnerKind) -> Option<Families> {
    match algo {
        LearnerKind::Maler => Some(Families::ALL),
        LearnerKind::MetaGrad => Some(Families::EXP_CONCAVE_ONLY),
        _ => None,
    }
}

fn expert_check(r: &ExpertRegret, index: usize, label: &str) -> Check {
    Check::new(
        CheckGroup::Expert,
        format!("{index}:{label}(eta={:.6})", r.eta),
        r.regret,
        r.bound,
    )
}

/// Every check that applies to the trace's learner: potential, meta and
/// expert regret for the ensembles, the simultaneous bounds and the rate for
/// the full ensemble.
pub fn certify(trace: &Trace, execution: Execution) -> Result<CertificateReport> {
    let h = &trace.header;
    let params = h.params;
    let comparator = h.comparator.vector();
    let mut diagnostics = RegretDiagnostics::default();
    for r in &trace.rounds {
        diagnostics.accumulate(
            params.grad_bound(),
            &r.record.play_vector(),
            &r.record.gradient_vector(),
            &comparator,
            r.loss - r.comparator_loss,
        );
    }
    let records: Vec<_> = trace.rounds.iter().map(|r| r.record.clone()).collect();
    let mut checks = Vec::new();

    if let Some(fam) = families(h.algo) {
        let grid = ExpertGrid::with_families(&params, fam);
        let mut prev = 0.0_f64;
        let mut worst_rise = f64::NEG_INFINITY;
        let mut highest = f64::NEG_INFINITY;
        for r in &records {
            if let Some(m) = &r.meta {
                worst_rise = worst_rise.max(m.log_potential - prev);
                highest = highest.max(m.log_potential);
                prev = m.log_potential;
            }
        }
        checks.push(Check::new(
            CheckGroup::Potential,
            "largest step of log phi",
            worst_rise,
            POTENTIAL_SLACK,
        ));
        checks.push(Check::new(
            CheckGroup::Potential,
            "log phi",
            highest,
            POTENTIAL_SLACK,
        ));

        let meta = meta_certificate(&grid, &records)?;
        for (i, e) in meta.entries.iter().enumerate() {
            checks.push(Check::new(
                CheckGroup::Meta,
                format!("{i}:{}(eta={:.6})", e.slot.label(), e.slot.eta),
                e.regret,
                e.bound,
            ));
        }
        let experts = expert_certificates(&params, &h.set, &grid, &records, execution)?;
        for (i, (r, slot)) in experts.iter().zip(grid.slots()).enumerate() {
            checks.push(expert_check(r, i, &slot.label()));
        }
    }

    if h.algo == LearnerKind::Maler {
        for b in regret_bounds_certificate(&params, diagnostics).checks {
            checks.push(Check::new(CheckGroup::Regret, b.name, b.value, b.bound));
        }
        if let Some(b) = rate_certificate(&params, h.curvature, diagnostics.regret) {
            checks.push(Check::new(CheckGroup::Rate, b.name, b.value, b.bound));
        }
    }
    Ok(CertificateReport {
        algo: h.algo,
        diagnostics,
        checks,
    })
}
