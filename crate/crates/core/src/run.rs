//! Config to report: builds a scenario, runs the matching pipeline and
//! collects the results into a bundle.

use serde::{Deserialize, Serialize};

use crate::cocycle::{analyze, Analysis};
use crate::error::Result;
use crate::flow::{continuous_domination_check, flow_splitting, ContinuousCertificate, FlowSplitting};
use crate::report::ReportBundle;
use crate::scenario::{Scenario, ScenarioConfig};

/// Process exit codes of the command-line front end.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    /// Dominated and the splitting verified: exit 0.
    Verified,
    /// No domination detected: exit 2.
    NotDominated,
    /// Dominated, but the constructed splitting failed verification: exit 1.
    Unverified,
}

impl Verdict {
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Verified => 0,
            Verdict::NotDominated => 2,
            Verdict::Unverified => 1,
        }
    }
}

#[derive(Clone, Debug)]
pub enum RunDetail {
    Discrete(Box<Analysis>),
    Flow { continuous: ContinuousCertificate, splitting: Option<Box<FlowSplitting>> },
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub bundle: ReportBundle,
    pub detail: RunDetail,
    pub verdict: Verdict,
}

fn verdict(dominated: bool, verified: bool) -> Verdict {
    match (dominated, verified) {
        (false, _) => Verdict::NotDominated,
        (true, true) => Verdict::Verified,
        (true, false) => Verdict::Unverified,
    }
}

/// Runs the discrete pipeline or, for flow scenarios, the continuous-time
/// check followed by the discretized splittings.
pub fn run_config(cfg: &ScenarioConfig) -> Result<RunOutcome> {
    let mut bundle = ReportBundle::for_config(cfg);
    match cfg.build()? {
        Scenario::Discrete(c) => {
            let a = analyze(&c, &cfg.analysis_params())?;
            bundle.add_analysis(&a);
            let v = verdict(a.dominated(), a.verified());
            Ok(RunOutcome { bundle, detail: RunDetail::Discrete(Box::new(a)), verdict: v })
        }
        Scenario::Flow(fc) => {
            let a = &cfg.analysis;
            let continuous = continuous_domination_check(&fc, a.k, a.t_max, a.eps_grid)?;
            bundle.add_continuous(&continuous);
            let splitting = if continuous.pass {
                let s = flow_splitting(&fc, a.k, &a.m_list, &cfg.flow_params())?;
                bundle.add_flow(&s);
                Some(Box::new(s))
            } else {
                None
            };
            let v = verdict(continuous.pass, splitting.as_ref().is_some_and(|s| s.pass));
            Ok(RunOutcome { bundle, detail: RunDetail::Flow { continuous, splitting }, verdict: v })
        }
    }
}
