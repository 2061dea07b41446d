use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::audit::{
    audit_condition_ii, audit_link_bound, audit_x_bound, handshake_complete, handshake_theta, monotone_complete,
    monotone_theta, recheck_complete, recheck_theta, BoundAudit, ConditionIi, Identity,
};
use super::{
    greedy_build_complete, greedy_build_theta, is_good, BalancedFamily, CompleteFamily, GoodnessReport, Member,
    ScanOrder, StopReason, ThetaFamily,
};
use crate::error::{Error, Result};
use crate::graph::{EdgeSet, HostGraph};
use crate::params::ScaleParams;
use crate::pattern::{Pattern, PatternCopy};

/// A family of either pattern kind.
#[derive(Clone, Debug)]
pub enum AnyFamily {
    Theta(ThetaFamily),
    Complete(CompleteFamily),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BuildSummary {
    pub stop: StopReason,
    pub target: usize,
    pub scanned: usize,
    pub rejected: usize,
}

impl AnyFamily {
    /// Runs the greedy builder matching `p.pattern`.
    pub fn build(g: Arc<HostGraph>, p: &ScaleParams, target: usize, order: ScanOrder) -> Result<(Self, BuildSummary)> {
        fn summary<M: Member>(o: &super::BuildOutcome<M>) -> BuildSummary {
            BuildSummary {
                stop: o.stop,
                target: o.target,
                scanned: o.scanned,
                rejected: o.rejected,
            }
        }
        Ok(match p.pattern {
            Pattern::Theta { .. } => {
                let o = greedy_build_theta(g, p, target, order)?;
                (AnyFamily::Theta(o.family.clone()), summary(&o))
            }
            Pattern::Complete(_) => {
                let o = greedy_build_complete(g, p, target, order)?;
                (AnyFamily::Complete(o.family.clone()), summary(&o))
            }
        })
    }

    pub fn from_copies(host: Arc<HostGraph>, pattern: Pattern, copies: Vec<PatternCopy>) -> Result<Self> {
        match pattern {
            Pattern::Theta { .. } => {
                let members = copies
                    .into_iter()
                    .map(|c| match c {
                        PatternCopy::Theta(t) => Ok(t),
                        PatternCopy::Complete(_) => Err(Error::InvalidCopy("complete copy in a theta family".into())),
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(AnyFamily::Theta(BalancedFamily::from_members(host, pattern, members)?))
            }
            Pattern::Complete(_) => {
                let members = copies
                    .into_iter()
                    .map(|c| match c {
                        PatternCopy::Complete(t) => Ok(t),
                        PatternCopy::Theta(_) => Err(Error::InvalidCopy("theta copy in a complete family".into())),
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(AnyFamily::Complete(BalancedFamily::from_members(
                    host, pattern, members,
                )?))
            }
        }
    }

    pub fn len(&self) -> usize {
        match self {
            AnyFamily::Theta(f) => f.len(),
            AnyFamily::Complete(f) => f.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn pattern(&self) -> &Pattern {
        match self {
            AnyFamily::Theta(f) => f.pattern(),
            AnyFamily::Complete(f) => f.pattern(),
        }
    }

    pub fn host(&self) -> &Arc<HostGraph> {
        match self {
            AnyFamily::Theta(f) => f.host(),
            AnyFamily::Complete(f) => f.host(),
        }
    }

    pub fn edge_sets(&self) -> Vec<EdgeSet> {
        match self {
            AnyFamily::Theta(f) => f.edge_sets(),
            AnyFamily::Complete(f) => f.edge_sets(),
        }
    }

    pub fn copies(&self) -> Vec<PatternCopy> {
        match self {
            AnyFamily::Theta(f) => f.copies(),
            AnyFamily::Complete(f) => f.copies(),
        }
    }

    pub fn is_good(&self, p: &ScaleParams) -> Result<GoodnessReport> {
        match self {
            AnyFamily::Theta(f) => is_good(f, p),
            AnyFamily::Complete(f) => is_good(f, p),
        }
    }

    pub fn condition_ii(&self, p: &ScaleParams, alpha: f64) -> Result<ConditionIi> {
        match self {
            AnyFamily::Theta(f) => audit_condition_ii(f, p, alpha),
            AnyFamily::Complete(f) => audit_condition_ii(f, p, alpha),
        }
    }

    /// Every post-build check, each recomputed from the member list.
    pub fn audit(&self, p: &ScaleParams, alpha: f64) -> Result<AuditReport> {
        let (recheck, handshake, monotone, bound) = match self {
            AnyFamily::Theta(f) => (
                recheck_theta(f, p)?,
                handshake_theta(f)?,
                monotone_theta(f),
                audit_link_bound(f, p)?,
            ),
            AnyFamily::Complete(f) => (
                recheck_complete(f, p)?,
                handshake_complete(f)?,
                monotone_complete(f),
                audit_x_bound(f, p)?,
            ),
        };
        let condition_ii = if self.is_empty() {
            None
        } else {
            Some(self.condition_ii(p, alpha)?)
        };
        Ok(AuditReport {
            members: self.len(),
            ledger_matches: recheck.ledger_matches,
            good: recheck.good,
            handshake,
            monotone,
            bound,
            condition_ii,
        })
    }

    pub fn ledger_summary(&self) -> LedgerSummary {
        fn summarize<M: Member>(f: &BalancedFamily<M>, size: impl Fn(&M::Query) -> usize) -> LedgerSummary {
            let mut max_degree_by_size = BTreeMap::new();
            for (q, &d) in f.ledger() {
                let e = max_degree_by_size.entry(size(q)).or_insert(0);
                *e = d.max(*e);
            }
            LedgerSummary {
                entries: f.ledger().len(),
                max_degree_by_size,
            }
        }
        match self {
            AnyFamily::Theta(f) => summarize(f, EdgeSet::len),
            AnyFamily::Complete(f) => summarize(f, |t| t.sizes().iter().sum()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub members: usize,
    pub ledger_matches: bool,
    pub good: GoodnessReport,
    pub handshake: Identity,
    pub monotone: bool,
    /// Link sizes for theta families, |X_i| for complete ones.
    pub bound: BoundAudit,
    /// Absent for an empty family.
    pub condition_ii: Option<ConditionIi>,
}

impl AuditReport {
    pub fn pass(&self) -> bool {
        self.ledger_matches
            && self.good.pass
            && self.handshake.holds()
            && self.monotone
            && self.bound.pass()
            && self.condition_ii.as_ref().is_none_or(|c| c.pass)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LedgerSummary {
    /// Number of tracked queries with positive degree.
    pub entries: usize,
    /// Query size (edges of σ, or |S1|+…+|Sr|) to the largest degree seen.
    pub max_degree_by_size: BTreeMap<usize, u32>,
}

/// On-disk form of a built family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyFile {
    pub pattern: Pattern,
    pub graph: HostGraph,
    pub params: ScaleParams,
    pub build: Option<BuildSummary>,
    pub ledger_summary: LedgerSummary,
    pub members: Vec<PatternCopy>,
}

impl FamilyFile {
    pub fn new(fam: &AnyFamily, params: &ScaleParams, build: Option<BuildSummary>) -> Self {
        FamilyFile {
            pattern: fam.pattern().clone(),
            graph: (**fam.host()).clone(),
            params: params.clone(),
            build,
            ledger_summary: fam.ledger_summary(),
            members: fam.copies(),
        }
    }

    /// Rebuilds the family, re-validating every member against the graph.
    pub fn load(self) -> Result<(AnyFamily, ScaleParams)> {
        if self.params.pattern != self.pattern {
            return Err(Error::InvalidParameter(format!(
                "params are for {}, family is {}",
                self.params.pattern, self.pattern
            )));
        }
        let fam = AnyFamily::from_copies(Arc::new(self.graph), self.pattern, self.members)?;
        Ok((fam, self.params))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::generators::complete;

    #[test]
    fn family_file_round_trip() {
        let g = Arc::new(complete(5, 2));
        let p = ScaleParams::for_host(Pattern::Theta { a: 2, b: 2 }, &g, Some(0.5))
            .unwrap()
            .with_k(4.0)
            .unwrap();
        let (fam, summary) = AnyFamily::build(g, &p, 100, ScanOrder::Canonical).unwrap();
        assert_eq!(fam.len(), 15);
        let file = FamilyFile::new(&fam, &p, Some(summary));
        let text = serde_json::to_string(&file).unwrap();
        let back: FamilyFile = serde_json::from_str(&text).unwrap();
        assert_eq!(back, file);
        let (fam2, p2) = back.load().unwrap();
        assert_eq!(fam2.copies(), fam.copies());
        assert_eq!(p2, p);
        assert_eq!(fam2.ledger_summary(), fam.ledger_summary());
        assert!(fam2.audit(&p2, 1.0 / 3.0).unwrap().pass());
    }
}
