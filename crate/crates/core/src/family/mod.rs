//! Balanced families of pattern copies with an exact degree ledger, the
//! goodness predicates, saturated ledgers and greedy builders.

pub mod audit;
mod complete;
mod io;
mod theta;

use std::collections::HashMap;
use std::fmt::Debug;
use std::hash::Hash;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{EdgeId, EdgeSet, HostGraph};
use crate::params::ScaleParams;
use crate::pattern::{Pattern, PatternCopy};

pub use complete::{
    extend_good_tuple, greedy_build_complete, saturated_ledger_complete, tuple_is_good, x_set, TupleLedger,
};
pub use io::{AnyFamily, AuditReport, BuildSummary, FamilyFile, LedgerSummary};
pub use theta::{greedy_build_theta, link, saturated_ledger_theta, ForestLedger};

/// A pattern copy that can live in a [`BalancedFamily`].
pub trait Member: Clone + Debug + Ord + Send + Sync + Sized + 'static {
    type Query: Clone + Debug + Eq + Hash + Ord + Send + Sync;

    fn accepts(pattern: &Pattern) -> bool;

    /// The non-empty queries the ledger tracks for this copy: its sub-forests
    /// (theta) or its sub-tuples with every part non-empty (complete).
    fn ledger_queries(&self, g: &HostGraph) -> Vec<Self::Query>;

    fn contains_query(&self, q: &Self::Query) -> bool;

    /// Rejects queries whose degree is undefined.
    fn check_query(q: &Self::Query) -> Result<()>;

    /// ⌊bound⌋ on the degree of `q`.
    fn cap(q: &Self::Query, p: &ScaleParams) -> Result<u64>;

    /// Whether some reachable cap floors to zero.
    fn vacuous(p: &ScaleParams) -> Result<bool>;

    fn host_edges(&self, g: &HostGraph) -> EdgeSet;

    fn validate(&self, g: &HostGraph, pattern: &Pattern) -> Result<()>;

    fn edge_overloaded(family: &BalancedFamily<Self>, id: EdgeId, cap: f64) -> bool;

    fn to_copy(&self) -> PatternCopy;
}

#[derive(Clone, Debug)]
pub struct BalancedFamily<M: Member> {
    host: Arc<HostGraph>,
    pattern: Pattern,
    members: Vec<M>,
    ledger: HashMap<M::Query, u32>,
}

pub type ThetaFamily = BalancedFamily<crate::pattern::ThetaCopy>;
pub type CompleteFamily = BalancedFamily<crate::pattern::RPartiteCopy>;

impl<M: Member> BalancedFamily<M> {
    pub fn new(host: Arc<HostGraph>, pattern: Pattern) -> Result<Self> {
        pattern.check_host(&host)?;
        if !M::accepts(&pattern) {
            return Err(Error::InvalidPattern(format!(
                "{pattern} does not match the member type"
            )));
        }
        Ok(BalancedFamily {
            host,
            pattern,
            members: Vec::new(),
            ledger: HashMap::new(),
        })
    }

    /// Validates every copy against the host. Repeated members are allowed
    /// and counted with multiplicity.
    pub fn from_members(host: Arc<HostGraph>, pattern: Pattern, members: Vec<M>) -> Result<Self> {
        let mut fam = Self::new(host, pattern)?;
        for m in members {
            fam.try_push(m)?;
        }
        Ok(fam)
    }

    pub fn try_push(&mut self, m: M) -> Result<()> {
        m.validate(&self.host, &self.pattern)?;
        self.push(m);
        Ok(())
    }

    /// Adds a copy already known to be valid for the host.
    pub fn push(&mut self, m: M) {
        for q in m.ledger_queries(&self.host) {
            *self.ledger.entry(q).or_insert(0) += 1;
        }
        self.members.push(m);
    }

    /// d_H(q): the number of members containing `q`.
    pub fn degree(&self, q: &M::Query) -> Result<u32> {
        M::check_query(q)?;
        Ok(match self.ledger.get(q) {
            Some(&d) => d,
            None => self.members.iter().filter(|m| m.contains_query(q)).count() as u32,
        })
    }

    /// Ledger lookup; 0 for untracked queries.
    pub fn ledger_degree(&self, q: &M::Query) -> u32 {
        self.ledger.get(q).copied().unwrap_or(0)
    }

    pub fn ledger(&self) -> &HashMap<M::Query, u32> {
        &self.ledger
    }

    pub fn sorted_ledger(&self) -> Vec<(&M::Query, u32)> {
        let mut entries: Vec<_> = self.ledger.iter().map(|(q, &d)| (q, d)).collect();
        entries.sort();
        entries
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[M] {
        &self.members
    }

    pub fn host(&self) -> &Arc<HostGraph> {
        &self.host
    }

    pub fn pattern(&self) -> &Pattern {
        &self.pattern
    }

    pub fn copies(&self) -> Vec<PatternCopy> {
        self.members.iter().map(M::to_copy).collect()
    }

    /// Host edge sets of the members, one per member.
    pub fn edge_sets(&self) -> Vec<EdgeSet> {
        self.members.iter().map(|m| m.host_edges(&self.host)).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub query: String,
    pub degree: u64,
    pub cap: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GoodnessReport {
    pub pass: bool,
    pub checked: usize,
    pub violation: Option<Violation>,
}

/// Checks d_H(q) ≤ ⌊bound(q)⌋ for every tracked query with positive degree.
/// Queries outside the ledger have degree 0 and pass vacuously.
pub fn is_good<M: Member>(fam: &BalancedFamily<M>, p: &ScaleParams) -> Result<GoodnessReport> {
    let entries = fam.sorted_ledger();
    for (q, d) in &entries {
        let cap = M::cap(q, p)?;
        if u64::from(*d) > cap {
            return Ok(GoodnessReport {
                pass: false,
                checked: entries.len(),
                violation: Some(Violation {
                    query: format!("{q:?}"),
                    degree: u64::from(*d),
                    cap,
                }),
            });
        }
    }
    Ok(GoodnessReport {
        pass: true,
        checked: entries.len(),
        violation: None,
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanOrder {
    #[default]
    Canonical,
    Shuffled(u64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    TargetReached,
    Exhausted,
    VacuousParameters,
}

#[derive(Clone, Debug)]
pub struct BuildOutcome<M: Member> {
    pub family: BalancedFamily<M>,
    pub stop: StopReason,
    pub target: usize,
    pub scanned: usize,
    pub rejected: usize,
}

/// One pass over `candidates` in the given order, adding each copy whose
/// addition keeps every degree within its cap. Degrees only grow, so a copy
/// rejected once stays rejected and a single pass finds a maximal family.
fn greedy_build<M: Member>(
    host: Arc<HostGraph>,
    pattern: Pattern,
    mut candidates: Vec<M>,
    p: &ScaleParams,
    target: usize,
    order: ScanOrder,
) -> Result<BuildOutcome<M>> {
    let mut family = BalancedFamily::new(host, pattern)?;
    let outcome = |family, stop, scanned, rejected| BuildOutcome {
        family,
        stop,
        target,
        scanned,
        rejected,
    };
    if M::vacuous(p)? {
        log::info!("builder refused to start: some cap floors to zero");
        return Ok(outcome(family, StopReason::VacuousParameters, 0, 0));
    }
    if target == 0 {
        return Ok(outcome(family, StopReason::TargetReached, 0, 0));
    }
    if let ScanOrder::Shuffled(seed) = order {
        candidates.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    }
    let (mut scanned, mut rejected) = (0, 0);
    for c in candidates {
        scanned += 1;
        let queries = c.ledger_queries(&family.host);
        let mut fits = true;
        for q in &queries {
            if u64::from(family.ledger_degree(q)) + 1 > M::cap(q, p)? {
                fits = false;
                break;
            }
        }
        if !fits {
            rejected += 1;
            continue;
        }
        family.push(c);
        if family.len() >= target {
            return Ok(outcome(family, StopReason::TargetReached, scanned, rejected));
        }
    }
    Ok(outcome(family, StopReason::Exhausted, scanned, rejected))
}
