use std::sync::Arc;

use proptest::prelude::*;
use supersat_core::experiments::{random_host, Density};
use supersat_core::family::audit::{
    audit_condition_ii, audit_link_bound, audit_x_bound, handshake_complete, handshake_theta, monotone_complete,
    monotone_theta, recheck_complete, recheck_theta,
};
use supersat_core::family::{greedy_build_complete, greedy_build_theta, BalancedFamily, Member, ScanOrder};
use supersat_core::params::approx_eq;
use supersat_core::{EdgeSet, Pattern, ScaleParams};

/// max over σ ⊆ some member of d(σ)·k^{(1+α)(|σ|−1)}·e(G)/|H|, degrees by
/// scanning every member.
fn brute_force_c(sets: &[EdgeSet], k: f64, alpha: f64, m: usize) -> f64 {
    let mut best = f64::NEG_INFINITY;
    for es in sets {
        for mask in 1u64..1 << es.len() {
            let sigma = es.select(mask);
            let d = sets.iter().filter(|t| sigma.is_subset(t)).count() as f64;
            let c = d * k.powf((1.0 + alpha) * (sigma.len() as f64 - 1.0)) * m as f64 / sets.len() as f64;
            best = best.max(c);
        }
    }
    best
}

fn duplicated<M: Member>(fam: &BalancedFamily<M>) -> BalancedFamily<M> {
    let members = fam.members().iter().chain(fam.members()).cloned().collect();
    BalancedFamily::from_members(fam.host().clone(), fam.pattern().clone(), members).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn theta_builder_audits(n in 10usize..=18, per in 2usize..=5, delta in prop::sample::select(vec![0.25, 0.5, 1.0]), seed in any::<u64>()) {
        let g = Arc::new(random_host(n, Density::Edges((per * n).min(n * (n - 1) / 2)), 2, seed).unwrap());
        let pattern = Pattern::Theta { a: 2, b: 2 };
        let p = ScaleParams::for_host(pattern.clone(), &g, Some(delta)).unwrap();
        let out = greedy_build_theta(g.clone(), &p, usize::MAX, ScanOrder::Shuffled(seed)).unwrap();
        let fam = &out.family;
        let re = recheck_theta(fam, &p).unwrap();
        prop_assert!(re.ledger_matches);
        prop_assert!(re.good.pass, "{:?}", re.good.violation);
        prop_assert!(handshake_theta(fam).unwrap().holds());
        prop_assert!(monotone_theta(fam));
        prop_assert!(audit_link_bound(fam, &p).unwrap().pass());

        let again = greedy_build_theta(g.clone(), &p, usize::MAX, ScanOrder::Shuffled(seed)).unwrap();
        prop_assert_eq!(again.family.members(), fam.members());

        if !fam.is_empty() {
            let alpha = pattern.alpha();
            let c = audit_condition_ii(fam, &p, alpha).unwrap().c;
            prop_assert!(approx_eq(c, brute_force_c(&fam.edge_sets(), p.k, alpha, g.m())));
            let c2 = audit_condition_ii(&duplicated(fam), &p, alpha).unwrap().c;
            prop_assert!(approx_eq(c, c2));
        }
    }

    #[test]
    fn complete_builder_audits(n in 7usize..=9, m in 20usize..=60, delta in prop::sample::select(vec![0.5, 1.0]), seed in any::<u64>()) {
        let g = Arc::new(random_host(n, Density::Edges(m.min(n * (n - 1) * (n - 2) / 6)), 3, seed).unwrap());
        let pattern = Pattern::Complete(vec![2, 2, 2]);
        let p = ScaleParams::for_host(pattern.clone(), &g, Some(delta)).unwrap().with_k(2.0).unwrap();
        let fam = greedy_build_complete(g.clone(), &p, usize::MAX, ScanOrder::Canonical).unwrap().family;
        let re = recheck_complete(&fam, &p).unwrap();
        prop_assert!(re.ledger_matches);
        prop_assert!(re.good.pass, "{:?}", re.good.violation);
        prop_assert!(handshake_complete(&fam).unwrap().holds());
        prop_assert!(monotone_complete(&fam));
        prop_assert!(audit_x_bound(&fam, &p).unwrap().pass());
        if !fam.is_empty() {
            let alpha = pattern.alpha();
            let c = audit_condition_ii(&fam, &p, alpha).unwrap().c;
            prop_assert!(approx_eq(c, brute_force_c(&fam.edge_sets(), p.k, alpha, g.m())));
        }
    }
}
