//! Walks a reconstruction pass back through its inputs to the root run.

use std::collections::HashSet;

use super::error::DomainError;
use super::types::{EntityKind, EntityRef};

/// What a lookup knows about one link of the chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LineageNode {
    Run,
    Pass { input: EntityRef },
}

/// Returns `[PASS pass_id, ..., RUN root]`.
///
/// `lookup` answers `None` for references that do not resolve. A revisited
/// pass means the store is corrupt; the API cannot create cycles.
pub fn resolve_lineage<F>(pass_id: u64, lookup: F) -> Result<Vec<EntityRef>, DomainError>
where
    F: Fn(EntityRef) -> Option<LineageNode>,
{
    let start = EntityRef::pass(pass_id);
    let mut chain = Vec::new();
    let mut seen = HashSet::new();
    let mut current = start;
    loop {
        if !seen.insert(current) {
            return Err(DomainError::CorruptLineage { pass_id, at: current });
        }
        let node = match current.kind {
            EntityKind::Run | EntityKind::Pass => lookup(current),
            _ => None,
        };
        match node {
            Some(LineageNode::Run) if current.kind == EntityKind::Run => {
                chain.push(current);
                return Ok(chain);
            }
            Some(LineageNode::Pass { input }) if current.kind == EntityKind::Pass => {
                chain.push(current);
                current = input;
            }
            _ if current == start => {
                return Err(DomainError::NotFound(format!("reconstruction pass {pass_id}")))
            }
            _ => return Err(DomainError::BrokenLineage { pass_id, missing: current }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    fn lookup_in(
        runs: &[u64],
        passes: &[(u64, EntityRef)],
    ) -> impl Fn(EntityRef) -> Option<LineageNode> {
        let runs: HashSet<u64> = runs.iter().copied().collect();
        let passes: HashMap<u64, EntityRef> = passes.iter().copied().collect();
        move |r: EntityRef| match r.kind {
            EntityKind::Run => runs.contains(&r.id).then_some(LineageNode::Run),
            EntityKind::Pass => passes.get(&r.id).map(|&input| LineageNode::Pass { input }),
            _ => None,
        }
    }

    #[test]
    fn depth_one() {
        let lookup = lookup_in(&[5], &[(1, EntityRef::run(5))]);
        assert_eq!(
            resolve_lineage(1, lookup).unwrap(),
            vec![EntityRef::pass(1), EntityRef::run(5)]
        );
    }

    #[test]
    fn depth_three_matches_hand_walk() {
        let passes = [(1, EntityRef::run(7)), (2, EntityRef::pass(1)), (3, EntityRef::pass(2))];
        let lookup = lookup_in(&[7], &passes);
        let expected = vec![EntityRef::pass(3), EntityRef::pass(2), EntityRef::pass(1), EntityRef::run(7)];
        assert_eq!(resolve_lineage(3, lookup).unwrap(), expected);
    }

    #[test]
    fn dangling_input_is_broken() {
        let lookup = lookup_in(&[], &[(4, EntityRef::run(99))]);
        assert_eq!(
            resolve_lineage(4, lookup),
            Err(DomainError::BrokenLineage { pass_id: 4, missing: EntityRef::run(99) })
        );
    }

    #[test]
    fn cycle_is_corrupt() {
        let lookup = lookup_in(&[], &[(1, EntityRef::pass(2)), (2, EntityRef::pass(1))]);
        assert!(matches!(resolve_lineage(1, lookup), Err(DomainError::CorruptLineage { .. })));
    }

    #[test]
    fn fill_input_is_broken() {
        let lookup = lookup_in(&[], &[(1, EntityRef::fill(3))]);
        assert!(matches!(resolve_lineage(1, lookup), Err(DomainError::BrokenLineage { .. })));
    }

    #[test]
    fn unknown_pass_is_not_found() {
        let lookup = lookup_in(&[1], &[]);
        assert!(matches!(resolve_lineage(8, lookup), Err(DomainError::NotFound(_))));
    }

    #[test]
    fn random_chains_terminate_in_a_run() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let mut passes = Vec::new();
        let mut next_pass = 1;
        for run in 1..=20u64 {
            let depth = rng.random_range(1..=10);
            let mut input = EntityRef::run(run);
            for _ in 0..depth {
                passes.push((next_pass, input));
                input = EntityRef::pass(next_pass);
                next_pass += 1;
            }
        }
        let runs: Vec<u64> = (1..=20).collect();
        for &(id, _) in &passes {
            let chain = resolve_lineage(id, lookup_in(&runs, &passes)).unwrap();
            assert_eq!(chain.last().unwrap().kind, EntityKind::Run);
            assert!(chain.len() <= 11);
        }
    }
}
