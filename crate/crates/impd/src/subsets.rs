//! Enumeration of budget-maximal subsets, shared by the follower oracle and
//! the leader's complete enumeration.

use crate::error::Result;

/// Visit, in lexicographic order of the sorted member list, every subset of
/// `members` that fits `budget` under `costs` and is maximal: no excluded
/// member fits the remaining budget.
pub(crate) fn for_each_maximal_subset(
    members: &[u32],
    costs: &[f64],
    budget: f64,
    visit: &mut impl FnMut(&[u32]) -> Result<()>,
) -> Result<()> {
    fn recurse(
        members: &[u32],
        costs: &[f64],
        budget: f64,
        idx: usize,
        current: &mut Vec<u32>,
        used: f64,
        visit: &mut impl FnMut(&[u32]) -> Result<()>,
    ) -> Result<()> {
        let remaining = budget - used;
        // If everything left fits, the only maximal completion takes it all;
        // any completion skipping a member would leave that member feasible.
        let rest_cost: f64 = members[idx..].iter().map(|&i| costs[i as usize]).sum();
        if rest_cost <= remaining {
            let before = current.len();
            current.extend_from_slice(&members[idx..]);
            let slack = remaining - rest_cost;
            let maximal = members
                .iter()
                .all(|&i| current.contains(&i) || costs[i as usize] > slack);
            if maximal {
                visit(current)?;
            }
            current.truncate(before);
            return Ok(());
        }
        let node = members[idx];
        let c = costs[node as usize];
        if c <= remaining {
            current.push(node);
            recurse(members, costs, budget, idx + 1, current, used + c, visit)?;
            current.pop();
        }
        recurse(members, costs, budget, idx + 1, current, used, visit)
    }
    let mut current = Vec::with_capacity(members.len());
    recurse(members, costs, budget, 0, &mut current, 0.0, visit)
}
