//! Maximum bipartite matching by augmenting paths.
//!
//! Left vertices are tried in index order and each adjacency list in its given
//! order, after a greedy first pass, so results are deterministic.

/// Returns `mate[l] = Some(r)` for every matched left vertex.
pub fn maximum_matching(right_count: usize, adjacency: &[Vec<usize>]) -> Vec<Option<usize>> {
    let mut mate_left: Vec<Option<usize>> = vec![None; adjacency.len()];
    let mut mate_right: Vec<Option<usize>> = vec![None; right_count];

    for (l, nbrs) in adjacency.iter().enumerate() {
        if let Some(&r) = nbrs.iter().find(|&&r| mate_right[r].is_none()) {
            mate_left[l] = Some(r);
            mate_right[r] = Some(l);
        }
    }

    for l in 0..adjacency.len() {
        if mate_left[l].is_some() {
            continue;
        }
        let mut seen = vec![false; right_count];
        augment(l, adjacency, &mut seen, &mut mate_left, &mut mate_right);
    }
    mate_left
}

fn augment(
    l: usize,
    adjacency: &[Vec<usize>],
    seen: &mut [bool],
    mate_left: &mut [Option<usize>],
    mate_right: &mut [Option<usize>],
) -> bool {
    for &r in &adjacency[l] {
        if seen[r] {
            continue;
        }
        seen[r] = true;
        let free = match mate_right[r] {
            None => true,
            Some(other) => augment(other, adjacency, seen, mate_left, mate_right),
        };
        if free {
            mate_left[l] = Some(r);
            mate_right[r] = Some(l);
            return true;
        }
    }
    false
}

/// Size of a maximum matching.
pub fn matching_size(right_count: usize, adjacency: &[Vec<usize>]) -> usize {
    maximum_matching(right_count, adjacency)
        .iter()
        .filter(|m| m.is_some())
        .count()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_force(right_count: usize, adjacency: &[Vec<usize>]) -> usize {
        fn go(l: usize, adj: &[Vec<usize>], used: &mut Vec<bool>) -> usize {
            if l == adj.len() {
                return 0;
            }
            let mut best = go(l + 1, adj, used);
            for &r in &adj[l] {
                if !used[r] {
                    used[r] = true;
                    best = best.max(1 + go(l + 1, adj, used));
                    used[r] = false;
                }
            }
            best
        }
        go(0, adjacency, &mut vec![false; right_count])
    }

    #[test]
    fn greedy_pass_keeps_natural_pairing() {
        let adj = vec![vec![0, 1], vec![0, 1]];
        assert_eq!(maximum_matching(2, &adj), vec![Some(0), Some(1)]);
    }

    #[test]
    fn augmenting_path_reroutes() {
        // greedy gives 0->0, then 1 only likes 0, so 0 must move to 1
        let adj = vec![vec![0, 1], vec![0]];
        assert_eq!(maximum_matching(2, &adj), vec![Some(1), Some(0)]);
    }

    #[test]
    fn hall_violation_leaves_vertex_unmatched() {
        let adj = vec![vec![0], vec![0], vec![1, 2]];
        assert_eq!(matching_size(3, &adj), 2);
    }

    proptest::proptest! {
        #[test]
        fn agrees_with_brute_force(edges in proptest::collection::vec(proptest::collection::vec(0usize..5, 0..4), 0..6)) {
            let adj: Vec<Vec<usize>> = edges.into_iter().map(|mut v| { v.sort(); v.dedup(); v }).collect();
            let m = maximum_matching(5, &adj);
            let mut used = [false; 5];
            for (l, r) in m.iter().enumerate() {
                if let Some(r) = r {
                    proptest::prop_assert!(adj[l].contains(r));
                    proptest::prop_assert!(!used[*r]);
                    used[*r] = true;
                }
            }
            proptest::prop_assert_eq!(m.iter().filter(|x| x.is_some()).count(), brute_force(5, &adj));
        }
    }
}
