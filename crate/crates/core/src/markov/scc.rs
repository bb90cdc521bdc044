/// Tarjan's algorithm, iterative. Components come out in reverse
/// topological order of the condensation.
pub fn strongly_connected_components(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    const UNSEEN: usize = usize::MAX;
    let n = adj.len();
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut comps = Vec::new();
    let mut next = 0;

    for root in 0..n {
        if index[root] != UNSEEN {
            continue;
        }
        // Frames of (vertex, position in its adjacency list).
        let mut frames = vec![(root, 0usize)];
        index[root] = next;
        low[root] = next;
        next += 1;
        stack.push(root);
        on_stack[root] = true;

        while let Some(&mut (v, ref mut pos)) = frames.last_mut() {
            if let Some(&w) = adj[v].get(*pos) {
                *pos += 1;
                if index[w] == UNSEEN {
                    index[w] = next;
                    low[w] = next;
                    next += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    frames.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            frames.pop();
            if let Some(&(parent, _)) = frames.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                let mut comp = Vec::new();
                loop {
                    let w = stack.pop().expect("vertex is on the stack");
                    on_stack[w] = false;
                    comp.push(w);
                    if w == v {
                        break;
                    }
                }
                comps.push(comp);
            }
        }
    }
    comps
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn reach(adj: &[Vec<usize>], s: usize) -> Vec<bool> {
        let mut seen = vec![false; adj.len()];
        let mut st = vec![s];
        seen[s] = true;
        while let Some(v) = st.pop() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    st.push(w);
                }
            }
        }
        seen
    }

    #[test]
    fn small_graph() {
        let adj = vec![vec![1], vec![0, 2], vec![3], vec![2], vec![]];
        let mut comps = strongly_connected_components(&adj);
        for c in &mut comps {
            c.sort();
        }
        comps.sort();
        assert_eq!(comps, vec![vec![0, 1], vec![2, 3], vec![4]]);
    }

    proptest! {
        #[test]
        fn matches_mutual_reachability(edges in prop::collection::vec((0usize..8, 0usize..8), 0..20)) {
            let mut adj = vec![Vec::new(); 8];
            for (a, b) in edges {
                adj[a].push(b);
            }
            let r: Vec<Vec<bool>> = (0..8).map(|s| reach(&adj, s)).collect();
            let comps = strongly_connected_components(&adj);
            let mut comp_of = vec![0; 8];
            for (c, m) in comps.iter().enumerate() {
                for &v in m {
                    comp_of[v] = c;
                }
            }
            for a in 0..8 {
                for b in 0..8 {
                    prop_assert_eq!(comp_of[a] == comp_of[b], r[a][b] && r[b][a]);
                }
            }
        }
    }
}
