//! Strongly connected components of small directed graphs.

/// Tarjan's algorithm. Returns the component of every vertex; components are
/// numbered in reverse topological order (sinks first).
pub(crate) fn scc(adj: &[Vec<usize>]) -> (Vec<usize>, usize) {
    let n = adj.len();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut comp = vec![usize::MAX; n];
    let mut stack = Vec::new();
    let mut next = 0;
    let mut count = 0;
    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = next;
        low[root] = next;
        next += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut i)) = call.last_mut() {
            if *i < adj[v].len() {
                let w = adj[v][*i];
                *i += 1;
                if index[w] == usize::MAX {
                    index[w] = next;
                    low[w] = next;
                    next += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(p, _)) = call.last() {
                    low[p] = low[p].min(low[v]);
                }
                if low[v] == index[v] {
                    loop {
                        let w = stack.pop().unwrap();
                        on_stack[w] = false;
                        comp[w] = count;
                        if w == v {
                            break;
                        }
                    }
                    count += 1;
                }
            }
        }
    }
    (comp, count)
}

/// Whether vertex `v` lies on a directed cycle.
pub(crate) fn on_cycle(adj: &[Vec<usize>], comp: &[usize], v: usize) -> bool {
    adj[v].iter().any(|&w| comp[w] == comp[v])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn components_and_cycles() {
        // 0 -> 1 -> 2 -> 1, 2 -> 3, 3 -> 3
        let adj = vec![vec![1], vec![2], vec![1, 3], vec![3]];
        let (comp, count) = scc(&adj);
        assert_eq!(count, 3);
        assert_eq!(comp[1], comp[2]);
        assert_ne!(comp[0], comp[1]);
        // sinks first
        assert!(comp[3] < comp[1] && comp[1] < comp[0]);
        assert!(!on_cycle(&adj, &comp, 0));
        assert!(on_cycle(&adj, &comp, 1));
        assert!(on_cycle(&adj, &comp, 3));
    }
}
