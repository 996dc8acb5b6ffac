//! Fill-reducing ordering by recursive level-structure nested dissection.
//!
//! A subgraph is split by a breadth-first level structure rooted at a
//! pseudo-peripheral node; the middle level separates the levels before it
//! from those after it and is numbered last.

use crate::sparse::SparsityPattern;

const LEAF_SIZE: usize = 64;
const OUTSIDE: u32 = u32::MAX;

struct Dissector<'a> {
    pattern: &'a SparsityPattern,
    // id of the subgraph a node currently belongs to
    part: Vec<u32>,
    level: Vec<u32>,
    next_part: u32,
    order: Vec<usize>,
}

impl Dissector<'_> {
    fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.pattern.row(v).iter().copied().filter(move |&w| w != v)
    }

    /// BFS within `part` from `root`, recording levels. Returns the visited
    /// nodes in BFS order and the number of levels.
    fn bfs(&mut self, root: usize, part: u32) -> (Vec<usize>, usize) {
        let mut visited = vec![root];
        self.level[root] = 0;
        let mut head = 0;
        let mut depth = 0;
        while head < visited.len() {
            let v = visited[head];
            head += 1;
            let lv = self.level[v];
            depth = depth.max(lv as usize + 1);
            for w in self.pattern.row(v) {
                let w = *w;
                if self.part[w] == part && self.level[w] == OUTSIDE {
                    self.level[w] = lv + 1;
                    visited.push(w);
                }
            }
        }
        (visited, depth)
    }

    fn reset_levels(&mut self, nodes: &[usize]) {
        for &v in nodes {
            self.level[v] = OUTSIDE;
        }
    }

    fn fresh_part(&mut self, nodes: &[usize]) -> u32 {
        let id = self.next_part;
        self.next_part += 1;
        for &v in nodes {
            self.part[v] = id;
        }
        id
    }

    fn dissect(&mut self, nodes: Vec<usize>) {
        if nodes.len() <= LEAF_SIZE {
            self.order.extend_from_slice(&nodes);
            return;
        }
        let part = self.fresh_part(&nodes);

        let mut components = Vec::new();
        for &v in &nodes {
            if self.level[v] == OUTSIDE {
                components.push(self.bfs(v, part).0);
            }
        }
        for c in &components {
            self.reset_levels(c);
        }
        if components.len() > 1 {
            for c in components {
                self.dissect(c);
            }
            return;
        }

        // pseudo-peripheral root: repeat BFS from a node in the last level
        let mut root = nodes[0];
        let mut depth = 0;
        for _ in 0..8 {
            let (visited, d) = self.bfs(root, part);
            let last = *visited.last().expect("non-empty");
            // among the last level pick the node of smallest degree
            let far = visited
                .iter()
                .rev()
                .take_while(|&&v| self.level[v] == self.level[last])
                .copied()
                .min_by_key(|&v| (self.neighbors(v).count(), v))
                .expect("non-empty level");
            self.reset_levels(&visited);
            if d <= depth {
                break;
            }
            depth = d;
            root = far;
        }

        let (visited, depth) = self.bfs(root, part);
        if depth < 3 {
            self.reset_levels(&visited);
            self.order.extend_from_slice(&nodes);
            return;
        }
        let mut counts = vec![0usize; depth];
        for &v in &visited {
            counts[self.level[v] as usize] += 1;
        }
        let mid = split_level(&counts) as u32;

        // thin the separator: nodes touching only one side join that side
        let in_part = |d: &Self, w: usize| d.part[w] == part;
        let sep: Vec<usize> = visited.iter().copied().filter(|&v| self.level[v] == mid).collect();
        for &v in &sep {
            if !self.neighbors(v).any(|w| in_part(self, w) && self.level[w] > mid) {
                self.level[v] = 0;
            }
        }
        for &v in &sep {
            if self.level[v] == mid && !self.neighbors(v).any(|w| in_part(self, w) && self.level[w] < mid) {
                self.level[v] = mid + 1;
            }
        }

        let mut before = Vec::new();
        let mut after = Vec::new();
        let mut separator = Vec::new();
        for &v in &visited {
            match self.level[v].cmp(&mid) {
                std::cmp::Ordering::Less => before.push(v),
                std::cmp::Ordering::Equal => separator.push(v),
                std::cmp::Ordering::Greater => after.push(v),
            }
        }
        self.reset_levels(&visited);
        for &v in &separator {
            self.part[v] = OUTSIDE;
        }
        self.dissect(before);
        self.dissect(after);
        self.order.extend_from_slice(&separator);
    }
}

/// Smallest level whose removal leaves at least a fifth of the nodes on
/// either side; the median level if none does.
fn split_level(counts: &[usize]) -> usize {
    let depth = counts.len();
    let total: usize = counts.iter().sum();
    let mut best: Option<(usize, usize, usize)> = None;
    let mut median = None;
    let mut before = 0;
    for (l, &c) in counts.iter().enumerate() {
        if median.is_none() && 2 * (before + c) >= total {
            median = Some(l);
        }
        let after = total - before - c;
        if l >= 1 && l + 2 <= depth && 5 * before.min(after) >= total {
            let key = (c, (2 * before + c).abs_diff(total), l);
            if best.map_or(true, |b| key < b) {
                best = Some(key);
            }
        }
        before += c;
    }
    best.map(|b| b.2).unwrap_or_else(|| median.unwrap_or(1).clamp(1, depth - 2))
}

/// Returns `perm` with `perm[new] = old`.
pub fn nested_dissection(pattern: &SparsityPattern) -> Vec<usize> {
    let n = pattern.n();
    let mut d = Dissector {
        pattern,
        part: vec![OUTSIDE; n],
        level: vec![OUTSIDE; n],
        next_part: 0,
        order: Vec::with_capacity(n),
    };
    d.dissect((0..n).collect());
    debug_assert_eq!(d.order.len(), n);
    d.order
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(nx: usize, ny: usize) -> SparsityPattern {
        let id = |i: usize, j: usize| j * nx + i;
        let mut e = Vec::new();
        for j in 0..ny {
            for i in 0..nx {
                if i + 1 < nx {
                    e.push((id(i, j), id(i + 1, j)));
                }
                if j + 1 < ny {
                    e.push((id(i, j), id(i, j + 1)));
                }
            }
        }
        SparsityPattern::from_entries(nx * ny, e)
    }

    #[test]
    fn is_a_permutation() {
        for (nx, ny) in [(1, 1), (5, 3), (40, 40), (100, 7)] {
            let p = nested_dissection(&grid(nx, ny));
            let mut s = p.clone();
            s.sort_unstable();
            assert_eq!(s, (0..nx * ny).collect::<Vec<_>>());
        }
    }

    #[test]
    fn handles_disconnected_graphs() {
        let p = SparsityPattern::from_entries(300, (0..99).map(|i| (i, i + 1)).chain((100..199).map(|i| (i, i + 1))).chain([(250, 251)]));
        let mut s = nested_dissection(&p);
        s.sort_unstable();
        assert_eq!(s, (0..300).collect::<Vec<_>>());
    }
}
