//! Bipartite matching utilities on support patterns.
//!
//! These are the combinatorial oracles the scaling pipeline is tested
//! against: augmenting-path maximum matching, the Dulmage-Mendelsohn
//! exposed-column set, and exhaustive surplus minimization.

/// Support graph on rows × cols; `adj[i]` lists the columns adjacent to row i.
#[derive(Clone, Debug)]
pub struct SupportGraph {
    pub rows: usize,
    pub cols: usize,
    pub adj: Vec<Vec<usize>>,
}

impl SupportGraph {
    pub fn from_pattern(rows: usize, cols: usize, edges: &[(usize, usize)]) -> Self {
        let mut adj = vec![Vec::new(); rows];
        for &(i, j) in edges {
            assert!(i < rows && j < cols);
            adj[i].push(j);
        }
        for a in adj.iter_mut() {
            a.sort_unstable();
            a.dedup();
        }
        SupportGraph { rows, cols, adj }
    }

    pub fn from_matrix(a: &[Vec<f64>]) -> Self {
        let rows = a.len();
        let cols = a.first().map(|r| r.len()).unwrap_or(0);
        let mut edges = Vec::new();
        for (i, row) in a.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    edges.push((i, j));
                }
            }
        }
        Self::from_pattern(rows, cols, &edges)
    }

    /// Kuhn's augmenting-path maximum matching. Returns per-column matched row.
    pub fn maximum_matching(&self) -> Vec<Option<usize>> {
        let mut match_col: Vec<Option<usize>> = vec![None; self.cols];
        let mut match_row: Vec<Option<usize>> = vec![None; self.rows];
        for r in 0..self.rows {
            let mut seen = vec![false; self.cols];
            self.try_augment(r, &mut seen, &mut match_col, &mut match_row);
        }
        match_col
    }

    fn try_augment(
        &self,
        r: usize,
        seen: &mut [bool],
        match_col: &mut Vec<Option<usize>>,
        match_row: &mut Vec<Option<usize>>,
    ) -> bool {
        for &c in &self.adj[r] {
            if !seen[c] {
                seen[c] = true;
                if match_col[c].is_none()
                    || self.try_augment(match_col[c].unwrap(), seen, match_col, match_row)
                {
                    match_col[c] = Some(r);
                    match_row[r] = Some(c);
                    return true;
                }
            }
        }
        false
    }

    pub fn max_matching_size(&self) -> usize {
        self.maximum_matching().iter().filter(|m| m.is_some()).count()
    }

    /// Columns exposed by some maximum matching (the Dulmage-Mendelsohn
    /// set): free columns plus those reachable from one by alternating paths.
    pub fn dm_exposed_columns(&self) -> Vec<usize> {
        let match_col = self.maximum_matching();
        let mut match_row: Vec<Option<usize>> = vec![None; self.rows];
        for (c, m) in match_col.iter().enumerate() {
            if let Some(r) = m {
                match_row[*r] = Some(c);
            }
        }
        // BFS over columns: free col -> (non-matching edge) row -> (matching edge) col
        let mut col_adj = vec![Vec::new(); self.cols];
        for (r, cs) in self.adj.iter().enumerate() {
            for &c in cs {
                col_adj[c].push(r);
            }
        }
        let mut reach = vec![false; self.cols];
        let mut queue: Vec<usize> = (0..self.cols).filter(|&c| match_col[c].is_none()).collect();
        for &c in &queue {
            reach[c] = true;
        }
        while let Some(c) = queue.pop() {
            for &r in &col_adj[c] {
                if match_col[c] == Some(r) {
                    continue;
                }
                if let Some(c2) = match_row[r] {
                    if !reach[c2] {
                        reach[c2] = true;
                        queue.push(c2);
                    }
                }
            }
        }
        (0..self.cols).filter(|&c| reach[c]).collect()
    }

    /// Neighborhood of a column subset.
    pub fn neighborhood(&self, s: &[usize]) -> Vec<usize> {
        let mut hit = vec![false; self.rows];
        for (r, cs) in self.adj.iter().enumerate() {
            if cs.iter().any(|c| s.contains(c)) {
                hit[r] = true;
            }
        }
        (0..self.rows).filter(|&r| hit[r]).collect()
    }

    /// Exhaustive smallest minimizer of the surplus |Γ(S)| − |S| over all
    /// column subsets. Only for small instances (oracle use).
    pub fn exhaustive_smallest_surplus_minimizer(&self) -> Vec<usize> {
        assert!(self.cols <= 20, "exhaustive oracle only for small instances");
        let mut best_val = i64::MAX;
        let mut minimizers: Vec<Vec<usize>> = Vec::new();
        for mask in 0u32..(1 << self.cols) {
            let s: Vec<usize> = (0..self.cols).filter(|&c| mask >> c & 1 == 1).collect();
            let v = self.neighborhood(&s).len() as i64 - s.len() as i64;
            match v.cmp(&best_val) {
                std::cmp::Ordering::Less => {
                    best_val = v;
                    minimizers = vec![s];
                }
                std::cmp::Ordering::Equal => minimizers.push(s),
                std::cmp::Ordering::Greater => {}
            }
        }
        // the minimizer lattice is closed under intersection, so the
        // smallest-cardinality one is unique
        minimizers.sort_by_key(|s| s.len());
        minimizers[0].clone()
    }
}

/// Small deterministic xorshift generator for oracle-side case generation.
pub struct XorShift(pub u64);

impl XorShift {
    pub fn next(&mut self) -> u64 {
        self.0 ^= self.0 << 13;
        self.0 ^= self.0 >> 7;
        self.0 ^= self.0 << 17;
        self.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matching_identity() {
        let g = SupportGraph::from_pattern(3, 3, &[(0, 0), (1, 1), (2, 2)]);
        assert_eq!(g.max_matching_size(), 3);
        assert!(g.dm_exposed_columns().is_empty());
        assert!(g.exhaustive_smallest_surplus_minimizer().is_empty());
    }

    #[test]
    fn blocker_example() {
        // cols {0,1} see only row 0: the unique smallest blocker
        let g = SupportGraph::from_pattern(3, 3, &[(0, 0), (0, 1), (1, 2), (2, 2)]);
        assert_eq!(g.max_matching_size(), 2);
        assert_eq!(g.dm_exposed_columns(), vec![0, 1]);
        assert_eq!(g.exhaustive_smallest_surplus_minimizer(), vec![0, 1]);
    }

    #[test]
    fn full_matrix_no_blocker() {
        let g = SupportGraph::from_matrix(&[vec![1.0, 1.0], vec![1.0, 1.0]]);
        assert_eq!(g.max_matching_size(), 2);
        assert!(g.exhaustive_smallest_surplus_minimizer().is_empty());
    }

    #[test]
    fn dm_equals_exhaustive_on_grid() {
        let mut rng = XorShift(0x9E3779B97F4A7C15);
        for _case in 0..200 {
            let rows = 1 + (rng.next() % 5) as usize;
            let cols = 1 + (rng.next() % 5) as usize;
            let mut edges = Vec::new();
            for i in 0..rows {
                for j in 0..cols {
                    if rng.next() % 3 == 0 {
                        edges.push((i, j));
                    }
                }
            }
            let g = SupportGraph::from_pattern(rows, cols, &edges);
            assert_eq!(
                g.dm_exposed_columns(),
                g.exhaustive_smallest_surplus_minimizer(),
                "pattern {edges:?}"
            );
        }
    }
}
