//! Step III: turn the residual conflicts of the starting square into extra prescriptions.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::array::AvoidanceArray;
use crate::error::{Error, Result};
use crate::square::{CellRef, LatinSquare, PartialLatinSquare};
use crate::verify::validate_pls;

/// Bipartite rows×columns graph; one edge per conflict cell whose P'-cell is empty.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConflictGraph {
    pub n: usize,
    pub edges: Vec<CellRef>,
}

impl ConflictGraph {
    pub fn max_degree(&self) -> usize {
        let mut rows = vec![0usize; self.n];
        let mut cols = vec![0usize; self.n];
        for e in &self.edges {
            rows[e.row] += 1;
            cols[e.col] += 1;
        }
        rows.into_iter().chain(cols).max().unwrap_or(0)
    }
}

/// Per-edge candidate colours, aligned with [`ConflictGraph::edges`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ListAssignment {
    pub lists: Vec<Vec<usize>>,
}

impl ListAssignment {
    pub fn min_len(&self) -> usize {
        self.lists.iter().map(Vec::len).min().unwrap_or(usize::MAX)
    }
}

pub fn build_conflict_graph(l0: &LatinSquare, a: &AvoidanceArray, p: &PartialLatinSquare) -> ConflictGraph {
    let n = l0.order();
    let mut edges = Vec::new();
    for r in 0..n {
        for c in 0..n {
            if a.contains(r, c, l0.get(r, c)) && p.get(r, c).is_none() {
                edges.push(CellRef::new(r, c));
            }
        }
    }
    ConflictGraph { n, edges }
}

/// `c ∈ L(i, j)` iff `c ∉ A'(i, j)` and `c` is absent from row i and column j of P'.
pub fn build_lists(g: &ConflictGraph, a: &AvoidanceArray, p: &PartialLatinSquare) -> ListAssignment {
    let n = g.n;
    let mut row_has = vec![vec![false; n]; n];
    let mut col_has = vec![vec![false; n]; n];
    for (cell, s) in p.entries() {
        row_has[cell.row][s] = true;
        col_has[cell.col][s] = true;
    }
    let lists = g
        .edges
        .iter()
        .map(|e| {
            (0..n)
                .filter(|&s| !a.contains(e.row, e.col, s) && !row_has[e.row][s] && !col_has[e.col][s])
                .collect()
        })
        .collect();
    ListAssignment { lists }
}

const COLORING_ATTEMPTS: usize = 32;

/// A proper list edge colouring in which every colour is used at most `f` times.
///
/// Greedy over a random edge order, preferring colours free at both ends and
/// used fewer than `f` times. When only over-used colours remain, one edge of
/// such a colour is moved to a colour used at most `f - 1` times, which frees
/// a slot. A failed pass restarts with a fresh order.
pub fn list_edge_color_bounded<R: Rng + ?Sized>(
    g: &ConflictGraph,
    lists: &ListAssignment,
    f: usize,
    rng: &mut R,
) -> Result<Vec<usize>> {
    if g.edges.is_empty() {
        return Ok(Vec::new());
    }
    if f == 0 {
        return Err(Error::ColoringFailed("multiplicity bound f is 0".into()));
    }
    if lists.lists.len() != g.edges.len() {
        return Err(Error::ColoringFailed("list count differs from edge count".into()));
    }
    for _ in 0..COLORING_ATTEMPTS {
        if let Some(colors) = greedy_pass(g, lists, f, rng) {
            return Ok(colors);
        }
    }
    Err(Error::ColoringFailed(format!("no colouring found in {COLORING_ATTEMPTS} passes")))
}

struct Coloring {
    n: usize,
    row_color: Vec<Option<usize>>, // (row, color) -> edge index
    col_color: Vec<Option<usize>>,
    usage: Vec<usize>,
    color: Vec<Option<usize>>,
    by_color: Vec<Vec<usize>>,
}

impl Coloring {
    fn free(&self, e: CellRef, c: usize) -> bool {
        self.row_color[e.row * self.n + c].is_none() && self.col_color[e.col * self.n + c].is_none()
    }

    fn assign(&mut self, idx: usize, e: CellRef, c: usize) {
        self.row_color[e.row * self.n + c] = Some(idx);
        self.col_color[e.col * self.n + c] = Some(idx);
        self.usage[c] += 1;
        self.color[idx] = Some(c);
        self.by_color[c].push(idx);
    }

    fn unassign(&mut self, idx: usize, e: CellRef) {
        let c = self.color[idx].take().expect("coloured");
        self.row_color[e.row * self.n + c] = None;
        self.col_color[e.col * self.n + c] = None;
        self.usage[c] -= 1;
        self.by_color[c].retain(|&x| x != idx);
    }
}

fn greedy_pass<R: Rng + ?Sized>(g: &ConflictGraph, lists: &ListAssignment, f: usize, rng: &mut R) -> Option<Vec<usize>> {
    let n = g.n;
    let mut st = Coloring {
        n,
        row_color: vec![None; n * n],
        col_color: vec![None; n * n],
        usage: vec![0; n],
        color: vec![None; g.edges.len()],
        by_color: vec![Vec::new(); n],
    };
    let mut order: Vec<usize> = (0..g.edges.len()).collect();
    order.shuffle(rng);
    for idx in order {
        let e = g.edges[idx];
        let list = &lists.lists[idx];
        let good: Vec<usize> = list.iter().copied().filter(|&c| st.free(e, c) && st.usage[c] < f).collect();
        if let Some(&c) = good.choose(rng) {
            st.assign(idx, e, c);
            continue;
        }
        let mut proper: Vec<usize> = list.iter().copied().filter(|&c| st.free(e, c)).collect();
        proper.shuffle(rng);
        let mut done = false;
        'outer: for c0 in proper {
            let holders = st.by_color[c0].clone();
            for other in holders {
                let oe = g.edges[other];
                let target = lists.lists[other]
                    .iter()
                    .copied()
                    .find(|&c| c != c0 && st.free(oe, c) && st.usage[c] < f);
                if let Some(c) = target {
                    st.unassign(other, oe);
                    st.assign(other, oe, c);
                    st.assign(idx, e, c0);
                    done = true;
                    break 'outer;
                }
            }
        }
        if !done {
            return None;
        }
    }
    Some(st.color.into_iter().map(|c| c.expect("all coloured")).collect())
}

/// `P̂ = P' ∪ R`, where R places each edge's colour at its cell.
pub fn build_r_and_merge(g: &ConflictGraph, coloring: &[usize], p: &PartialLatinSquare) -> Result<PartialLatinSquare> {
    let mut out = p.clone();
    for (e, &c) in g.edges.iter().zip(coloring) {
        if out.at(*e).is_some() {
            return Err(Error::MergeClash(*e));
        }
        out.set(e.row, e.col, Some(c));
    }
    let report = validate_pls(&out);
    if !report.is_valid() {
        return Err(Error::PreconditionViolated(format!("merged square is not a PLS: {report}")));
    }
    Ok(out)
}

/// Checks properness, list membership and the multiplicity bound.
pub fn check_coloring(g: &ConflictGraph, lists: &ListAssignment, f: usize, coloring: &[usize]) -> bool {
    if coloring.len() != g.edges.len() {
        return false;
    }
    let n = g.n;
    let mut row_seen = std::collections::HashSet::new();
    let mut col_seen = std::collections::HashSet::new();
    let mut usage = vec![0usize; n];
    for (i, (e, &c)) in g.edges.iter().zip(coloring).enumerate() {
        if !lists.lists[i].contains(&c) || !row_seen.insert((e.row, c)) || !col_seen.insert((e.col, c)) {
            return false;
        }
        usage[c] += 1;
    }
    usage.iter().all(|&u| u <= f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_edge_single_colour() {
        let g = ConflictGraph { n: 8, edges: vec![CellRef::new(1, 2)] };
        let lists = ListAssignment { lists: vec![vec![6]] };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(list_edge_color_bounded(&g, &lists, 1, &mut rng).unwrap(), vec![6]);
    }

    #[test]
    fn shared_vertex_forces_distinct() {
        let g = ConflictGraph { n: 3, edges: vec![CellRef::new(0, 0), CellRef::new(0, 1)] };
        let lists = ListAssignment { lists: vec![vec![0, 1], vec![0, 1]] };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let col = list_edge_color_bounded(&g, &lists, 2, &mut rng).unwrap();
        assert_ne!(col[0], col[1]);
    }

    #[test]
    fn lists_subtract_array_and_lines() {
        let mut a = AvoidanceArray::empty(5);
        a.insert(0, 1, 2);
        let p = PartialLatinSquare::from_entries(5, &[(0, 4, 3)]).unwrap();
        let g = ConflictGraph { n: 5, edges: vec![CellRef::new(0, 1)] };
        assert_eq!(build_lists(&g, &a, &p).lists, vec![vec![0, 1, 4]]);
    }

    #[test]
    fn conflict_graph_excludes_prescribed() {
        let l = LatinSquare::cyclic(4);
        let mut a = AvoidanceArray::empty(4);
        a.insert(1, 2, l.get(1, 2));
        assert_eq!(build_conflict_graph(&l, &a, &PartialLatinSquare::empty(4)).edges, vec![CellRef::new(1, 2)]);
        let p = PartialLatinSquare::from_entries(4, &[(1, 2, l.get(1, 2))]).unwrap();
        assert!(build_conflict_graph(&l, &a, &p).edges.is_empty());
    }

    #[test]
    fn merge_places_colour() {
        let g = ConflictGraph { n: 5, edges: vec![CellRef::new(1, 2)] };
        let merged = build_r_and_merge(&g, &[4], &PartialLatinSquare::empty(5)).unwrap();
        assert_eq!(merged.filled_count(), 1);
        assert_eq!(merged.get(1, 2), Some(4));
    }
}
