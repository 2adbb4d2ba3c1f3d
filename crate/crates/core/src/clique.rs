//! Exhaustive clique enumeration.
//!
//! Branch and bound over bitset candidate sets with greedy colour-class upper
//! bounds. The root level is split by the least candidate vertex of each
//! clique, so roots are independent and can run on separate workers; results
//! are merged and sorted, making output identical to a single-threaded run.
//! A search that runs out of budget fails with [`GraphError::Timeout`] and
//! never returns a partial list.

use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};

use rayon::prelude::*;

use crate::bitset::BitSet;
use crate::budget::Budget;
use crate::graph::{Clique, Graph, GraphError};

#[derive(Debug, Clone, Copy)]
pub struct CliqueQuery {
    /// Enumerate cliques of exactly this size instead of maximum cliques.
    pub target: Option<usize>,
    /// Only cliques containing this vertex.
    pub through: Option<usize>,
    pub budget: Budget,
    pub parallel: bool,
}

impl Default for CliqueQuery {
    fn default() -> Self {
        CliqueQuery { target: None, through: None, budget: Budget::default(), parallel: true }
    }
}

impl CliqueQuery {
    pub fn through(mut self, v: usize) -> Self {
        self.through = Some(v);
        self
    }

    pub fn target(mut self, k: usize) -> Self {
        self.target = Some(k);
        self
    }

    pub fn budget(mut self, budget: Budget) -> Self {
        self.budget = budget;
        self
    }

    pub fn sequential(mut self) -> Self {
        self.parallel = false;
        self
    }
}

#[derive(Clone, Copy)]
enum Mode {
    Exact(usize),
    Maximum,
}

struct Search<'a> {
    g: &'a Graph,
    mode: Mode,
    budget: Budget,
    timed_out: &'a AtomicBool,
    best: &'a AtomicUsize,
}

struct Worker {
    found: Vec<Vec<usize>>,
    ticks: u32,
}

impl Search<'_> {
    fn check_budget(&self, w: &mut Worker) -> Result<(), ()> {
        w.ticks = w.ticks.wrapping_add(1);
        if w.ticks % 512 == 0 && self.budget.expired() {
            self.timed_out.store(true, Ordering::Relaxed);
        }
        if self.timed_out.load(Ordering::Relaxed) {
            Err(())
        } else {
            Ok(())
        }
    }

    /// Vertices of `p` with their greedy colour numbers, ascending by colour.
    fn color_sort(&self, p: &BitSet) -> Vec<(usize, usize)> {
        let mut uncolored = p.clone();
        let mut out = Vec::with_capacity(p.count());
        let mut color = 0;
        while !uncolored.is_empty() {
            color += 1;
            let mut q = uncolored.clone();
            while let Some(v) = q.first() {
                q.remove(v);
                q.difference_with(self.g.neighbors(v));
                uncolored.remove(v);
                out.push((v, color));
            }
        }
        out
    }

    fn threshold(&self) -> usize {
        match self.mode {
            Mode::Exact(t) => t,
            Mode::Maximum => self.best.load(Ordering::Relaxed),
        }
    }

    fn record(&self, r: &[usize], w: &mut Worker) {
        let mut c = r.to_vec();
        c.sort_unstable();
        if let Mode::Maximum = self.mode {
            let prev = self.best.fetch_max(c.len(), Ordering::Relaxed);
            if c.len() < prev {
                return;
            }
        }
        w.found.push(c);
    }

    fn expand(&self, r: &mut Vec<usize>, mut p: BitSet, w: &mut Worker) -> Result<(), ()> {
        self.check_budget(w)?;
        if let Mode::Exact(t) = self.mode {
            if r.len() == t {
                self.record(r, w);
                return Ok(());
            }
        }
        if p.is_empty() {
            if let Mode::Maximum = self.mode {
                if r.len() >= self.threshold() {
                    self.record(r, w);
                }
            }
            return Ok(());
        }
        let order = self.color_sort(&p);
        for &(v, color) in order.iter().rev() {
            if r.len() + color < self.threshold() {
                return Ok(());
            }
            r.push(v);
            let next = p.intersection(self.g.neighbors(v));
            self.expand(r, next, w)?;
            r.pop();
            p.remove(v);
        }
        Ok(())
    }

    fn run_root(&self, base: &[usize], p0: &BitSet, u: usize) -> Result<Vec<Vec<usize>>, ()> {
        let mut w = Worker { found: Vec::new(), ticks: 0 };
        let mut r = base.to_vec();
        r.push(u);
        let mut p = p0.intersection(self.g.neighbors(u));
        p.retain_above(u);
        if r.len() + p.count() >= self.threshold() {
            self.expand(&mut r, p, &mut w)?;
        }
        Ok(w.found)
    }
}

fn greedy_clique(g: &Graph, base: &[usize], p0: &BitSet) -> usize {
    let mut p = p0.clone();
    let mut size = base.len();
    while let Some(v) = p.iter().max_by_key(|&v| g.neighbors(v).intersection_count(&p)) {
        size += 1;
        p.intersect_with(g.neighbors(v));
    }
    size
}

fn search(g: &Graph, query: &CliqueQuery, mode: Mode) -> Result<Vec<Clique>, GraphError> {
    let timeout = || GraphError::Timeout(query.budget.allowance().unwrap_or(f64::INFINITY));
    if query.budget.expired() {
        return Err(timeout());
    }
    let n = g.n();
    let (base, p0) = match query.through {
        Some(v) if v >= n => return Err(GraphError::VertexOutOfRange(v, n)),
        Some(v) => (vec![v], g.neighbors(v).clone()),
        None => (Vec::new(), BitSet::full(n)),
    };

    match mode {
        Mode::Exact(t) if base.len() >= t => {
            return Ok(if base.len() == t { vec![Clique::new(base)] } else { Vec::new() });
        }
        Mode::Maximum if p0.is_empty() => {
            return Ok(if base.is_empty() { Vec::new() } else { vec![Clique::new(base)] });
        }
        _ => {}
    }

    let timed_out = AtomicBool::new(false);
    let best = AtomicUsize::new(match mode {
        Mode::Exact(t) => t,
        Mode::Maximum => greedy_clique(g, &base, &p0),
    });
    let s = Search { g, mode, budget: query.budget, timed_out: &timed_out, best: &best };
    let roots: Vec<usize> = p0.iter().collect();
    let results: Vec<Result<Vec<Vec<usize>>, ()>> = if query.parallel {
        roots.par_iter().map(|&u| s.run_root(&base, &p0, u)).collect()
    } else {
        roots.iter().map(|&u| s.run_root(&base, &p0, u)).collect()
    };
    let mut all = Vec::new();
    for r in results {
        all.extend(r.map_err(|_| timeout())?);
    }
    if let Mode::Maximum = mode {
        let top = all.iter().map(Vec::len).max().unwrap_or(0);
        all.retain(|c| c.len() == top);
    }
    let mut out: Vec<Clique> = all.into_iter().map(|vertices| Clique { vertices }).collect();
    out.sort();
    out.dedup();
    Ok(out)
}

/// All maximum cliques (or all cliques of size `query.target`), optionally
/// restricted to those through `query.through`, in lexicographic order.
///
/// When the graph carries an SRG certificate with an integral Hoffman bound,
/// cliques meeting that bound are searched for first; if any exist they are
/// necessarily maximum.
pub fn enumerate_max_cliques(g: &Graph, query: &CliqueQuery) -> Result<Vec<Clique>, GraphError> {
    if let Some(t) = query.target {
        return search(g, query, Mode::Exact(t));
    }
    if let Some(h) = g.srg().and_then(|p| p.integral_hoffman_bound()) {
        let found = search(g, query, Mode::Exact(h))?;
        if !found.is_empty() {
            return Ok(found);
        }
    }
    search(g, query, Mode::Maximum)
}

pub fn clique_number(g: &Graph, budget: Budget) -> Result<usize, GraphError> {
    let q = CliqueQuery { budget, ..CliqueQuery::default() };
    Ok(enumerate_max_cliques(g, &q)?.first().map_or(0, Clique::len))
}

/// All maximal cliques through `v` (Bron–Kerbosch with pivoting), sorted.
pub fn maximal_cliques_through(g: &Graph, v: usize, budget: Budget) -> Result<Vec<Clique>, GraphError> {
    if v >= g.n() {
        return Err(GraphError::VertexOutOfRange(v, g.n()));
    }
    let timeout = || GraphError::Timeout(budget.allowance().unwrap_or(f64::INFINITY));
    if budget.expired() {
        return Err(timeout());
    }
    fn bk(
        g: &Graph,
        r: &mut Vec<usize>,
        mut p: BitSet,
        mut x: BitSet,
        out: &mut Vec<Clique>,
        budget: &Budget,
        ticks: &mut u32,
    ) -> Result<(), ()> {
        *ticks = ticks.wrapping_add(1);
        if *ticks % 512 == 0 && budget.expired() {
            return Err(());
        }
        if p.is_empty() {
            if x.is_empty() {
                out.push(Clique::new(r.clone()));
            }
            return Ok(());
        }
        let pivot = p
            .iter()
            .chain(x.iter())
            .max_by_key(|&u| g.neighbors(u).intersection_count(&p))
            .expect("p is nonempty");
        let mut branch = p.clone();
        branch.difference_with(g.neighbors(pivot));
        for u in branch.iter().collect::<Vec<_>>() {
            r.push(u);
            bk(g, r, p.intersection(g.neighbors(u)), x.intersection(g.neighbors(u)), out, budget, ticks)?;
            r.pop();
            p.remove(u);
            x.insert(u);
        }
        Ok(())
    }
    let mut out = Vec::new();
    let mut ticks = 0;
    bk(g, &mut vec![v], g.neighbors(v).clone(), BitSet::new(g.n()), &mut out, &budget, &mut ticks)
        .map_err(|_| timeout())?;
    out.sort();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_force_max(g: &Graph) -> Vec<Clique> {
        let n = g.n();
        let mut best: Vec<Clique> = Vec::new();
        for mask in 1u32..(1 << n) {
            let vs: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
            if g.is_clique(&vs).is_err() {
                continue;
            }
            let c = Clique::new(vs);
            match best.first().map(Clique::len) {
                Some(b) if c.len() < b => {}
                Some(b) if c.len() == b => best.push(c),
                _ => best = vec![c],
            }
        }
        best.sort();
        best
    }

    fn pseudo_random_graph(n: usize, seed: u64, density: u64) -> Graph {
        let mut state = seed;
        Graph::from_fn(n, |_, _| {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 33) % 100 < density
        })
    }

    #[test]
    fn matches_brute_force_on_small_graphs() {
        for seed in 0..20 {
            let g = pseudo_random_graph(12, seed, 55);
            let got = enumerate_max_cliques(&g, &CliqueQuery::default()).unwrap();
            assert_eq!(got, brute_force_max(&g), "seed {seed}");
            let seq = enumerate_max_cliques(&g, &CliqueQuery::default().sequential()).unwrap();
            assert_eq!(got, seq);
        }
    }

    #[test]
    fn through_vertex_filters() {
        let g = pseudo_random_graph(14, 7, 60);
        let all = enumerate_max_cliques(&g, &CliqueQuery::default()).unwrap();
        let size = all[0].len();
        for v in 0..14 {
            let through =
                enumerate_max_cliques(&g, &CliqueQuery::default().through(v).target(size)).unwrap();
            let expected: Vec<Clique> = all.iter().filter(|c| c.contains(v)).cloned().collect();
            assert_eq!(through, expected);
        }
    }

    #[test]
    fn exact_target_lists_all_triangles() {
        let g = Graph::complete(5);
        let tri = enumerate_max_cliques(&g, &CliqueQuery::default().target(3)).unwrap();
        assert_eq!(tri.len(), 10);
    }

    #[test]
    fn zero_budget_times_out() {
        let g = Graph::complete(5);
        let q = CliqueQuery::default().budget(Budget::seconds(0.0));
        assert!(matches!(enumerate_max_cliques(&g, &q), Err(GraphError::Timeout(_))));
    }

    #[test]
    fn maximal_cliques_of_a_path() {
        let g = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        let got = maximal_cliques_through(&g, 1, Budget::unlimited()).unwrap();
        assert_eq!(got, vec![Clique::new(vec![0, 1]), Clique::new(vec![1, 2])]);
    }

    #[test]
    fn edgeless_graph_has_singleton_cliques() {
        let g = Graph::empty(3);
        let got = enumerate_max_cliques(&g, &CliqueQuery::default()).unwrap();
        assert_eq!(got.len(), 3);
        assert!(got.iter().all(|c| c.len() == 1));
    }
}
