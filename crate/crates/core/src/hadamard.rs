//! Weakly Hadamard matrices and an explicit weakly Hadamard diagonalization
//! of the Laplacian of a Peisert-type graph.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ekr::{eigenfunction_check, EigenCheck, EkrError};
use crate::graph::Graph;
use crate::linalg::{rat, RationalMatrix};
use crate::oa::SubarraySelection;
use crate::peisert::PeisertGraph;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HadamardError {
    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },
    #[error("entry {value} at ({row}, {col}) is not in {{-1, 0, 1}}")]
    BadEntries { row: usize, col: usize, value: i64 },
    #[error("certification failed at column {column}: {check}")]
    CertificationFailed { column: usize, check: String },
    #[error(transparent)]
    Ekr(#[from] EkrError),
    #[error("csv: {0}")]
    Csv(String),
}

/// Square integer matrix, row-major.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateMatrix {
    n: usize,
    entries: Vec<i64>,
}

impl CandidateMatrix {
    pub fn from_rows(rows: Vec<Vec<i64>>) -> Result<Self, HadamardError> {
        let n = rows.len();
        if let Some(r) = rows.iter().find(|r| r.len() != n) {
            return Err(HadamardError::NotSquare { rows: n, cols: r.len() });
        }
        Ok(CandidateMatrix { n, entries: rows.into_iter().flatten().collect() })
    }

    pub fn from_columns(cols: &[Vec<i64>]) -> Result<Self, HadamardError> {
        let n = cols.len();
        if let Some(c) = cols.iter().find(|c| c.len() != n) {
            return Err(HadamardError::NotSquare { rows: c.len(), cols: n });
        }
        let rows = (0..n).map(|i| cols.iter().map(|c| c[i]).collect()).collect();
        Self::from_rows(rows)
    }

    pub fn identity(n: usize) -> Self {
        CandidateMatrix { n, entries: (0..n * n).map(|k| (k / n == k % n) as i64).collect() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.entries[i * self.n + j]
    }

    pub fn column(&self, j: usize) -> Vec<i64> {
        (0..self.n).map(|i| self.get(i, j)).collect()
    }

    pub fn column_dot(&self, a: usize, b: usize) -> i64 {
        (0..self.n).map(|i| self.get(i, a) * self.get(i, b)).sum()
    }

    fn check_entries(&self) -> Result<(), HadamardError> {
        match self.entries.iter().position(|v| !(-1..=1).contains(v)) {
            Some(k) => Err(HadamardError::BadEntries { row: k / self.n, col: k % self.n, value: self.entries[k] }),
            None => Ok(()),
        }
    }

    pub fn rank(&self) -> usize {
        RationalMatrix::from_fn(self.n, self.n, |i, j| rat(self.get(i, j))).rank()
    }
}

/// Why no admissible column ordering exists.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Obstruction {
    /// A column non-orthogonal to three or more others.
    Branch { column: usize, partners: Vec<usize> },
    /// A cycle in the non-orthogonality graph.
    Cycle { columns: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum WeakHadamardVerdict {
    Holds { ordering: Vec<usize> },
    Fails { obstruction: Obstruction },
}

impl WeakHadamardVerdict {
    pub fn holds(&self) -> bool {
        matches!(self, WeakHadamardVerdict::Holds { .. })
    }
}

/// An ordering with all non-consecutive columns orthogonal exists exactly
/// when the non-orthogonality graph on columns is a disjoint union of paths;
/// the paths laid end to end give one.
pub fn is_weakly_hadamard(m: &CandidateMatrix) -> Result<WeakHadamardVerdict, HadamardError> {
    m.check_entries()?;
    let n = m.n();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for a in 0..n {
        for b in a + 1..n {
            if m.column_dot(a, b) != 0 {
                adj[a].push(b);
                adj[b].push(a);
            }
        }
    }
    if let Some(column) = (0..n).find(|&v| adj[v].len() > 2) {
        return Ok(WeakHadamardVerdict::Fails {
            obstruction: Obstruction::Branch { column, partners: adj[column].clone() },
        });
    }
    let mut seen = vec![false; n];
    let mut ordering = Vec::with_capacity(n);
    for start in 0..n {
        if seen[start] || adj[start].len() == 2 {
            continue;
        }
        let (mut prev, mut cur) = (usize::MAX, start);
        loop {
            seen[cur] = true;
            ordering.push(cur);
            match adj[cur].iter().find(|&&w| w != prev) {
                Some(&next) if !seen[next] => (prev, cur) = (cur, next),
                _ => break,
            }
        }
    }
    // Anything left has degree two everywhere: a union of cycles.
    if let Some(start) = (0..n).find(|&v| !seen[v]) {
        let mut columns = vec![start];
        let (mut prev, mut cur) = (start, adj[start][0]);
        while cur != start {
            columns.push(cur);
            let next = *adj[cur].iter().find(|&&w| w != prev).expect("degree two");
            (prev, cur) = (cur, next);
        }
        return Ok(WeakHadamardVerdict::Fails { obstruction: Obstruction::Cycle { columns } });
    }
    Ok(WeakHadamardVerdict::Holds { ordering })
}

/// Where a column of the diagonalizing matrix comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ColumnSource {
    AllOnes,
    /// `χ_{S_{r,i}} − χ_{S_{r,i+1}}` for row `r` of the full array.
    Difference { row: usize, used: bool, i: u32 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WhdCertificate {
    pub matrix: CandidateMatrix,
    pub ordering: Vec<usize>,
    pub sources: Vec<ColumnSource>,
    /// Adjacency eigenvalue of each column.
    pub eigenvalue_of_column: Vec<i64>,
    /// Laplacian eigenvalue of each column.
    pub diagonal: Vec<i64>,
    pub rank: usize,
    /// Adjacency eigenvalue → number of columns.
    pub tally: BTreeMap<i64, usize>,
}

fn fail(column: usize, check: impl Into<String>) -> HadamardError {
    HadamardError::CertificationFailed { column, check: check.into() }
}

/// Consecutive-difference basis over every slope of the full array,
/// certified column by column.
pub fn build_whd(x: &PeisertGraph, sel: &SubarraySelection) -> Result<WhdCertificate, HadamardError> {
    let g = x.graph();
    let n = g.n();
    let (q, m) = (x.q() as i64, x.m() as i64);
    let k = m * (q - 1);
    let parent = sel.parent();
    let used: Vec<usize> = sel.slopes().iter().map(|s| s.row).collect();

    let mut cols: Vec<Vec<i64>> = vec![vec![1; n]];
    let mut sources = vec![ColumnSource::AllOnes];
    let mut eig = vec![k];
    for row in 0..parent.m() {
        let is_used = used.contains(&row);
        let lines: Vec<Vec<usize>> = (0..q as u32).map(|s| sel.line_vertices(row, s)).collect();
        for i in 0..q as usize - 1 {
            let mut col = vec![0i64; n];
            for &v in &lines[i] {
                col[v] += 1;
            }
            for &v in &lines[i + 1] {
                col[v] -= 1;
            }
            cols.push(col);
            sources.push(ColumnSource::Difference { row, used: is_used, i: i as u32 });
            eig.push(if is_used { q - m } else { -m });
        }
    }
    if cols.len() != n {
        return Err(fail(cols.len(), format!("built {} columns for {n} vertices", cols.len())));
    }

    // (a) eigenvectors of A
    for (j, (col, &theta)) in cols.iter().zip(&eig).enumerate() {
        if let EigenCheck::FailsAt { vertex } = eigenfunction_check(g, col, &theta)? {
            return Err(fail(j, format!("not a {theta}-eigenvector (vertex {vertex})")));
        }
    }
    let matrix = CandidateMatrix::from_columns(&cols)?;

    // (b) orthogonality pattern: only consecutive columns of one slope interact
    for a in 0..n {
        for b in a + 1..n {
            let d = matrix.column_dot(a, b);
            let same_slope_neighbours = matches!(
                (sources[a], sources[b]),
                (ColumnSource::Difference { row: r1, i: i1, .. }, ColumnSource::Difference { row: r2, i: i2, .. })
                    if r1 == r2 && i2 == i1 + 1
            );
            if (d != 0) != same_slope_neighbours {
                return Err(fail(b, format!("unexpected dot product {d} with column {a}")));
            }
        }
    }
    let ordering = match is_weakly_hadamard(&matrix)? {
        WeakHadamardVerdict::Holds { ordering } => ordering,
        WeakHadamardVerdict::Fails { obstruction } => return Err(fail(0, format!("{obstruction:?}"))),
    };

    // (c) full rank
    let rank = matrix.rank();
    if rank != n {
        return Err(fail(rank, format!("rank {rank} < {n}")));
    }

    // (d) L P = P D with L = kI − A
    let diagonal: Vec<i64> = eig.iter().map(|t| k - t).collect();
    check_diagonalization(g, &matrix, &diagonal)?;

    let mut tally = BTreeMap::new();
    for &t in &eig {
        *tally.entry(t).or_insert(0) += 1;
    }
    Ok(WhdCertificate { matrix, ordering, sources, eigenvalue_of_column: eig, diagonal, rank, tally })
}

/// Checks `L·P = P·D` entrywise, `L` the Laplacian of `g`.
pub fn check_diagonalization(g: &Graph, p: &CandidateMatrix, diagonal: &[i64]) -> Result<(), HadamardError> {
    let n = g.n();
    if p.n() != n || diagonal.len() != n {
        return Err(fail(0, format!("sizes differ: graph {n}, matrix {}, diagonal {}", p.n(), diagonal.len())));
    }
    for j in 0..n {
        let col = p.column(j);
        for v in 0..n {
            let av: i64 = g.neighbors(v).iter().map(|w| col[w]).sum();
            let lv = g.degree(v) as i64 * col[v] - av;
            if lv != diagonal[j] * col[v] {
                return Err(fail(j, format!("(LP)[{v}] = {lv}, (PD)[{v}] = {}", diagonal[j] * col[v])));
            }
        }
    }
    Ok(())
}

impl WhdCertificate {
    /// Signed-integer CSV: the diagonal first, then the rows of `P`.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let line = |vals: &mut dyn Iterator<Item = i64>| vals.map(|v| v.to_string()).collect::<Vec<_>>().join(",");
        out.push_str(&line(&mut self.diagonal.iter().copied()));
        out.push('\n');
        for i in 0..self.matrix.n() {
            out.push_str(&line(&mut (0..self.matrix.n()).map(|j| self.matrix.get(i, j))));
            out.push('\n');
        }
        out
    }
}

/// Parses the CSV written by [`WhdCertificate::to_csv`] into `(diagonal, P)`.
pub fn parse_whd_csv(text: &str) -> Result<(Vec<i64>, CandidateMatrix), HadamardError> {
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let row: Result<Vec<i64>, _> = line.split(',').map(|s| s.trim().parse::<i64>()).collect();
        rows.push(row.map_err(|e| HadamardError::Csv(format!("line {}: {e}", i + 1)))?);
    }
    if rows.is_empty() {
        return Err(HadamardError::Csv("empty file".into()));
    }
    let diagonal = rows.remove(0);
    let p = CandidateMatrix::from_rows(rows)?;
    if diagonal.len() != p.n() {
        return Err(HadamardError::Csv(format!("diagonal has {} entries for a {}x{} matrix", diagonal.len(), p.n(), p.n())));
    }
    Ok((diagonal, p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{CosetIndex, FieldCtx};
    use crate::peisert::build_cayley;
    use std::sync::Arc;

    fn build(p: u64, r: u32, modulus: Option<&[i64]>, idx: &[u32]) -> (PeisertGraph, SubarraySelection) {
        let f = Arc::new(FieldCtx::new(p, r, modulus).unwrap());
        let idx: Vec<CosetIndex> = idx.iter().copied().map(CosetIndex).collect();
        let x = build_cayley(f.clone(), &idx).unwrap();
        let sel = SubarraySelection::new(f, &idx).unwrap();
        (x, sel)
    }

    #[test]
    fn identity_is_weakly_hadamard() {
        for n in 1..6 {
            let v = is_weakly_hadamard(&CandidateMatrix::identity(n)).unwrap();
            assert_eq!(v, WeakHadamardVerdict::Holds { ordering: (0..n).collect() });
        }
    }

    #[test]
    fn triangle_is_not() {
        let m = CandidateMatrix::from_columns(&[vec![1, 1, 0], vec![1, 0, 1], vec![0, 1, 1]]).unwrap();
        match is_weakly_hadamard(&m).unwrap() {
            WeakHadamardVerdict::Fails { obstruction: Obstruction::Cycle { columns } } => assert_eq!(columns.len(), 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rejects_bad_input() {
        let m = CandidateMatrix::from_rows(vec![vec![2, 0], vec![0, 1]]).unwrap();
        assert!(matches!(is_weakly_hadamard(&m), Err(HadamardError::BadEntries { row: 0, col: 0, value: 2 })));
        assert!(matches!(
            CandidateMatrix::from_rows(vec![vec![1, 0, 0], vec![0, 1, 0]]),
            Err(HadamardError::NotSquare { .. })
        ));
    }

    #[test]
    fn paley9_whd() {
        let (x, sel) = build(3, 2, None, &[0, 1]);
        let c = build_whd(&x, &sel).unwrap();
        let mut d = c.diagonal.clone();
        d.sort_unstable();
        assert_eq!(d, vec![0, 3, 3, 3, 3, 6, 6, 6, 6]);
        assert!(is_weakly_hadamard(&c.matrix).unwrap().holds());
        let (diag, p) = parse_whd_csv(&c.to_csv()).unwrap();
        assert_eq!((diag, p), (c.diagonal.clone(), c.matrix.clone()));
    }

    #[test]
    fn gp_star_81_whd_tally() {
        let (x, sel) = build(3, 4, Some(&[-1, 0, 0, -1, 1]), &[0, 1, 2, 3, 4]);
        let c = build_whd(&x, &sel).unwrap();
        assert_eq!(c.tally, BTreeMap::from([(-5, 40), (4, 40), (40, 1)]));
        let mut lap = BTreeMap::new();
        for d in &c.diagonal {
            *lap.entry(*d).or_insert(0) += 1;
        }
        assert_eq!(lap, BTreeMap::from([(0, 1), (36, 40), (45, 40)]));
    }

    #[test]
    fn diagonalization_catches_wrong_diagonal() {
        let (x, sel) = build(3, 2, None, &[0, 1]);
        let c = build_whd(&x, &sel).unwrap();
        let mut d = c.diagonal.clone();
        d[1] += 1;
        assert!(check_diagonalization(x.graph(), &c.matrix, &d).is_err());
    }
}
