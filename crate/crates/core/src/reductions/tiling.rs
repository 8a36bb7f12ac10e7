use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{atom, rel, ReductionError};
use crate::logic::{Formula, Rel, Var};
use crate::structure::{evaluate, Structure, Valuation};

const X: Var = Var::X;
const Y: Var = Var::Y;

/// A corridor tiling instance over grids of width `2^n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TilingInstance {
    pub colours: Vec<String>,
    pub c0: String,
    pub c1: String,
    #[serde(rename = "H")]
    pub h: Vec<(String, String)>,
    #[serde(rename = "V")]
    pub v: Vec<(String, String)>,
    pub n: u32,
}

/// `rows[j][i]` is the colour of column `i` in row `j`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TilingSolution {
    pub rows: Vec<Vec<String>>,
}

impl TilingSolution {
    pub fn m(&self) -> usize {
        self.rows.len()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum TilingViolation {
    #[error("expected {width} columns and at least one row")]
    Shape { width: usize },
    #[error("unknown colour {0}")]
    Colour(String),
    #[error("f(0,0) is not the initial colour")]
    Initial,
    #[error("the last cell of the last row is not the final colour")]
    Final,
    #[error("horizontal constraint fails at ({i},{j})")]
    Horizontal { i: usize, j: usize },
    #[error("vertical constraint fails at ({i},{j})")]
    Vertical { i: usize, j: usize },
}

pub fn bit_name(j: u32) -> String {
    format!("B{j}")
}

/// Predicate for the `i`-th colour of the instance.
pub fn colour_name(i: usize) -> String {
    format!("P{i}")
}

impl TilingInstance {
    pub fn from_json(text: &str) -> Result<TilingInstance, ReductionError> {
        let t: TilingInstance = serde_json::from_str(text).map_err(|e| ReductionError::Instance(e.to_string()))?;
        t.validate()?;
        Ok(t)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("instance serialises")
    }

    pub fn width(&self) -> usize {
        1 << self.n
    }

    pub fn validate(&self) -> Result<(), ReductionError> {
        let bad = |m: String| Err(ReductionError::Instance(m));
        let set: BTreeSet<&String> = self.colours.iter().collect();
        if self.colours.is_empty() || set.len() != self.colours.len() {
            return bad("colours must be non-empty and distinct".into());
        }
        if self.n == 0 || self.n > 16 {
            return bad(format!("n = {} is outside 1..=16", self.n));
        }
        let pairs = self.h.iter().chain(&self.v).flat_map(|(a, b)| [a, b]);
        for c in [&self.c0, &self.c1].into_iter().chain(pairs) {
            if !set.contains(c) {
                return bad(format!("unknown colour {c}"));
            }
        }
        Ok(())
    }

    fn index(&self, c: &str) -> usize {
        self.colours.iter().position(|d| d == c).expect("validated colour")
    }

    fn allowed(&self, pairs: &[(String, String)], a: Var, b: Var) -> Formula {
        Formula::disj(
            pairs
                .iter()
                .map(|(c, d)| Formula::and(atom(&colour_name(self.index(c)), a), atom(&colour_name(self.index(d)), b))),
        )
    }
}

fn bit(j: u32, v: Var) -> Formula {
    atom(&bit_name(j), v)
}

fn same_number(n: u32, a: Var, b: Var) -> Formula {
    Formula::conj((0..n).map(|j| Formula::iff(bit(j, a), bit(j, b))))
}

/// `b` encodes the number after `a`; bit 0 is least significant.
fn next_number(n: u32, a: Var, b: Var) -> Formula {
    Formula::disj((0..n).map(|j| {
        let lower = (0..j).map(|l| Formula::and(bit(l, a), Formula::not(bit(l, b))));
        let upper = (j + 1..n).map(|l| Formula::iff(bit(l, a), bit(l, b)));
        Formula::conj(
            [Formula::not(bit(j, a)), bit(j, b)]
                .into_iter()
                .chain(lower)
                .chain(upper),
        )
    }))
}

fn all_off(n: u32, v: Var) -> Formula {
    Formula::conj((0..n).map(|j| Formula::not(bit(j, v))))
}

fn all_on(n: u32, v: Var) -> Formula {
    Formula::conj((0..n).map(|j| bit(j, v)))
}

/// Sentence over `B0..`, `P0..`, `E1` and `S1` whose finite models are
/// exactly the tilings of the instance: elements are cells, `E1`-classes
/// rows in preorder order, bits the column. Each cell carries exactly one
/// colour.
pub fn tiling_to_formula(t: &TilingInstance) -> Result<Formula, ReductionError> {
    t.validate()?;
    let n = t.n;
    let e1 = |a, b| rel(Rel::Equiv(1), a, b);
    let s1 = |a, b| rel(Rel::Succ(1), a, b);
    let fa = |f| Formula::forall(X, f);
    let fa2 = |f| Formula::forall(X, Formula::forall(Y, f));
    let c0 = colour_name(t.index(&t.c0));
    let c1 = colour_name(t.index(&t.c1));
    let colours: Vec<String> = (0..t.colours.len()).map(colour_name).collect();
    let parts = vec![
        fa(Formula::exists(Y, Formula::and(all_off(n, Y), e1(X, Y)))),
        fa(Formula::implies(
            Formula::not(all_on(n, X)),
            Formula::exists(Y, Formula::and(next_number(n, X, Y), e1(X, Y))),
        )),
        fa(Formula::implies(
            Formula::and(all_off(n, X), Formula::not(Formula::exists(Y, s1(Y, X)))),
            atom(&c0, X),
        )),
        fa(Formula::implies(
            Formula::and(all_on(n, X), Formula::not(Formula::exists(Y, s1(X, Y)))),
            atom(&c1, X),
        )),
        fa2(Formula::implies(
            Formula::and(e1(X, Y), same_number(n, X, Y)),
            Formula::conj(colours.iter().map(|c| Formula::iff(atom(c, X), atom(c, Y)))),
        )),
        fa2(Formula::implies(
            Formula::and(e1(X, Y), next_number(n, X, Y)),
            t.allowed(&t.h, X, Y),
        )),
        fa2(Formula::implies(
            Formula::and(s1(X, Y), same_number(n, X, Y)),
            t.allowed(&t.v, X, Y),
        )),
        fa(Formula::disj(colours.iter().enumerate().map(|(i, c)| {
            let others = colours
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, d)| Formula::not(atom(d, X)));
            Formula::conj(std::iter::once(atom(c, X)).chain(others))
        }))),
    ];
    Ok(Formula::conj(parts))
}

/// Direct check of the tiling conditions.
pub fn check_tiling(t: &TilingInstance, sol: &TilingSolution) -> Result<(), TilingViolation> {
    let width = t.width();
    if sol.rows.is_empty() || sol.rows.iter().any(|r| r.len() != width) {
        return Err(TilingViolation::Shape { width });
    }
    if let Some(c) = sol.rows.iter().flatten().find(|c| !t.colours.contains(c)) {
        return Err(TilingViolation::Colour(c.clone()));
    }
    let pair = |set: &[(String, String)], a: &String, b: &String| set.iter().any(|(c, d)| c == a && d == b);
    if sol.rows[0][0] != t.c0 {
        return Err(TilingViolation::Initial);
    }
    if sol.rows[sol.m() - 1][width - 1] != t.c1 {
        return Err(TilingViolation::Final);
    }
    for (j, row) in sol.rows.iter().enumerate() {
        for i in 0..width - 1 {
            if !pair(&t.h, &row[i], &row[i + 1]) {
                return Err(TilingViolation::Horizontal { i, j });
            }
        }
        if let Some(next) = sol.rows.get(j + 1) {
            for i in 0..width {
                if !pair(&t.v, &row[i], &next[i]) {
                    return Err(TilingViolation::Vertical { i, j });
                }
            }
        }
    }
    Ok(())
}

/// The canonical model of a tiling: one element per cell, row by row.
pub fn solution_to_structure(t: &TilingInstance, sol: &TilingSolution) -> Result<Structure, ReductionError> {
    t.validate()?;
    check_tiling(t, sol).map_err(ReductionError::Tiling)?;
    let width = t.width();
    let n = width * sol.m();
    let mut s = Structure::new(n);
    s.pre = vec![(0..n).map(|a| a / width).collect()];
    s.eq = s.pre.clone();
    for j in 0..t.n {
        s.unary.insert(bit_name(j), (0..n).filter(|a| (a % width) >> j & 1 == 1).collect());
    }
    for (ci, c) in t.colours.iter().enumerate() {
        let cells = (0..n).filter(|&a| &sol.rows[a / width][a % width] == c).collect();
        s.unary.insert(colour_name(ci), cells);
    }
    Ok(s)
}

/// Read the tiling off a model: rows are the `pre1` levels in order, the
/// column is the bit number, the colour the unique colour predicate.
/// Cells repeated within a row must agree.
pub fn decode_tiling(s: &Structure, t: &TilingInstance) -> Result<TilingSolution, ReductionError> {
    let f = tiling_to_formula(t)?;
    if !evaluate(s, &f, &Valuation::default())? {
        return Err(ReductionError::NotAModel);
    }
    let levels = s.pre.first().ok_or(ReductionError::NotAModel)?;
    let holds = |p: &str, a: usize| s.unary.get(p).is_some_and(|set| set.contains(&a));
    let mut cells: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for a in 0..s.n {
        let col = (0..t.n).filter(|&j| holds(&bit_name(j), a)).map(|j| 1usize << j).sum();
        let colours: Vec<usize> = (0..t.colours.len()).filter(|&c| holds(&colour_name(c), a)).collect();
        if colours.len() != 1 {
            return Err(ReductionError::Colour(a, colours.len()));
        }
        let row = levels[a];
        if let Some(prev) = cells.insert((row, col), colours[0]) {
            if prev != colours[0] {
                return Err(ReductionError::Cell {
                    row,
                    col,
                    problem: "two colours".into(),
                });
            }
        }
    }
    let m = levels.iter().max().map_or(0, |l| l + 1);
    let mut rows = Vec::with_capacity(m);
    for row in 0..m {
        let mut r = Vec::with_capacity(t.width());
        for col in 0..t.width() {
            let c = cells.get(&(row, col)).ok_or_else(|| ReductionError::Cell {
                row,
                col,
                problem: "missing".into(),
            })?;
            r.push(t.colours[*c].clone());
        }
        rows.push(r);
    }
    let sol = TilingSolution { rows };
    check_tiling(t, &sol).map_err(ReductionError::Tiling)?;
    Ok(sol)
}

/// A tiling with at most `max_rows` rows, by search over row sequences.
pub fn solve_tiling(t: &TilingInstance, max_rows: usize) -> Option<TilingSolution> {
    t.validate().ok()?;
    let width = t.width();
    let pair = |set: &[(String, String)], a: usize, b: usize| {
        set.iter().any(|(c, d)| *c == t.colours[a] && *d == t.colours[b])
    };
    // all rows respecting the horizontal constraints
    let mut rows: Vec<Vec<usize>> = (0..t.colours.len()).map(|c| vec![c]).collect();
    for _ in 1..width {
        rows = rows
            .into_iter()
            .flat_map(|r| {
                let last = *r.last().expect("non-empty row");
                (0..t.colours.len()).filter(move |&c| pair(&t.h, last, c)).map(move |c| {
                    let mut r = r.clone();
                    r.push(c);
                    r
                })
            })
            .collect();
    }
    let above = |a: &[usize], b: &[usize]| a.iter().zip(b).all(|(&x, &y)| pair(&t.v, x, y));
    let c0 = t.index(&t.c0);
    let c1 = t.index(&t.c1);
    // breadth-first over row sequences; `parent` links back to the previous row
    let mut frontier: Vec<usize> = (0..rows.len()).filter(|&r| rows[r][0] == c0).collect();
    let mut parents: Vec<BTreeMap<usize, usize>> = vec![BTreeMap::new()];
    let mut seen: BTreeSet<usize> = frontier.iter().copied().collect();
    for depth in 0..max_rows {
        if let Some(&end) = frontier.iter().find(|&&r| rows[r][width - 1] == c1) {
            let mut chain = vec![end];
            for level in (1..=depth).rev() {
                chain.push(parents[level][chain.last().expect("non-empty chain")]);
            }
            chain.reverse();
            let rows = chain
                .into_iter()
                .map(|r| rows[r].iter().map(|&c| t.colours[c].clone()).collect())
                .collect();
            return Some(TilingSolution { rows });
        }
        let mut next = Vec::new();
        let mut links = BTreeMap::new();
        for &r in &frontier {
            for (q, row) in rows.iter().enumerate() {
                if !seen.contains(&q) && above(&rows[r], row) {
                    seen.insert(q);
                    links.insert(q, r);
                    next.push(q);
                }
            }
        }
        parents.push(links);
        frontier = next;
    }
    None
}
