//! Fixed-size model finding by grounding the SNF into clauses.
//!
//! Only logics whose special symbols are nested equivalences are covered.
//! Class ids are restricted-growth per level, which names classes without
//! ordering elements, so no model is excluded. Fresh predicates are free
//! variables. Every model returned is re-checked against the constraints.

use std::time::Instant;

use varisat::{ExtendFormula, Lit as SatLit, Solver};

use super::compiled::{bind, eval, Cf, Partial};
use super::search::{Constraint, Plan};
use super::{check_size, sizes, FindResult, Mode, OracleError, SearchStats};
use crate::logic::LogicId;
use crate::matrix::{Lit, LitKind, Tri};
use crate::normalize::SnfSentence;
use crate::structure::Structure;

#[derive(Clone, Copy)]
enum G {
    Const(bool),
    Lit(SatLit),
}

impl G {
    fn not(self) -> G {
        match self {
            G::Const(b) => G::Const(!b),
            G::Lit(l) => G::Lit(!l),
        }
    }
}

/// `lab[f][k-1][a][c]`: element `a` is in class `c` at level `k` of family
/// `f` (0 is `E`, 1 is `F`); `c <= a`.
struct Ground<'p> {
    plan: &'p Plan,
    n: usize,
    solver: Solver<'static>,
    unary: Vec<SatLit>,
    binary: Vec<SatLit>,
    lab: [Vec<Vec<Vec<SatLit>>>; 2],
    /// `same[f][k-1][a * n + b]` for `a < b`.
    same: [Vec<Vec<Option<SatLit>>>; 2],
}

impl<'p> Ground<'p> {
    fn new(plan: &'p Plan, n: usize) -> Ground<'p> {
        let mut solver = Solver::new();
        let nu = plan.vocab.unary.len();
        let nb = plan.vocab.binary.len();
        let unary = (0..nu * n).map(|_| solver.new_lit()).collect();
        let binary = (0..nb * n * n).map(|_| solver.new_lit()).collect();
        let mut g = Ground {
            plan,
            n,
            solver,
            unary,
            binary,
            lab: [Vec::new(), Vec::new()],
            same: [Vec::new(), Vec::new()],
        };
        g.family(0, plan.k);
        g.family(1, plan.k_fam);
        g
    }

    fn family(&mut self, f: usize, levels: u32) {
        let n = self.n;
        for _ in 0..levels {
            let lab: Vec<Vec<SatLit>> = (0..n).map(|a| (0..=a).map(|_| self.solver.new_lit()).collect()).collect();
            for (a, row) in lab.iter().enumerate() {
                self.solver.add_clause(row);
                for c in 0..row.len() {
                    for d in c + 1..row.len() {
                        self.solver.add_clause(&[!row[c], !row[d]]);
                    }
                    if c > 0 {
                        let mut seen: Vec<SatLit> = (c - 1..a).map(|j| lab[j][c - 1]).collect();
                        seen.push(!row[c]);
                        self.solver.add_clause(&seen);
                    }
                }
            }
            let mut same = vec![None; n * n];
            for a in 0..n {
                for b in a + 1..n {
                    let s = self.solver.new_lit();
                    for c in 0..=b {
                        let la = lab[a].get(c).copied();
                        let lb = lab[b][c];
                        match la {
                            Some(la) => {
                                self.solver.add_clause(&[!s, !la, lb]);
                                self.solver.add_clause(&[!s, la, !lb]);
                                self.solver.add_clause(&[s, !la, !lb]);
                            }
                            None => self.solver.add_clause(&[!s, !lb]),
                        }
                    }
                    same[a * n + b] = Some(s);
                }
            }
            self.lab[f].push(lab);
            self.same[f].push(same);
        }
        for k in 1..self.same[f].len() {
            for ix in 0..n * n {
                if let (Some(lo), Some(hi)) = (self.same[f][k - 1][ix], self.same[f][k][ix]) {
                    self.solver.add_clause(&[!lo, hi]);
                }
            }
        }
    }

    fn atom(&self, lit: &Lit, env: [usize; 2]) -> Result<G, OracleError> {
        let (a, b) = bind(lit, env);
        let n = self.n;
        let same = |f: usize, k: u32| {
            let levels = &self.same[f];
            if a == b || k as usize > levels.len() {
                return G::Const(true);
            }
            G::Lit(levels[k as usize - 1][a.min(b) * n + a.max(b)].expect("pair variable"))
        };
        Ok(match lit.kind {
            LitKind::Unary(p) => G::Lit(self.unary[p as usize * n + a]),
            LitKind::Binary(r) => G::Lit(self.binary[(r as usize * n + a) * n + b]),
            LitKind::Equal => G::Const(a == b),
            LitKind::Equiv(k) => same(0, k),
            LitKind::Fam(k) => same(1, k),
            LitKind::Less | LitKind::Pre(_) | LitKind::Succ(_) => {
                return Err(OracleError::SatUnsupported(self.plan.logic))
            }
        })
    }

    fn junction(&mut self, parts: Vec<G>, and: bool) -> G {
        let mut lits = Vec::new();
        for p in parts {
            match p {
                G::Const(b) if b == and => {}
                G::Const(_) => return G::Const(!and),
                G::Lit(l) => lits.push(l),
            }
        }
        match lits.len() {
            0 => G::Const(and),
            1 => G::Lit(lits[0]),
            _ => {
                // For `or`, encode the conjunction of the negations and negate.
                let sign = |l: SatLit| if and { l } else { !l };
                let t = self.solver.new_lit();
                let mut back = vec![t];
                for &l in &lits {
                    self.solver.add_clause(&[!t, sign(l)]);
                    back.push(!sign(l));
                }
                self.solver.add_clause(&back);
                if and {
                    G::Lit(t)
                } else {
                    G::Lit(!t)
                }
            }
        }
    }

    fn encode(&mut self, cf: &Cf, env: [usize; 2]) -> Result<G, OracleError> {
        Ok(match cf {
            Cf::Const(b) => G::Const(*b),
            Cf::Lit(l) => self.atom(l, env)?,
            Cf::Not(a) => self.encode(a, env)?.not(),
            Cf::And(xs) | Cf::Or(xs) => {
                let parts = xs.iter().map(|x| self.encode(x, env)).collect::<Result<Vec<_>, _>>()?;
                self.junction(parts, matches!(cf, Cf::And(_)))
            }
            Cf::Iff(a, b) => match (self.encode(a, env)?, self.encode(b, env)?) {
                (G::Const(x), G::Const(y)) => G::Const(x == y),
                (G::Const(x), g) | (g, G::Const(x)) => {
                    if x {
                        g
                    } else {
                        g.not()
                    }
                }
                (G::Lit(x), G::Lit(y)) => {
                    let t = self.solver.new_lit();
                    self.solver.add_clause(&[!t, !x, y]);
                    self.solver.add_clause(&[!t, x, !y]);
                    self.solver.add_clause(&[t, x, y]);
                    self.solver.add_clause(&[t, !x, !y]);
                    G::Lit(t)
                }
            },
            Cf::Forall(..) | Cf::Exists(..) => return Err(OracleError::SatUnsupported(self.plan.logic)),
        })
    }

    fn require(&mut self, parts: Vec<G>) {
        let mut clause = Vec::new();
        for p in parts {
            match p {
                G::Const(true) => return,
                G::Const(false) => {}
                G::Lit(l) => clause.push(l),
            }
        }
        self.solver.add_clause(&clause);
    }

    fn constraints(&mut self) -> Result<(), OracleError> {
        let n = self.n;
        let plan = self.plan;
        for c in &plan.constraints {
            match c {
                Constraint::Universal { body, .. } => {
                    for a in 0..n {
                        for b in 0..n {
                            let g = self.encode(body, [a, b])?;
                            self.require(vec![g]);
                        }
                    }
                }
                Constraint::Skolem { body } => {
                    for a in 0..n {
                        let parts = (0..n).map(|b| self.encode(body, [a, b])).collect::<Result<Vec<_>, _>>()?;
                        self.require(parts);
                    }
                }
                Constraint::Closed(_) => return Err(OracleError::SatUnsupported(plan.logic)),
            }
        }
        Ok(())
    }

    fn decode(&self, model: &[SatLit]) -> Decoded {
        let truth = |l: SatLit| model[l.index()].is_positive() == l.is_positive();
        let labels = |f: usize| -> Vec<Vec<usize>> {
            self.lab[f]
                .iter()
                .map(|lab| lab.iter().map(|row| row.iter().position(|&l| truth(l)).expect("one class")).collect())
                .collect()
        };
        Decoded {
            n: self.n,
            unary: self.unary.iter().map(|&l| truth(l)).collect(),
            binary: self.binary.iter().map(|&l| truth(l)).collect(),
            e: labels(0),
            f: labels(1),
        }
    }
}

struct Decoded {
    n: usize,
    unary: Vec<bool>,
    binary: Vec<bool>,
    e: Vec<Vec<usize>>,
    f: Vec<Vec<usize>>,
}

impl Partial for Decoded {
    fn size(&self) -> usize {
        self.n
    }

    fn atom(&self, lit: &Lit, env: [usize; 2]) -> Tri {
        let (a, b) = bind(lit, env);
        let n = self.n;
        let same = |ls: &Vec<Vec<usize>>, k: u32| k as usize > ls.len() || ls[k as usize - 1][a] == ls[k as usize - 1][b];
        Tri::from_bool(match lit.kind {
            LitKind::Unary(p) => self.unary[p as usize * n + a],
            LitKind::Binary(r) => self.binary[(r as usize * n + a) * n + b],
            LitKind::Equal => a == b,
            LitKind::Equiv(k) => same(&self.e, k),
            LitKind::Fam(k) => same(&self.f, k),
            LitKind::Less | LitKind::Pre(_) | LitKind::Succ(_) => unreachable!("rejected while grounding"),
        })
    }
}

impl Decoded {
    fn satisfies(&self, plan: &Plan) -> bool {
        let n = self.n;
        plan.constraints.iter().all(|c| match c {
            Constraint::Universal { body, .. } => (0..n).all(|a| (0..n).all(|b| eval(body, self, [a, b]) == Tri::True)),
            Constraint::Skolem { body } => (0..n).all(|a| (0..n).any(|b| eval(body, self, [a, b]) == Tri::True)),
            Constraint::Closed(cf) => eval(cf, self, [0, 0]) == Tri::True,
        })
    }

    fn structure(self, plan: &Plan) -> Structure {
        let n = self.n;
        let mut s = Structure::new(n);
        s.eq = self.e;
        s.feq = self.f;
        for (p, name) in plan.vocab.unary.iter().enumerate() {
            s.unary.insert(name.clone(), (0..n).filter(|&a| self.unary[p * n + a]).collect());
        }
        for (r, name) in plan.vocab.binary.iter().enumerate() {
            let set = (0..n)
                .flat_map(|a| (0..n).map(move |b| (a, b)))
                .filter(|&(a, b)| self.binary[(r * n + a) * n + b])
                .collect();
            s.binary.insert(name.clone(), set);
        }
        s
    }
}

fn solve_exact(plan: &Plan, n: usize) -> Result<Option<Structure>, OracleError> {
    let mut g = Ground::new(plan, n);
    g.constraints()?;
    let sat = g.solver.solve().map_err(|e| OracleError::Sat(e.to_string()))?;
    if !sat {
        return Ok(None);
    }
    let model = g.solver.model().expect("model after a satisfiable call");
    let decoded = g.decode(&model);
    if !decoded.satisfies(plan) {
        return Err(OracleError::Sat("decoded model violates a constraint".into()));
    }
    Ok(Some(decoded.structure(plan)))
}

/// Like [`super::find_model`], by clause grounding and a CDCL solver.
/// Only the `EQ`, `RAW_FO2` and two-family logics are accepted.
pub fn find_model_sat(
    snf: &SnfSentence,
    logic: LogicId,
    n: usize,
    mode: Mode,
) -> Result<(FindResult, SearchStats), OracleError> {
    check_size(logic, n)?;
    if !matches!(logic, LogicId::RawFo2 | LogicId::Eq | LogicId::TwoFamilies) {
        return Err(OracleError::SatUnsupported(logic));
    }
    let start = Instant::now();
    let mut snf = snf.clone();
    snf.logic = logic;
    let plan = Plan::from_snf(&snf, false)?;
    let mut stats = SearchStats::default();
    for size in sizes(n, mode) {
        if let Some(s) = solve_exact(&plan, size)? {
            stats.millis = start.elapsed().as_millis() as u64;
            return Ok((FindResult::Found(s), stats));
        }
        stats.sizes_exhausted.push(size);
    }
    stats.millis = start.elapsed().as_millis() as u64;
    Ok((FindResult::Absent, stats))
}
