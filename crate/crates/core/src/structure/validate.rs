use std::collections::{BTreeSet, HashMap};

use serde::Serialize;

use super::Structure;
use crate::logic::LogicId;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Failure {
    pub axiom: String,
    pub witness: Vec<usize>,
}

/// `ok` holds iff `failures` is empty.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub ok: bool,
    pub failures: Vec<Failure>,
}

struct Collector(Vec<Failure>);

impl Collector {
    fn fail(&mut self, axiom: &str, witness: Vec<usize>) {
        self.0.push(Failure {
            axiom: axiom.to_string(),
            witness,
        });
    }
}

/// First pair `(r, b)` where `fine` puts both in one class but `coarse` does not.
fn refinement_witness(fine: &[usize], coarse: &[usize]) -> Option<(usize, usize)> {
    let mut rep: HashMap<usize, usize> = HashMap::new();
    for b in 0..fine.len() {
        let r = *rep.entry(fine[b]).or_insert(b);
        if coarse[r] != coarse[b] {
            return Some((r, b));
        }
    }
    None
}

/// First pair `(first, a)` showing that some class of `labels` is not a
/// contiguous index range.
fn interval_witness(labels: &[usize]) -> Option<(usize, usize)> {
    let mut first: HashMap<usize, usize> = HashMap::new();
    for a in 0..labels.len() {
        match first.get(&labels[a]) {
            Some(&f) if labels[a - 1] != labels[a] => return Some((f, a)),
            Some(_) => {}
            None => {
                first.insert(labels[a], a);
            }
        }
    }
    None
}

/// Every `E_k` class is an interval of the index order. Returns the first
/// violating `(k, a, b)`.
pub fn interval_property(s: &Structure) -> Result<(), (u32, usize, usize)> {
    let levels = if s.eq.is_empty() { &s.pre } else { &s.eq };
    for (k, l) in levels.iter().enumerate() {
        if let Some((a, b)) = interval_witness(l) {
            return Err((k as u32 + 1, a, b));
        }
    }
    Ok(())
}

fn check_shape(s: &Structure, c: &mut Collector) -> bool {
    let mut ok = true;
    for l in s.eq.iter().chain(&s.pre).chain(&s.feq) {
        if l.len() != s.n {
            c.fail("shape", vec![l.len()]);
            ok = false;
        }
    }
    for set in s.unary.values() {
        if let Some(&a) = set.iter().find(|&&a| a >= s.n) {
            c.fail("range", vec![a]);
        }
    }
    for set in s.binary.values() {
        if let Some(&(a, b)) = set.iter().find(|&&(a, b)| a >= s.n || b >= s.n) {
            c.fail("range", vec![a, b]);
        }
    }
    for &a in s.constants.values() {
        if a >= s.n {
            c.fail("range", vec![a]);
        }
    }
    ok
}

fn check_profile(s: &Structure, logic: LogicId, c: &mut Collector) {
    let order_ok = !s.order || logic.has_order();
    let pre_ok = s.pre.is_empty() || logic.has_preorders();
    let eq_ok = match logic {
        LogicId::RawFo2 => s.eq.is_empty(),
        LogicId::TwoFamilies => s.eq.len() <= 2,
        LogicId::Preorder | LogicId::PreorderSucc => s.eq.is_empty() || s.eq.len() == s.pre.len(),
        _ => true,
    };
    let feq_ok = s.feq.is_empty() || (logic == LogicId::TwoFamilies && s.feq.len() <= 2);
    for (ok, what) in [(order_ok, "order"), (pre_ok, "pre"), (eq_ok, "eq"), (feq_ok, "feq")] {
        if !ok {
            c.fail(&format!("profile: {what} not allowed in {logic}"), vec![]);
        }
    }
}

fn check_preorders(s: &Structure, c: &mut Collector) {
    for (k, l) in s.pre.iter().enumerate() {
        let used: BTreeSet<usize> = l.iter().copied().collect();
        if let Some((gap, _)) = used.iter().enumerate().find(|(i, v)| *i != **v) {
            let a = l.iter().position(|&v| v > gap).expect("label above gap");
            c.fail("contiguity", vec![a]);
        }
        if let Some(a) = (1..s.n).find(|&a| l[a - 1] > l[a]) {
            c.fail("alignment", vec![a - 1, a]);
        }
        if let Some(eq) = s.eq.get(k) {
            let w = refinement_witness(l, eq).or_else(|| refinement_witness(eq, l));
            if let Some((a, b)) = w {
                c.fail("compatibility", vec![a, b]);
            }
        }
        if let Some(next) = s.pre.get(k + 1) {
            let mut idx: Vec<usize> = (0..s.n).collect();
            idx.sort_by_key(|&a| (l[a], a));
            let bad = idx.windows(2).find(|w| {
                let (a, b) = (w[0], w[1]);
                (l[a] == l[b] && next[a] != next[b]) || next[a] > next[b]
            });
            if let Some(w) = bad {
                c.fail("preorder-nesting", vec![w[0], w[1]]);
            }
        }
    }
}

/// Check the semantic axioms of `logic` on the label representation.
pub fn validate_structure(s: &Structure, logic: LogicId) -> ValidationReport {
    let mut c = Collector(Vec::new());
    if check_shape(s, &mut c) {
        check_profile(s, logic, &mut c);
        for fam in [&s.eq, &s.feq] {
            for k in 1..fam.len() {
                if let Some((a, b)) = refinement_witness(&fam[k - 1], &fam[k]) {
                    c.fail("nestedness", vec![a, b]);
                }
            }
        }
        check_preorders(s, &mut c);
        if logic.has_preorders() {
            if let Err((_, a, b)) = interval_property(s) {
                c.fail("interval", vec![a, b]);
            }
        }
    }
    ValidationReport {
        ok: c.0.is_empty(),
        failures: c.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn nestedness_violation() {
        let mut s = Structure::new(3);
        s.eq = vec![vec![0, 0, 1], vec![0, 1, 1]];
        let r = validate_structure(&s, LogicId::Eq);
        assert!(!r.ok);
        assert_eq!(r.failures[0].axiom, "nestedness");
        assert_eq!(r.failures[0].witness, vec![0, 1]);
    }

    #[test]
    fn single_class_is_fine() {
        let mut s = Structure::new(2);
        s.pre = vec![vec![0, 0]];
        s.eq = vec![vec![0, 0]];
        assert!(validate_structure(&s, LogicId::Preorder).ok);
        assert!(!validate_structure(&s, LogicId::Eq).ok);
    }

    #[test]
    fn interval_property_detects_split_class() {
        let mut s = Structure::new(3);
        s.order = true;
        s.eq = vec![vec![0, 1, 0]];
        assert_eq!(interval_property(&s), Err((1, 0, 2)));
        s.eq = vec![vec![4, 4, 0]];
        assert_eq!(interval_property(&s), Ok(()));
    }

    /// Direct quadratic reading of every axiom.
    fn pairwise_ok(s: &Structure) -> bool {
        let n = s.n;
        let pairs = || (0..n).flat_map(move |a| (0..n).map(move |b| (a, b)));
        for k in 1..s.eq.len() {
            if pairs().any(|(a, b)| s.eq[k - 1][a] == s.eq[k - 1][b] && s.eq[k][a] != s.eq[k][b]) {
                return false;
            }
        }
        for (k, l) in s.pre.iter().enumerate() {
            let max = *l.iter().max().unwrap_or(&0);
            if (0..=max).any(|v| !l.contains(&v)) {
                return false;
            }
            if pairs().any(|(a, b)| a < b && l[a] > l[b]) {
                return false;
            }
            if pairs().any(|(a, b)| (l[a] == l[b]) != (s.eq[k][a] == s.eq[k][b])) {
                return false;
            }
            if let Some(m) = s.pre.get(k + 1) {
                if pairs().any(|(a, b)| l[a] <= l[b] && m[a] > m[b]) {
                    return false;
                }
            }
            if pairs().any(|(a, b)| {
                (a..=b).any(|c| s.eq[k][c] != s.eq[k][a]) && s.eq[k][a] == s.eq[k][b]
            }) {
                return false;
            }
        }
        true
    }

    #[test]
    fn agrees_with_pairwise_checker() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut oks = 0;
        for _ in 0..500 {
            let n = rng.gen_range(1..6);
            let levels = rng.gen_range(1..3);
            let mut s = Structure::new(n);
            let logic = if rng.gen_bool(0.5) {
                // Mostly sorted level labels so that both outcomes occur.
                for _ in 0..levels {
                    let mut l: Vec<usize> = (0..n).map(|_| rng.gen_range(0..3)).collect();
                    if rng.gen_bool(0.7) {
                        l.sort();
                    }
                    s.pre.push(l);
                }
                s.eq = if rng.gen_bool(0.8) {
                    s.pre.clone()
                } else {
                    (0..levels).map(|_| (0..n).map(|_| rng.gen_range(0..3)).collect()).collect()
                };
                LogicId::Preorder
            } else {
                s.eq = (0..levels).map(|_| (0..n).map(|_| rng.gen_range(0..2)).collect()).collect();
                LogicId::Eq
            };
            let r = validate_structure(&s, logic);
            assert_eq!(r.ok, pairwise_ok(&s), "{s:?} {r:?}");
            oks += r.ok as usize;
        }
        assert!(oks > 50 && oks < 450, "{oks}");
    }

    #[test]
    fn canonical_sorting_restores_alignment() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..500 {
            let n = rng.gen_range(1..8);
            // Build nested aligned levels bottom-up, then scramble.
            let mut top: Vec<usize> = (0..n).map(|_| rng.gen_range(0..3)).collect();
            top.sort();
            let mut lower: Vec<usize> = Vec::with_capacity(n);
            let mut level = 0;
            for a in 0..n {
                if a > 0 && (top[a] != top[a - 1] || rng.gen_bool(0.4)) {
                    level += 1;
                }
                lower.push(level);
            }
            let mut s = Structure::new(n);
            s.pre = vec![lower, top];
            s.compact_levels();
            s.eq = s.pre.clone();
            assert!(validate_structure(&s, LogicId::Preorder).ok);
            let mut perm: Vec<usize> = (0..n).collect();
            for i in (1..n).rev() {
                perm.swap(i, rng.gen_range(0..=i));
            }
            let c = s.permute(&perm).canonical();
            assert!(validate_structure(&c, LogicId::Preorder).ok, "{c:?}");
        }
    }
}
