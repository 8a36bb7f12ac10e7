use super::Structure;
use crate::matrix::{Interp, LitKind, Qf, Tri, Vocab};

/// Bit-matrix view of a structure over a fixed vocabulary, for repeated
/// evaluation of compiled matrices.
pub struct Dense<'a> {
    pub s: &'a Structure,
    n: usize,
    unary: Vec<Vec<bool>>,
    binary: Vec<Vec<bool>>,
}

impl<'a> Dense<'a> {
    /// Symbols of `vocab` missing from `s` are read as empty.
    pub fn new(s: &'a Structure, vocab: &Vocab) -> Dense<'a> {
        let n = s.n;
        let unary = vocab
            .unary
            .iter()
            .map(|p| (0..n).map(|a| s.unary_holds(p, a)).collect())
            .collect();
        let binary = vocab
            .binary
            .iter()
            .map(|r| {
                let mut m = vec![false; n * n];
                if let Some(set) = s.binary.get(r) {
                    for &(a, b) in set {
                        m[a * n + b] = true;
                    }
                }
                m
            })
            .collect();
        Dense { s, n, unary, binary }
    }

    /// `forall x forall y. q`; returns a violating pair if any.
    pub fn universal_violation(&self, q: &Qf) -> Option<(usize, usize)> {
        (0..self.n)
            .flat_map(|a| (0..self.n).map(move |b| (a, b)))
            .find(|&(a, b)| !q.holds(self, a, b))
    }

    /// Some `b` with `q(a, b)`.
    pub fn witness(&self, q: &Qf, a: usize) -> Option<usize> {
        (0..self.n).find(|&b| q.holds(self, a, b))
    }
}

impl Interp for Dense<'_> {
    fn lit(&self, kind: LitKind, a: usize, b: usize) -> Tri {
        let s = self.s;
        Tri::from_bool(match kind {
            LitKind::Unary(p) => self.unary[p as usize][a],
            LitKind::Binary(r) => self.binary[r as usize][a * self.n + b],
            LitKind::Less => a < b,
            LitKind::Equal => a == b,
            LitKind::Equiv(k) => s.same_class(k, a, b),
            LitKind::Pre(k) => s.preceq(k, a, b),
            LitKind::Succ(k) => s.succ(k, a, b),
            LitKind::Fam(k) => s.same_fam_class(k, a, b),
        })
    }
}
