use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::Structure;
use crate::logic::LogicId;
use crate::matrix::{Interp, LitKind, Tri, Vocab};

/// Which literals a type records and where. One-type bits: unary symbols,
/// then common-binary self-loops. Cross bits of a 2-type, in order:
/// `R(x,y), R(y,x)` per binary; `x<y, y<x`; `E_k(x,y)`; `x pre_k y, y pre_k x`;
/// `S_k(x,y), S_k(y,x)`; `F_k(x,y)`. Absent families take no bits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypeLayout {
    pub unary: usize,
    pub binary: usize,
    pub order: bool,
    pub k: u32,
    pub pre: bool,
    pub succ: bool,
    pub k_fam: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct OneType(pub u128);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TwoType {
    pub x: OneType,
    pub y: OneType,
    pub cross: u128,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum TypeError {
    #[error("element {0} out of range")]
    OutOfRange(usize),
    #[error("2-types need distinct elements")]
    SameElement,
    #[error("too many symbols for a type bit vector")]
    TooWide,
    #[error("symbol {0} is not interpreted")]
    AbsentSymbol(String),
}

fn bit(v: u128, i: usize) -> bool {
    v >> i & 1 == 1
}

impl TypeLayout {
    pub fn new(vocab: &Vocab, logic: LogicId) -> Result<TypeLayout, TypeError> {
        let l = TypeLayout {
            unary: vocab.unary.len(),
            binary: vocab.binary.len(),
            order: logic.has_order(),
            k: vocab.k,
            pre: logic.has_preorders(),
            succ: logic.has_successors(),
            k_fam: vocab.k_fam,
        };
        if l.one_bits() > 128 || l.cross_bits() > 128 {
            return Err(TypeError::TooWide);
        }
        Ok(l)
    }

    pub fn one_bits(&self) -> usize {
        self.unary + self.binary
    }

    pub fn cross_bits(&self) -> usize {
        self.fam_base() + self.k_fam as usize
    }

    fn order_base(&self) -> usize {
        2 * self.binary
    }

    fn eq_base(&self) -> usize {
        self.order_base() + if self.order { 2 } else { 0 }
    }

    fn pre_base(&self) -> usize {
        self.eq_base() + self.k as usize
    }

    fn succ_base(&self) -> usize {
        self.pre_base() + if self.pre { 2 * self.k as usize } else { 0 }
    }

    fn fam_base(&self) -> usize {
        self.succ_base() + if self.succ { 2 * self.k as usize } else { 0 }
    }

    pub fn unary_bit(&self, p: usize) -> usize {
        p
    }

    pub fn self_loop_bit(&self, r: usize) -> usize {
        self.unary + r
    }

    /// Bit for `R_r(x,y)` (or `R_r(y,x)` when `!forward`).
    pub fn binary_bit(&self, r: usize, forward: bool) -> usize {
        2 * r + !forward as usize
    }

    pub fn less_bit(&self, forward: bool) -> usize {
        self.order_base() + !forward as usize
    }

    pub fn equiv_bit(&self, k: u32) -> usize {
        self.eq_base() + k as usize - 1
    }

    pub fn pre_bit(&self, k: u32, forward: bool) -> usize {
        self.pre_base() + 2 * (k as usize - 1) + !forward as usize
    }

    pub fn succ_bit(&self, k: u32, forward: bool) -> usize {
        self.succ_base() + 2 * (k as usize - 1) + !forward as usize
    }

    pub fn fam_bit(&self, k: u32) -> usize {
        self.fam_base() + k as usize - 1
    }

    /// Truth of a literal on the one-type `t` with both arguments equal.
    pub fn self_lit(&self, t: OneType, kind: LitKind) -> bool {
        match kind {
            LitKind::Unary(p) => bit(t.0, self.unary_bit(p as usize)),
            LitKind::Binary(r) => bit(t.0, self.self_loop_bit(r as usize)),
            LitKind::Less | LitKind::Succ(_) => false,
            LitKind::Equal | LitKind::Equiv(_) | LitKind::Pre(_) | LitKind::Fam(_) => true,
        }
    }

    /// Truth of a binary literal between the distinct elements of `t`;
    /// `forward` means the arguments are `(x, y)`.
    pub fn cross_lit(&self, t: &TwoType, kind: LitKind, forward: bool) -> bool {
        let c = t.cross;
        match kind {
            LitKind::Unary(p) => {
                let one = if forward { t.x } else { t.y };
                bit(one.0, self.unary_bit(p as usize))
            }
            LitKind::Binary(r) => bit(c, self.binary_bit(r as usize, forward)),
            LitKind::Less => self.order && bit(c, self.less_bit(forward)),
            LitKind::Equal => false,
            LitKind::Equiv(k) => k > self.k || bit(c, self.equiv_bit(k)),
            LitKind::Pre(k) => k > self.k || bit(c, self.pre_bit(k, forward)),
            LitKind::Succ(k) => k <= self.k && bit(c, self.succ_bit(k, forward)),
            LitKind::Fam(k) => k > self.k_fam || bit(c, self.fam_bit(k)),
        }
    }

    /// The 2-type with `x` and `y` exchanged.
    pub fn mirror(&self, t: &TwoType) -> TwoType {
        let mut cross = t.cross;
        let mut swap = |i: usize| {
            let (a, b) = (bit(cross, i), bit(cross, i + 1));
            cross &= !(0b11 << i);
            cross |= (b as u128) << i | (a as u128) << (i + 1);
        };
        for r in 0..self.binary {
            swap(self.binary_bit(r, true));
        }
        if self.order {
            swap(self.less_bit(true));
        }
        for k in 1..=self.k {
            if self.pre {
                swap(self.pre_bit(k, true));
            }
            if self.succ {
                swap(self.succ_bit(k, true));
            }
        }
        TwoType {
            x: t.y,
            y: t.x,
            cross,
        }
    }
}

/// A 2-type read as an interpretation over elements `0` (x) and `1` (y).
pub struct PairView<'a> {
    pub layout: &'a TypeLayout,
    pub ty: &'a TwoType,
}

impl Interp for PairView<'_> {
    fn lit(&self, kind: LitKind, a: usize, b: usize) -> Tri {
        Tri::from_bool(if a == b {
            let one = if a == 0 { self.ty.x } else { self.ty.y };
            self.layout.self_lit(one, kind)
        } else {
            self.layout.cross_lit(self.ty, kind, a == 0)
        })
    }
}

/// A 1-type read as an interpretation of a single element.
pub struct OneView<'a> {
    pub layout: &'a TypeLayout,
    pub ty: OneType,
}

impl Interp for OneView<'_> {
    fn lit(&self, kind: LitKind, _a: usize, _b: usize) -> Tri {
        Tri::from_bool(self.layout.self_lit(self.ty, kind))
    }
}

pub(crate) fn set_bit(v: &mut u128, i: usize, on: bool) {
    if on {
        *v |= 1 << i;
    } else {
        *v &= !(1 << i);
    }
}

pub fn one_type_of(s: &Structure, vocab: &Vocab, a: usize) -> Result<OneType, TypeError> {
    if a >= s.n {
        return Err(TypeError::OutOfRange(a));
    }
    let layout_unary = vocab.unary.len();
    if layout_unary + vocab.binary.len() > 128 {
        return Err(TypeError::TooWide);
    }
    let mut bits = 0u128;
    for (i, p) in vocab.unary.iter().enumerate() {
        let set = s.unary.get(p).ok_or_else(|| TypeError::AbsentSymbol(p.clone()))?;
        set_bit(&mut bits, i, set.contains(&a));
    }
    for (j, r) in vocab.binary.iter().enumerate() {
        let set = s.binary.get(r).ok_or_else(|| TypeError::AbsentSymbol(r.clone()))?;
        set_bit(&mut bits, layout_unary + j, set.contains(&(a, a)));
    }
    Ok(OneType(bits))
}

pub fn two_type_of(
    s: &Structure,
    vocab: &Vocab,
    layout: &TypeLayout,
    a: usize,
    b: usize,
) -> Result<TwoType, TypeError> {
    if a == b {
        return Err(TypeError::SameElement);
    }
    let x = one_type_of(s, vocab, a)?;
    let y = one_type_of(s, vocab, b)?;
    let mut c = 0u128;
    for (j, r) in vocab.binary.iter().enumerate() {
        set_bit(&mut c, layout.binary_bit(j, true), s.binary_holds(r, a, b));
        set_bit(&mut c, layout.binary_bit(j, false), s.binary_holds(r, b, a));
    }
    if layout.order {
        set_bit(&mut c, layout.less_bit(true), a < b);
        set_bit(&mut c, layout.less_bit(false), b < a);
    }
    for k in 1..=layout.k {
        if k > s.k() {
            return Err(TypeError::AbsentSymbol(format!("E{k}")));
        }
        set_bit(&mut c, layout.equiv_bit(k), s.same_class(k, a, b));
        if layout.pre {
            if k as usize > s.pre.len() {
                return Err(TypeError::AbsentSymbol(format!("pre{k}")));
            }
            set_bit(&mut c, layout.pre_bit(k, true), s.preceq(k, a, b));
            set_bit(&mut c, layout.pre_bit(k, false), s.preceq(k, b, a));
        }
        if layout.succ {
            set_bit(&mut c, layout.succ_bit(k, true), s.succ(k, a, b));
            set_bit(&mut c, layout.succ_bit(k, false), s.succ(k, b, a));
        }
    }
    for k in 1..=layout.k_fam {
        if k as usize > s.feq.len() {
            return Err(TypeError::AbsentSymbol(format!("F{k}")));
        }
        set_bit(&mut c, layout.fam_bit(k), s.same_fam_class(k, a, b));
    }
    Ok(TwoType { x, y, cross: c })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{Formula, Rel, Term, Var};
    use crate::structure::{evaluate, Valuation};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn vocab() -> Vocab {
        Vocab::new(vec!["P".into(), "Q".into()], vec!["R".into()], 2, 0)
    }

    fn random_preorder_structure(rng: &mut ChaCha8Rng, n: usize) -> Structure {
        let mut s = Structure::new(n);
        let mut top = 0;
        let mut low = 0;
        let (mut l1, mut l2) = (Vec::new(), Vec::new());
        for a in 0..n {
            if a > 0 {
                if rng.gen_bool(0.3) {
                    top += 1;
                    low += 1;
                } else if rng.gen_bool(0.4) {
                    low += 1;
                }
            }
            l1.push(low);
            l2.push(top);
        }
        s.pre = vec![l1, l2];
        s.eq = s.pre.clone();
        for p in ["P", "Q"] {
            s.unary.insert(p.into(), (0..n).filter(|_| rng.gen_bool(0.5)).collect());
        }
        let pairs = (0..n).flat_map(|a| (0..n).map(move |b| (a, b)));
        s.binary.insert("R".into(), pairs.filter(|_| rng.gen_bool(0.3)).collect());
        s
    }

    fn var(v: Var) -> Term {
        Term::Var(v)
    }

    #[test]
    fn one_type_readout() {
        let mut s = Structure::new(1);
        s.unary.insert("P".into(), [0].into_iter().collect());
        s.unary.insert("Q".into(), Default::default());
        s.binary.insert("R".into(), Default::default());
        assert_eq!(one_type_of(&s, &vocab(), 0), Ok(OneType(0b001)));
        assert_eq!(one_type_of(&s, &vocab(), 1), Err(TypeError::OutOfRange(1)));
    }

    #[test]
    fn successor_and_class_bits() {
        let mut s = Structure::new(3);
        s.pre = vec![vec![0, 0, 1]];
        let v = Vocab::new(vec![], vec![], 1, 0);
        let l = TypeLayout::new(&v, LogicId::PreorderSucc).unwrap();
        let t = two_type_of(&s, &v, &l, 1, 2).unwrap();
        assert!(l.cross_lit(&t, LitKind::Succ(1), true));
        assert!(!l.cross_lit(&t, LitKind::Equiv(1), true));
        let t = two_type_of(&s, &v, &l, 0, 1).unwrap();
        assert!(l.cross_lit(&t, LitKind::Equiv(1), true));
        assert!(l.cross_lit(&t, LitKind::Pre(1), true) && l.cross_lit(&t, LitKind::Pre(1), false));
        assert!(!l.cross_lit(&t, LitKind::Succ(1), true) && !l.cross_lit(&t, LitKind::Succ(1), false));
        assert_eq!(two_type_of(&s, &v, &l, 1, 1), Err(TypeError::SameElement));
    }

    #[test]
    fn bits_agree_with_evaluator() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let v = vocab();
        let l = TypeLayout::new(&v, LogicId::PreorderSucc).unwrap();
        let mut lits: Vec<(Formula, LitKind)> = vec![
            (Formula::unary("P", var(Var::X)), LitKind::Unary(0)),
            (Formula::unary("Q", var(Var::X)), LitKind::Unary(1)),
            (Formula::binary(Rel::Common("R".into()), var(Var::X), var(Var::X)), LitKind::Binary(0)),
        ];
        for k in 1..=2 {
            lits.push((Formula::binary(Rel::Equiv(k), var(Var::X), var(Var::Y)), LitKind::Equiv(k)));
            lits.push((Formula::binary(Rel::Pre(k), var(Var::X), var(Var::Y)), LitKind::Pre(k)));
            lits.push((Formula::binary(Rel::Succ(k), var(Var::X), var(Var::Y)), LitKind::Succ(k)));
        }
        lits.push((Formula::binary(Rel::Common("R".into()), var(Var::X), var(Var::Y)), LitKind::Binary(0)));
        for _ in 0..1000 {
            let n = rng.gen_range(2..7);
            let s = random_preorder_structure(&mut rng, n);
            let a = rng.gen_range(0..n);
            let mut b = rng.gen_range(0..n);
            while b == a {
                b = rng.gen_range(0..n);
            }
            let one = one_type_of(&s, &v, a).unwrap();
            let two = two_type_of(&s, &v, &l, a, b).unwrap();
            let mirrored = l.mirror(&two);
            assert_eq!(mirrored, two_type_of(&s, &v, &l, b, a).unwrap());
            for (f, kind) in &lits {
                let cross = f.free_vars().contains(&Var::Y);
                let want = evaluate(&s, f, &Valuation::xy(a, b)).unwrap();
                if cross {
                    assert_eq!(l.cross_lit(&two, *kind, true), want, "{f}");
                    let back = evaluate(&s, &f.swap_vars(), &Valuation::xy(a, b)).unwrap();
                    assert_eq!(l.cross_lit(&two, *kind, false), back, "{f}");
                } else {
                    assert_eq!(l.self_lit(one, *kind), want, "{f}");
                }
            }
        }
    }

    #[test]
    fn successor_matches_definition() {
        // The definition needs a third variable, so it is read off directly.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let n = rng.gen_range(1..7);
            let s = random_preorder_structure(&mut rng, n);
            for k in 1..=2u32 {
                let succ = crate::structure::induced_successor(&s, k).unwrap();
                for a in 0..n {
                    for b in 0..n {
                        let strict = |u: usize, w: usize| s.preceq(k, u, w) && !s.preceq(k, w, u);
                        let def = strict(a, b) && (0..n).all(|z| !strict(a, z) || s.preceq(k, b, z));
                        assert_eq!(succ.contains(&(a, b)), def);
                    }
                }
            }
        }
    }
}
