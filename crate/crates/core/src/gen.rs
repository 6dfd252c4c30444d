//! Seeded random designs, paths and multi-designs for property checks.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::multidesign::MultiDesign;
use crate::paths::{completion, dual, paths_of, Seq};
use crate::syntax::{Branch, Design, Signature, Var, X0};

/// Names used by generated designs.
pub const GEN_NAMES: [(&str, usize); 3] = [("a", 0), ("b", 1), ("c", 2)];

pub fn gen_signature() -> Signature {
    Signature::with(&GEN_NAMES).expect("generator names are valid")
}

pub struct DesignGen {
    rng: ChaCha8Rng,
    fresh: usize,
    /// Probability of a daimon where a positive design is expected.
    pub daimon: f64,
    /// Probability that a name is present in a negative sum.
    pub branch: f64,
    /// Probability of a cut where a positive design is expected.
    pub cuts: f64,
}

impl DesignGen {
    pub fn new(seed: u64) -> Self {
        DesignGen { rng: ChaCha8Rng::seed_from_u64(seed), fresh: 0, daimon: 0.2, branch: 0.55, cuts: 0.0 }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    fn var(&mut self) -> Var {
        self.fresh += 1;
        format!("v{}", self.fresh)
    }

    /// Split `vars` into `k` disjoint groups, some variables dropped.
    fn deal(&mut self, vars: &[Var], k: usize) -> Vec<Vec<Var>> {
        let mut out = vec![vec![]; k];
        for v in vars {
            let i = self.rng.gen_range(0..=k);
            if i < k {
                out[i].push(v.clone());
            }
        }
        out
    }

    /// A linear positive design whose free variables are among `vars`.
    pub fn positive(&mut self, vars: &[Var], depth: usize) -> Design {
        if depth == 0 || vars.is_empty() || self.rng.gen_bool(self.daimon) {
            return if depth > 0 && self.rng.gen_bool(0.05) { Design::Omega } else { Design::Daimon };
        }
        let &(name, arity) = GEN_NAMES.choose(&mut self.rng).unwrap();
        if depth >= 2 && self.rng.gen_bool(self.cuts) {
            let groups = self.deal(vars, arity + 1);
            let head = self.negative(&groups[0], depth - 1);
            let args = (1..=arity).map(|i| self.negative(&groups[i], depth - 1)).collect();
            return Design::Cut { head: Box::new(head), name: name.to_string(), args };
        }
        let h = self.rng.gen_range(0..vars.len());
        let rest: Vec<Var> = vars.iter().enumerate().filter(|&(i, _)| i != h).map(|(_, v)| v.clone()).collect();
        let groups = self.deal(&rest, arity);
        let args = groups.iter().map(|g| self.negative(g, depth - 1)).collect();
        Design::App { head: vars[h].clone(), name: name.to_string(), args }
    }

    /// A linear negative design whose free variables are among `vars`.
    pub fn negative(&mut self, vars: &[Var], depth: usize) -> Design {
        let mut bs = BTreeMap::new();
        if depth == 0 {
            return Design::Neg(bs);
        }
        for &(name, arity) in &GEN_NAMES {
            if !self.rng.gen_bool(self.branch) {
                continue;
            }
            let bound: Vec<Var> = (0..arity).map(|_| self.var()).collect();
            let mut scope = vars.to_vec();
            scope.extend(bound.iter().cloned());
            let body = self.positive(&scope, depth - 1);
            bs.insert(name.to_string(), Branch { vars: bound, body });
        }
        Design::Neg(bs)
    }

    /// A positive design atomic on `x0`.
    pub fn atomic_positive(&mut self, depth: usize) -> Design {
        self.positive(&[X0.to_string()], depth)
    }

    /// A closed negative design.
    pub fn atomic_negative(&mut self, depth: usize) -> Design {
        self.negative(&[], depth)
    }

    /// A path of a random cut-free design.
    pub fn path(&mut self, depth: usize, max_len: usize) -> Seq {
        loop {
            let d = if self.rng.gen_bool(0.5) { self.atomic_positive(depth) } else { self.atomic_negative(depth) };
            let ps = paths_of(&d, max_len).unwrap_or_default();
            let ps: Vec<Seq> = ps.into_iter().filter(|s| !s.is_empty()).collect();
            if let Some(s) = ps.choose(&mut self.rng) {
                return s.clone();
            }
        }
    }

    /// Replace one positive subdesign by Ω.
    fn prune(&mut self, d: &Design) -> Design {
        let n = count_positive(d);
        let k = self.rng.gen_range(0..n.max(1));
        prune_at(d, &mut { k })
    }

    /// An atomic pair `(p, n)`, orthogonal roughly half the time.
    pub fn atomic_pair(&mut self, depth: usize) -> (Design, Design) {
        let n = self.atomic_negative(depth);
        match self.rng.gen_range(0..3) {
            0 => (self.atomic_positive(depth), n),
            k => {
                let ps = paths_of(&n, 2 * depth + 2).unwrap_or_default();
                let Some(s) = ps.choose(&mut self.rng).cloned() else { return (Design::Daimon, n) };
                let p = completion(&dual(&s).expect("paths have duals"), &gen_signature())
                    .map(|p| crate::syntax::canonical(&p))
                    .unwrap_or(Design::Daimon);
                if k == 1 {
                    (p, n)
                } else {
                    (self.prune(&p), n)
                }
            }
        }
    }

    /// `(D, E, F)` with `D = {q}`, `E = {m1/x}`, `F = {m2/y}` and `D ⊥ E ∪ F`.
    pub fn orthogonal_triple(&mut self, depth: usize) -> (MultiDesign, MultiDesign, MultiDesign) {
        loop {
            let (x, y) = (self.var(), self.var());
            let q = self.positive(&[x.clone(), y.clone()], depth);
            let mut bs = BTreeMap::new();
            bs.insert("c".to_string(), Branch { vars: vec![x.clone(), y.clone()], body: q.clone() });
            let n0 = Design::Neg(bs);
            let ps = paths_of(&n0, 2 * depth + 4).unwrap_or_default();
            let Some(s) = ps.iter().filter(|s| !s.is_empty()).collect::<Vec<_>>().choose(&mut self.rng).cloned().cloned()
            else {
                continue;
            };
            let Ok(p0) = completion(&dual(&s).expect("paths have duals"), &gen_signature()) else { continue };
            let Design::App { args, .. } = p0 else { continue };
            let d = MultiDesign::of_positive(q);
            let e = MultiDesign::of_negative(&x, args[0].clone());
            let f = MultiDesign::of_negative(&y, args[1].clone());
            return (d, e, f);
        }
    }

    /// A compatible pair of multi-designs, possibly with cuts.
    pub fn multi_pair(&mut self, depth: usize) -> (MultiDesign, MultiDesign) {
        let (x, y, z) = (self.var(), self.var(), self.var());
        let q = self.positive(&[x.clone(), y.clone()], depth);
        let m1 = self.negative(&[z.clone()], depth);
        let m2 = self.negative(&[], depth);
        let m3 = self.negative(&[], depth);
        let mut neg_d = BTreeMap::new();
        let mut neg_e = BTreeMap::new();
        neg_e.insert(x, m1);
        if self.rng.gen_bool(0.5) {
            neg_e.insert(y, m2);
        }
        if self.rng.gen_bool(0.5) {
            neg_d.insert(z, m3);
        }
        let d = MultiDesign { negatives: neg_d, positive: Some(q) };
        let e = MultiDesign { negatives: neg_e, positive: None };
        if self.rng.gen_bool(0.5) {
            (d, e)
        } else {
            (e, d)
        }
    }
}

fn count_positive(d: &Design) -> usize {
    match d {
        Design::Daimon | Design::Omega => 1,
        Design::App { args, .. } => 1 + args.iter().map(count_positive).sum::<usize>(),
        Design::Cut { head, args, .. } => 1 + count_positive(head) + args.iter().map(count_positive).sum::<usize>(),
        Design::Neg(bs) => bs.values().map(|b| count_positive(&b.body)).sum(),
    }
}

fn prune_at(d: &Design, k: &mut usize) -> Design {
    match d {
        Design::Neg(bs) => Design::Neg(
            bs.iter().map(|(n, b)| (n.clone(), Branch { vars: b.vars.clone(), body: prune_at(&b.body, k) })).collect(),
        ),
        _ if *k == 0 => {
            *k = usize::MAX;
            Design::Omega
        }
        Design::App { head, name, args } => {
            *k = k.saturating_sub(1);
            Design::App { head: head.clone(), name: name.clone(), args: args.iter().map(|a| prune_at(a, k)).collect() }
        }
        Design::Cut { head, name, args } => {
            *k = k.saturating_sub(1);
            Design::Cut {
                head: Box::new(prune_at(head, k)),
                name: name.clone(),
                args: args.iter().map(|a| prune_at(a, k)).collect(),
            }
        }
        other => {
            *k = k.saturating_sub(1);
            other.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::paths::is_path;
    use crate::reduction::is_orthogonal;
    use crate::syntax::{classify, is_linear};

    #[test]
    fn generated_designs_are_well_formed() {
        let mut g = DesignGen::new(7);
        for _ in 0..200 {
            let p = g.atomic_positive(4);
            let n = g.atomic_negative(4);
            assert!(classify(&p).atomic && classify(&n).atomic);
            assert!(is_linear(&p) && is_linear(&n));
            assert!(is_path(&g.path(4, 10)));
        }
    }

    #[test]
    fn pairs_mix_verdicts() {
        let mut g = DesignGen::new(1);
        let ortho = (0..200)
            .filter(|_| {
                let (p, n) = g.atomic_pair(4);
                is_orthogonal(&p, &n).unwrap()
            })
            .count();
        assert!(ortho > 40 && ortho < 180, "{ortho}");
    }

    #[test]
    fn same_seed_same_designs() {
        let a: Vec<Design> = (0..5).map({
            let mut g = DesignGen::new(3);
            move |_| g.atomic_positive(4)
        })
        .collect();
        let mut g = DesignGen::new(3);
        let b: Vec<Design> = (0..5).map(|_| g.atomic_positive(4)).collect();
        assert_eq!(a, b);
    }
}
