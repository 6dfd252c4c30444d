//! Multi-designs: cuts between two sides, interaction sequences and restriction of paths.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::paths::{justifier_in, Action, Seq};
use crate::reduction::{normalize, DEFAULT_FUEL};
use crate::syntax::{
    free_vars, parse_design_infer, parse_signature, render_design, rename, subst, Branch, Design, Fresh, Signature,
    Var, VarSet, X0,
};

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MultiDesign {
    pub negatives: BTreeMap<Var, Design>,
    pub positive: Option<Design>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Compatibility {
    Incompatible,
    Compatible,
    ClosedCompatible,
}

impl MultiDesign {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn of_positive(p: Design) -> Self {
        MultiDesign { negatives: BTreeMap::new(), positive: Some(p) }
    }

    pub fn of_negative(x: &str, n: Design) -> Self {
        let mut negatives = BTreeMap::new();
        negatives.insert(x.to_string(), n);
        MultiDesign { negatives, positive: None }
    }

    /// `{p}` for a positive design, `{n/x0}` for a negative one.
    pub fn of_design(d: Design) -> Self {
        if d.is_positive() {
            Self::of_positive(d)
        } else {
            Self::of_negative(X0, d)
        }
    }

    pub fn new(negatives: BTreeMap<Var, Design>, positive: Option<Design>) -> Result<Self> {
        let m = MultiDesign { negatives, positive };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(p) = &self.positive {
            if !p.is_positive() {
                return Err(Error::MultiDesign("the positive element is negative".into()));
            }
        }
        let np = self.np();
        let mut seen: HashSet<Var> = HashSet::new();
        if self.negatives.values().any(|n| !n.is_negative()) {
            return Err(Error::MultiDesign("a place holds a positive design".into()));
        }
        for d in self.designs() {
            for v in free_vars(d) {
                if np.contains(&v) {
                    return Err(Error::MultiDesign(format!("free variable {v} is also a place")));
                }
                if !seen.insert(v.clone()) {
                    return Err(Error::MultiDesign(format!("free variable {v} is shared")));
                }
            }
        }
        Ok(())
    }

    pub fn is_positive(&self) -> bool {
        self.positive.is_some()
    }

    pub fn len(&self) -> usize {
        self.negatives.len() + usize::from(self.positive.is_some())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn designs(&self) -> impl Iterator<Item = &Design> {
        self.positive.iter().chain(self.negatives.values())
    }

    pub fn fv(&self) -> VarSet {
        self.designs().flat_map(free_vars).collect()
    }

    pub fn np(&self) -> VarSet {
        self.negatives.keys().cloned().collect()
    }

    pub fn union(&self, other: &MultiDesign) -> Result<MultiDesign> {
        if self.positive.is_some() && other.positive.is_some() {
            return Err(Error::MultiDesign("union has two positive designs".into()));
        }
        let mut negatives = self.negatives.clone();
        for (x, n) in &other.negatives {
            if negatives.insert(x.clone(), n.clone()).is_some() {
                return Err(Error::MultiDesign(format!("place {x} occurs twice")));
            }
        }
        MultiDesign::new(negatives, self.positive.clone().or_else(|| other.positive.clone()))
    }

    pub fn is_subset_of(&self, other: &MultiDesign) -> bool {
        let pos_ok = match (&self.positive, &other.positive) {
            (None, _) => true,
            (Some(p), Some(q)) => p == q,
            (Some(_), None) => false,
        };
        pos_ok && self.negatives.iter().all(|(x, n)| other.negatives.get(x) == Some(n))
    }
}

impl fmt::Display for MultiDesign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(p) = &self.positive {
            writeln!(f, "pos := {}", render_design(p))?;
        }
        for (x, n) in &self.negatives {
            writeln!(f, "{x} := {}", render_design(n))?;
        }
        Ok(())
    }
}

pub fn compatible(d: &MultiDesign, e: &MultiDesign) -> Compatibility {
    let (fd, fe, nd, ne) = (d.fv(), e.fv(), d.np(), e.np());
    if !fd.is_disjoint(&fe) || !nd.is_disjoint(&ne) {
        return Compatibility::Incompatible;
    }
    let opposite = d.is_positive() != e.is_positive();
    let ok = if opposite {
        true
    } else if !d.is_positive() {
        nd.iter().chain(ne.iter()).any(|x| !fd.contains(x) && !fe.contains(x))
    } else {
        false
    };
    if !ok {
        return Compatibility::Incompatible;
    }
    if opposite && fd == ne && fe == nd {
        Compatibility::ClosedCompatible
    } else {
        Compatibility::Compatible
    }
}

fn apply(d: &Design, sigma: &HashMap<Var, Design>, avoid: &[&Design]) -> Design {
    if sigma.is_empty() {
        return d.clone();
    }
    let mut refs = vec![d];
    refs.extend(sigma.values());
    refs.extend(avoid.iter().copied());
    let mut fresh = Fresh::avoiding(&refs);
    let image_fv: HashSet<Var> = sigma.values().flat_map(free_vars).collect();
    subst(d, sigma, &image_fv, &mut fresh)
}

/// Take out of `d` the negatives placed at free variables of `target`.
fn take_for(d: &mut MultiDesign, target: &Design) -> HashMap<Var, Design> {
    let fv = free_vars(target);
    let keys: Vec<Var> = d.negatives.keys().filter(|k| fv.contains(*k)).cloned().collect();
    keys.into_iter().filter_map(|k| d.negatives.remove(&k).map(|n| (k, n))).collect()
}

/// Cut of two compatible multi-designs; elements of `e` are consumed positive first, then by place.
pub fn cut(d: &MultiDesign, e: &MultiDesign) -> Result<MultiDesign> {
    if compatible(d, e) == Compatibility::Incompatible {
        return Err(Error::Incompatible("free variables, places or polarities clash".into()));
    }
    let mut cur = d.clone();
    if let Some(p) = &e.positive {
        let s = take_for(&mut cur, p);
        cur.positive = Some(apply(p, &s, &[]));
    }
    for (x, n) in &e.negatives {
        let s = take_for(&mut cur, n);
        let n2 = apply(n, &s, &[]);
        if !cur.fv().contains(x) {
            cur.negatives.insert(x.clone(), n2);
        } else {
            let mut sigma = HashMap::new();
            sigma.insert(x.clone(), n2);
            if let Some(p) = cur.positive.take() {
                cur.positive = Some(if free_vars(&p).contains(x) { apply(&p, &sigma, &[]) } else { p });
            }
            let keys: Vec<Var> = cur.negatives.keys().cloned().collect();
            for k in keys {
                let m = &cur.negatives[&k];
                if free_vars(m).contains(x) {
                    let m2 = apply(m, &sigma, &[]);
                    cur.negatives.insert(k, m2);
                }
            }
        }
    }
    Ok(cur)
}

pub fn normalize_multi(d: &MultiDesign) -> MultiDesign {
    MultiDesign {
        negatives: d.negatives.iter().map(|(x, n)| (x.clone(), normalize(n, DEFAULT_FUEL).result)).collect(),
        positive: d.positive.as_ref().map(|p| normalize(p, DEFAULT_FUEL).result),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Ending {
    /// ✠ reached on the left side.
    DaimonLeft,
    /// ✠ reached on the right side.
    DaimonRight,
    Omega,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interaction {
    pub seq: Seq,
    pub ending: Ending,
    pub steps: usize,
}

impl Interaction {
    pub fn converged(&self) -> bool {
        self.ending != Ending::Omega
    }
}

/// Sequence of actions followed on the side of `d`, addresses renamed to loci `x.i`.
pub fn interaction_sequence(d: &MultiDesign, e: &MultiDesign) -> Result<Interaction> {
    interaction_run(d, e, DEFAULT_FUEL)
}

pub fn interaction_run(d: &MultiDesign, e: &MultiDesign, fuel: usize) -> Result<Interaction> {
    if d.is_positive() == e.is_positive() {
        return Err(Error::Incompatible("interaction needs opposite polarities".into()));
    }
    if compatible(d, e) == Compatibility::Incompatible {
        return Err(Error::Incompatible("free variables or places clash".into()));
    }
    if !d.fv().is_subset(&e.np()) || !e.fv().is_subset(&d.np()) {
        return Err(Error::Incompatible("free variables are not matched by places".into()));
    }
    let mut sides = [d.negatives.clone(), e.negatives.clone()];
    let (mut pos, mut side) = match (&d.positive, &e.positive) {
        (Some(p), _) => (p.clone(), 0usize),
        (_, Some(p)) => (p.clone(), 1usize),
        _ => unreachable!(),
    };
    let mut out = Vec::new();
    let mut steps = 0;
    loop {
        match pos {
            Design::Daimon => {
                if side == 0 {
                    out.push(Action::Daimon);
                }
                let ending = if side == 0 { Ending::DaimonLeft } else { Ending::DaimonRight };
                return Ok(Interaction { seq: Seq(out), ending, steps });
            }
            Design::Omega => return Ok(Interaction { seq: Seq(out), ending: Ending::Omega, steps }),
            Design::Cut { .. } | Design::Neg(_) => return Err(Error::HasCuts),
            Design::App { head, name, args } => {
                if steps >= fuel {
                    return Err(Error::Budget(fuel));
                }
                steps += 1;
                let other = 1 - side;
                let n = sides[other]
                    .remove(&head)
                    .ok_or_else(|| Error::Incompatible(format!("no negative design at {head}")))?;
                let loci: Vec<Var> = (1..=args.len()).map(|i| format!("{head}.{i}")).collect();
                out.push(if side == 0 {
                    Action::Pos { addr: head.clone(), name: name.clone(), bound: loci.clone() }
                } else {
                    Action::Neg { addr: head.clone(), name: name.clone(), bound: loci.clone() }
                });
                for (l, m) in loci.iter().zip(args) {
                    sides[side].insert(l.clone(), m);
                }
                let next = match n {
                    Design::Neg(mut bs) => match bs.remove(&name) {
                        Some(Branch { vars, body }) if vars.len() == loci.len() => relocate(&body, &vars, &loci),
                        _ => Design::Omega,
                    },
                    _ => return Err(Error::Polarity { expected: "negative" }),
                };
                pos = next;
                side = other;
            }
        }
    }
}

fn relocate(body: &Design, vars: &[Var], loci: &[Var]) -> Design {
    // two passes through temporaries avoid collisions between old and new names
    let mut cur = body.clone();
    let tmp: Vec<Var> = (0..vars.len()).map(|i| format!("\u{1}{i}")).collect();
    for (v, t) in vars.iter().zip(&tmp) {
        if v != t {
            cur = rename(&cur, v, t);
        }
    }
    for (t, l) in tmp.iter().zip(loci) {
        cur = rename(&cur, t, l);
    }
    cur
}

/// ⟨d ← e⟩ for atomic cut-free designs of opposite polarities; `None` when not orthogonal.
pub fn interaction_path(d: &Design, e: &Design) -> Result<Option<Seq>> {
    if d.is_positive() == e.is_positive() {
        return Err(Error::Incompatible("interaction needs opposite polarities".into()));
    }
    if !d.is_cut_free() || !e.is_cut_free() {
        return Err(Error::HasCuts);
    }
    let (p, n) = if d.is_positive() { (d, e) } else { (e, d) };
    crate::reduction::check_atomic(p, crate::syntax::Polarity::Positive)?;
    crate::reduction::check_atomic(n, crate::syntax::Polarity::Negative)?;
    let r = interaction_sequence(&MultiDesign::of_design(d.clone()), &MultiDesign::of_design(e.clone()))?;
    Ok(if r.converged() { Some(r.seq) } else { None })
}

/// Which element of `d` each action of `s` comes from: `None` for the positive design.
pub fn owners(s: &Seq, d: &MultiDesign) -> Result<Vec<Option<Var>>> {
    let mut out: Vec<Option<Var>> = Vec::with_capacity(s.len());
    for (i, a) in s.0.iter().enumerate() {
        let o = match a {
            Action::Neg { addr, .. } => match justifier_in(&s.0[..i], a) {
                Some(j) => out[j].clone(),
                None => {
                    if !d.negatives.contains_key(addr) {
                        return Err(Error::NotPath(format!("no design of the multi-design is placed at {addr}")));
                    }
                    Some(addr.clone())
                }
            },
            _ => {
                if i == 0 {
                    if d.positive.is_none() {
                        return Err(Error::NotPath("positive first action without a positive design".into()));
                    }
                    None
                } else {
                    out[i - 1].clone()
                }
            }
        };
        out.push(o);
    }
    Ok(out)
}

/// s|E: the actions of `s` coming from the designs of `e ⊆ d`.
pub fn restrict(s: &Seq, d: &MultiDesign, e: &MultiDesign) -> Result<Seq> {
    if !e.is_subset_of(d) {
        return Err(Error::MultiDesign("restriction to a set that is not a sub-multi-design".into()));
    }
    let own = owners(s, d)?;
    let keep = |o: &Option<Var>| match o {
        None => e.positive.is_some(),
        Some(x) => e.negatives.contains_key(x),
    };
    Ok(Seq(s.0.iter().zip(&own).filter(|(_, o)| keep(o)).map(|(a, _)| a.clone()).collect()))
}

/// `.mlud` text: optional `sig ...;` header, then lines `VAR := neg` and optionally `pos := pos`.
pub fn parse_multi(text: &str, sig: &mut Signature) -> Result<MultiDesign> {
    let mut body = String::new();
    for line in text.lines() {
        let l = match line.find("--") {
            Some(i) => &line[..i],
            None => line,
        };
        body.push_str(l);
        body.push('\n');
    }
    let mut rest = body.trim_start();
    if rest.starts_with("sig") {
        let end = rest.find(';').ok_or_else(|| Error::Parse("signature header needs ';'".into()))?;
        let declared = parse_signature(&rest[..=end])?;
        for (n, k) in declared.names() {
            sig.declare(n, k)?;
        }
        rest = &rest[end + 1..];
    }
    let mut negatives = BTreeMap::new();
    let mut positive = None;
    let mut seen = BTreeSet::new();
    for line in rest.lines() {
        let l = line.trim();
        if l.is_empty() {
            continue;
        }
        let (lhs, rhs) = l.split_once(":=").ok_or_else(|| Error::Parse(format!("expected 'VAR := design' in '{l}'")))?;
        let key = lhs.trim();
        if !seen.insert(key.to_string()) {
            return Err(Error::Parse(format!("'{key}' defined twice")));
        }
        let d = parse_design_infer(rhs.trim(), sig)?;
        if key == "pos" {
            positive = Some(d);
        } else {
            if !d.is_negative() {
                return Err(Error::Polarity { expected: "negative" });
            }
            negatives.insert(key.to_string(), d);
        }
    }
    MultiDesign::new(negatives, positive)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::paths::parse_seq;
    use crate::syntax::alpha_eq;

    fn d(s: &str) -> Design {
        parse_design_infer(s, &mut Signature::new()).unwrap()
    }

    #[test]
    fn compatibility_cases() {
        let p = MultiDesign::of_positive(d("x|b<>"));
        let n = MultiDesign::of_negative("x", d("b().#"));
        assert_eq!(compatible(&p, &n), Compatibility::ClosedCompatible);
        assert_eq!(compatible(&p, &p), Compatibility::Incompatible);
        let a = MultiDesign::of_negative("x", d("b().#"));
        let b = MultiDesign::of_negative("y", d("b().#"));
        assert_eq!(compatible(&a, &b), Compatibility::Compatible);
    }

    #[test]
    fn cut_cases() {
        let p = MultiDesign::of_positive(d("x0|b<>"));
        assert_eq!(cut(&p, &MultiDesign::empty()).unwrap(), p);
        let n = MultiDesign::of_negative(X0, d("b().#"));
        let c = cut(&p, &n).unwrap();
        assert!(c.negatives.is_empty());
        assert!(alpha_eq(c.positive.as_ref().unwrap(), &d("[b().#]|b<>")));
        let c2 = cut(&n, &p).unwrap();
        assert!(alpha_eq(c2.positive.as_ref().unwrap(), &d("[b().#]|b<>")));
    }

    #[test]
    fn multi_normal_form() {
        assert_eq!(normalize_multi(&MultiDesign::empty()), MultiDesign::empty());
        let m = MultiDesign::of_negative("x", d("b().([c().#]|c<>)"));
        assert_eq!(normalize_multi(&m).negatives["x"], d("b().#"));
    }

    #[test]
    fn sequences() {
        let r = interaction_sequence(&MultiDesign::of_positive(Design::Daimon), &MultiDesign::of_negative(X0, d("{}")))
            .unwrap();
        assert_eq!(r.seq, parse_seq("#").unwrap());
        let p = d("x0|b<>");
        let n = d("b().#");
        assert_eq!(interaction_path(&p, &n).unwrap(), Some(parse_seq("x0|b<>").unwrap()));
        assert_eq!(interaction_path(&n, &p).unwrap(), Some(parse_seq("b_x0() #").unwrap()));
        assert_eq!(interaction_path(&p, &d("c().#")).unwrap(), None);
    }

    #[test]
    fn nested_loci() {
        let p = d("x0|a<b(y).(y|c<>)>");
        let n = d("a(z).(z|b<c().#>)");
        let s = interaction_path(&p, &n).unwrap().unwrap();
        assert_eq!(s, parse_seq("x0|a<x0.1> b_x0.1(x0.1.1) x0.1.1|c<>").unwrap());
    }

    #[test]
    fn restriction_trivia() {
        let p = d("x0|a<b(y).(y|c<>)>");
        let n = d("a(z).(z|b<c().#>)");
        let s = interaction_path(&p, &n).unwrap().unwrap();
        let m = MultiDesign::of_positive(p);
        assert_eq!(restrict(&s, &m, &m).unwrap(), s);
        assert_eq!(restrict(&s, &m, &MultiDesign::empty()).unwrap(), Seq::new());
    }

    #[test]
    fn mlud_format() {
        let mut sig = Signature::new();
        let m = parse_multi("sig b/0;\nx := b().#\npos := y|b<>\n", &mut sig).unwrap();
        assert_eq!(m.negatives.len(), 1);
        assert!(m.positive.is_some());
        assert!(parse_multi("x := y|b<>", &mut sig).is_err());
    }
}
