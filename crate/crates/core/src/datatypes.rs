//! Data patterns and their interpretation as behaviours, with encoders for the usual types.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::behaviours::{
    check_pure, const_behaviour, incarnation, inj, plus_pos, tensor_pos, down, visitable_paths, BehaviourExpr,
    CheckReport,
};
use crate::error::{Error, Result};
use crate::syntax::{canonical, render_design, rename, Branch, Design, Signature, P1, P2, PR, VAL, X0};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DataPattern {
    Var(String),
    Name(String),
    Plus(Box<DataPattern>, Box<DataPattern>),
    Tensor(Box<DataPattern>, Box<DataPattern>),
    Mu(String, Box<DataPattern>),
}

use DataPattern as P;

/// Free pattern variables mapped to positive behaviours.
pub type Env = BTreeMap<String, BehaviourExpr>;

impl fmt::Display for DataPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            P::Var(x) | P::Name(x) => write!(f, "{x}"),
            P::Plus(a, b) => write!(f, "({a} (+) {b})"),
            P::Tensor(a, b) => write!(f, "({a} (*) {b})"),
            P::Mu(x, a) => write!(f, "mu {x}. {a}"),
        }
    }
}

impl DataPattern {
    pub fn free_vars(&self) -> Vec<String> {
        let mut out = vec![];
        self.collect_free(&mut vec![], &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut Vec<String>) {
        match self {
            P::Var(x) => {
                if !bound.contains(x) && !out.contains(x) {
                    out.push(x.clone());
                }
            }
            P::Name(_) => {}
            P::Plus(a, b) | P::Tensor(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            P::Mu(x, a) => {
                bound.push(x.clone());
                a.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    pub fn has_mu(&self) -> bool {
        match self {
            P::Var(_) | P::Name(_) => false,
            P::Plus(a, b) | P::Tensor(a, b) => a.has_mu() || b.has_mu(),
            P::Mu(..) => true,
        }
    }

    /// Replace the free variable `x` by a pattern.
    pub fn subst(&self, x: &str, by: &DataPattern) -> DataPattern {
        match self {
            P::Var(y) if y == x => by.clone(),
            P::Var(_) | P::Name(_) => self.clone(),
            P::Plus(a, b) => P::Plus(Box::new(a.subst(x, by)), Box::new(b.subst(x, by))),
            P::Tensor(a, b) => P::Tensor(Box::new(a.subst(x, by)), Box::new(b.subst(x, by))),
            P::Mu(y, a) if y == x => self.clone(),
            P::Mu(y, a) => P::Mu(y.clone(), Box::new(a.subst(x, by))),
        }
    }
}

// ---------------------------------------------------------------------------
// Parsing

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Id(String),
    Plus,
    Times,
    LParen,
    RParen,
    Dot,
}

impl Lexer<'_> {
    fn tokens(mut self) -> Result<Vec<Tok>> {
        let mut out = vec![];
        let b = self.src.as_bytes();
        while self.pos < b.len() {
            let c = b[self.pos] as char;
            let rest = &self.src[self.pos..];
            if c.is_whitespace() {
                self.pos += 1;
            } else if rest.starts_with("(+)") {
                out.push(Tok::Plus);
                self.pos += 3;
            } else if rest.starts_with("(*)") || rest.starts_with("(x)") {
                out.push(Tok::Times);
                self.pos += 3;
            } else if c == '(' {
                out.push(Tok::LParen);
                self.pos += 1;
            } else if c == ')' {
                out.push(Tok::RParen);
                self.pos += 1;
            } else if c == '.' {
                out.push(Tok::Dot);
                self.pos += 1;
            } else if c.is_alphanumeric() || c == '_' {
                let s = self.pos;
                while self.pos < b.len() && ((b[self.pos] as char).is_alphanumeric() || b[self.pos] == b'_' || b[self.pos] == b'\'') {
                    self.pos += 1;
                }
                out.push(Tok::Id(self.src[s..self.pos].to_string()));
            } else if c == '#' {
                // comment to end of line
                while self.pos < b.len() && b[self.pos] != b'\n' {
                    self.pos += 1;
                }
            } else {
                return Err(Error::Parse(format!("unexpected character '{c}' in pattern")));
            }
        }
        Ok(out)
    }
}

struct PatParser {
    toks: Vec<Tok>,
    pos: usize,
    bound: Vec<String>,
}

impl PatParser {
    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn pat(&mut self) -> Result<DataPattern> {
        let mut acc = self.atom()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    acc = P::Plus(Box::new(acc), Box::new(self.atom()?));
                }
                Some(Tok::Times) => {
                    self.pos += 1;
                    acc = P::Tensor(Box::new(acc), Box::new(self.atom()?));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn atom(&mut self) -> Result<DataPattern> {
        match self.next() {
            Some(Tok::LParen) => {
                let p = self.pat()?;
                match self.next() {
                    Some(Tok::RParen) => Ok(p),
                    _ => Err(Error::Parse("expected ')' in pattern".into())),
                }
            }
            Some(Tok::Id(m)) if m == "mu" => {
                let x = match self.next() {
                    Some(Tok::Id(x)) => x,
                    _ => return Err(Error::Parse("expected a variable after 'mu'".into())),
                };
                if self.bound.contains(&x) {
                    return Err(Error::Pattern(format!("variable {x} is bound twice")));
                }
                if self.next() != Some(Tok::Dot) {
                    return Err(Error::Parse("expected '.' after the mu variable".into()));
                }
                self.bound.push(x.clone());
                let body = self.pat()?;
                self.bound.pop();
                Ok(P::Mu(x, Box::new(body)))
            }
            Some(Tok::Id(x)) => {
                let upper = x.chars().next().is_some_and(|c| c.is_uppercase());
                if self.bound.contains(&x) || upper {
                    Ok(P::Var(x))
                } else if Signature::is_reserved(&x) {
                    Err(Error::Reserved(x))
                } else {
                    Ok(P::Name(x))
                }
            }
            _ => Err(Error::Parse("unexpected end of pattern".into())),
        }
    }
}

/// Parse `pat ::= NAME | VAR | pat (+) pat | pat (*) pat | mu VAR . pat`.
///
/// Identifiers bound by `mu` or starting with an upper-case letter are variables, others names.
pub fn parse_pattern(text: &str) -> Result<DataPattern> {
    let toks = Lexer { src: text, pos: 0 }.tokens()?;
    let mut p = PatParser { toks, pos: 0, bound: vec![] };
    let pat = p.pat()?;
    if p.pos != p.toks.len() {
        return Err(Error::Parse("trailing input in pattern".into()));
    }
    Ok(pat)
}

/// `parse_pattern` that also rejects free variables.
pub fn parse_closed_pattern(text: &str) -> Result<DataPattern> {
    let p = parse_pattern(text)?;
    if let Some(x) = p.free_vars().first() {
        return Err(Error::Pattern(format!("unbound variable {x}")));
    }
    Ok(p)
}

pub fn bool_pattern() -> DataPattern {
    parse_pattern("b (+) b").unwrap()
}

pub fn nat_pattern() -> DataPattern {
    parse_pattern("mu X. (n (+) X)").unwrap()
}

/// `List_A` over an element pattern.
pub fn list_pattern(elem: &DataPattern) -> DataPattern {
    parse_pattern("mu X. (l (+) (A (*) X))").unwrap().subst("A", elem)
}

/// The degenerate variant without a base case.
pub fn list_no_base_pattern(elem: &DataPattern) -> DataPattern {
    parse_pattern("mu X. (A (*) X)").unwrap().subst("A", elem)
}

pub fn tree_pattern(elem: &DataPattern) -> DataPattern {
    parse_pattern("mu X. (t (+) (A (*) mu Y. (l (+) (X (*) Y))))").unwrap().subst("A", elem)
}

/// Names for the usual patterns: `Bool`, `Nat`, `List_b`, `Tree_b`, `ListNB_b`.
pub fn named_pattern(name: &str) -> Option<DataPattern> {
    let elem = |s: &str| P::Name(s.to_string());
    match name {
        "Bool" => Some(bool_pattern()),
        "Nat" => Some(nat_pattern()),
        _ => {
            if let Some(a) = name.strip_prefix("List_") {
                Some(list_pattern(&elem(a)))
            } else if let Some(a) = name.strip_prefix("Tree_") {
                Some(tree_pattern(&elem(a)))
            } else {
                name.strip_prefix("ListNB_").map(|a| list_no_base_pattern(&elem(a)))
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Steadiness and basis

/// Syntactic sufficient condition for steadiness.
pub fn is_steady(a: &DataPattern) -> bool {
    match a {
        P::Name(_) => true,
        P::Var(_) => false,
        P::Plus(l, r) => (is_steady(l) && keeps_purity(r)) || (is_steady(r) && keeps_purity(l)),
        P::Tensor(l, r) => is_steady(l) && is_steady(r),
        P::Mu(_, body) => is_steady(body),
    }
}

/// Patterns whose interpretation is pure whenever the environment is: anything built from
/// names and variables by the connectives, with fixed points only around steady bodies.
fn keeps_purity(a: &DataPattern) -> bool {
    match a {
        P::Name(_) | P::Var(_) => true,
        P::Plus(l, r) | P::Tensor(l, r) => keeps_purity(l) && keeps_purity(r),
        P::Mu(..) => is_steady(a),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Steadiness {
    Steady,
    /// Rejected by the syntactic check; the pattern may still be steady semantically.
    Unknown,
}

pub fn steadiness(a: &DataPattern) -> Steadiness {
    if is_steady(a) {
        Steadiness::Steady
    } else {
        Steadiness::Unknown
    }
}

/// Bounded purity probe of the interpretation, for patterns the syntactic check rejects.
pub fn semantic_steadiness(a: &DataPattern, level: usize, max_len: usize) -> Result<CheckReport> {
    let b = interpret(a, &Env::new(), level)?;
    check_pure(&b, level, max_len)
}

/// A basis of a steady pattern.
pub fn basis(a: &DataPattern) -> Result<BehaviourExpr> {
    if !is_steady(a) {
        return Err(Error::Pattern(format!("{a} is not steady")));
    }
    basis_of(a)
}

fn basis_of(a: &DataPattern) -> Result<BehaviourExpr> {
    match a {
        P::Name(n) => const_behaviour(n),
        P::Plus(l, r) => {
            if is_steady(l) && keeps_purity(r) {
                Ok(inj(1, down(basis_of(l)?)))
            } else {
                Ok(inj(2, down(basis_of(r)?)))
            }
        }
        P::Tensor(l, r) => Ok(tensor_pos(basis_of(l)?, basis_of(r)?)),
        P::Mu(_, body) => basis_of(body),
        P::Var(x) => Err(Error::Pattern(format!("variable {x} has no basis"))),
    }
}

// ---------------------------------------------------------------------------
// Interpretation

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Seed {
    /// Iterate from `{✠}`.
    Daimon,
    /// Iterate from the basis of the fixed point body.
    Basis,
}

/// `⟦A⟧^σ` with every fixed point cut at `level` Kleene steps from `{✠}`.
pub fn interpret(a: &DataPattern, env: &Env, level: usize) -> Result<BehaviourExpr> {
    interpret_seeded(a, env, Some(level), Seed::Daimon)
}

/// As [`interpret`], with fixed points left at the level of each later query.
pub fn interpret_open(a: &DataPattern, env: &Env, level: Option<usize>) -> Result<BehaviourExpr> {
    interpret_seeded(a, env, level, Seed::Daimon)
}

pub fn interpret_seeded(a: &DataPattern, env: &Env, level: Option<usize>, seed: Seed) -> Result<BehaviourExpr> {
    let mut bound = vec![];
    interp(a, env, level, seed, &mut bound)
}

fn interp(a: &DataPattern, env: &Env, level: Option<usize>, seed: Seed, bound: &mut Vec<String>) -> Result<BehaviourExpr> {
    Ok(match a {
        P::Name(n) => const_behaviour(n)?,
        P::Var(x) if bound.contains(x) => BehaviourExpr::Var(x.clone()),
        P::Var(x) => match env.get(x) {
            Some(b) if b.is_positive() => b.clone(),
            Some(b) => return Err(Error::Pattern(format!("environment maps {x} to the negative {b}"))),
            None => return Err(Error::Pattern(format!("unbound variable {x}"))),
        },
        P::Plus(l, r) => plus_pos(interp(l, env, level, seed, bound)?, interp(r, env, level, seed, bound)?),
        P::Tensor(l, r) => tensor_pos(interp(l, env, level, seed, bound)?, interp(r, env, level, seed, bound)?),
        P::Mu(x, body) => {
            let s = match seed {
                Seed::Daimon => BehaviourExpr::Daimon,
                Seed::Basis => {
                    let b = basis(a)?;
                    // the basis has no free pattern variables, but constants only
                    b
                }
            };
            bound.push(x.clone());
            let body = interp(body, env, level, seed, bound);
            bound.pop();
            BehaviourExpr::Mu { var: x.clone(), body: Box::new(body?), level, seed: Box::new(s) }
        }
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonotoneReport {
    pub holds: bool,
    pub levels: usize,
    pub max_len: usize,
    pub incarnation_sizes: Vec<usize>,
    pub visitable_sizes: Vec<usize>,
    pub first_violation: Option<String>,
}

/// Inclusion of incarnations and visitable paths from each level to the next, for `0..=levels`.
pub fn kleene_monotone_report(a: &DataPattern, env: &Env, levels: usize, max_len: usize) -> Result<MonotoneReport> {
    let mut inc_sizes = vec![];
    let mut vis_sizes = vec![];
    let mut prev: Option<(Vec<String>, Vec<crate::paths::Seq>)> = None;
    let mut first_violation = None;
    for k in 0..=levels {
        let b = interpret(a, env, k)?;
        let mut inc: Vec<String> = incarnation(&b, k)?.designs.iter().map(|d| render_design(&canonical(d))).collect();
        inc.sort();
        let vis = visitable_paths(&b, k, max_len)?;
        inc_sizes.push(inc.len());
        vis_sizes.push(vis.len());
        if let (Some((pi, pv)), None) = (&prev, &first_violation) {
            if let Some(d) = pi.iter().find(|d| inc.binary_search(d).is_err()) {
                first_violation = Some(format!("level {}: design {d} is lost at level {k}", k - 1));
            } else if let Some(s) = pv.iter().find(|s| vis.binary_search(s).is_err()) {
                first_violation = Some(format!("level {}: path {s} is lost at level {k}", k - 1));
            }
        }
        prev = Some((inc, vis));
    }
    Ok(MonotoneReport {
        holds: first_violation.is_none(),
        levels,
        max_len,
        incarnation_sizes: inc_sizes,
        visitable_sizes: vis_sizes,
        first_violation,
    })
}

// ---------------------------------------------------------------------------
// Encoders

fn at(d: &Design, v: &str) -> Design {
    rename(&canonical(d), X0, v)
}

fn inject(i: u8, body: Design) -> Design {
    let v = "x";
    let name = if i == 1 { P1 } else { P2 };
    Design::app(X0, name, vec![Design::branch(VAL, &[v], rename(&canonical(&body), X0, v))])
}

fn constant(a: &str) -> Design {
    Design::app(X0, a, vec![])
}

fn pair(h: &Design, t: &Design) -> Design {
    Design::app(
        X0,
        PR,
        vec![Design::branch(VAL, &["y"], at(h, "y")), Design::branch(VAL, &["z"], at(t, "z"))],
    )
}

/// Bound variables renamed `x1`, `x2`, ... in traversal order.
pub fn tidy(d: &Design) -> Design {
    fn go(d: &Design, env: &mut Vec<(String, String)>, n: &mut usize) -> Design {
        match d {
            Design::Daimon | Design::Omega => d.clone(),
            Design::App { head, name, args } => Design::App {
                head: env.iter().rev().find(|(a, _)| a == head).map(|(_, b)| b.clone()).unwrap_or(head.clone()),
                name: name.clone(),
                args: args.iter().map(|a| go(a, env, n)).collect(),
            },
            Design::Cut { head, name, args } => Design::Cut {
                head: Box::new(go(head, env, n)),
                name: name.clone(),
                args: args.iter().map(|a| go(a, env, n)).collect(),
            },
            Design::Neg(bs) => Design::Neg(
                bs.iter()
                    .map(|(name, b)| {
                        let k = env.len();
                        let vars = b
                            .vars
                            .iter()
                            .map(|v| {
                                *n += 1;
                                let w = format!("x{n}");
                                env.push((v.clone(), w.clone()));
                                w
                            })
                            .collect();
                        let body = go(&b.body, env, n);
                        env.truncate(k);
                        (name.clone(), Branch { vars, body })
                    })
                    .collect(),
            ),
        }
    }
    go(&canonical(d), &mut vec![], &mut 0)
}

/// `true` is the left injection of `Bool = b ⊕⁺ b`.
pub fn encode_bool(v: bool) -> Design {
    tidy(&inject(if v { 1 } else { 2 }, constant("b")))
}

pub fn decode_bool(d: &Design) -> Result<bool> {
    if crate::syntax::alpha_eq(d, &encode_bool(true)) {
        Ok(true)
    } else if crate::syntax::alpha_eq(d, &encode_bool(false)) {
        Ok(false)
    } else {
        Err(Error::Unsupported(format!("{} is not a boolean", render_design(d))))
    }
}

pub fn encode_nat(k: usize) -> Design {
    let mut d = inject(1, constant("n"));
    for _ in 0..k {
        d = inject(2, d);
    }
    tidy(&d)
}

/// Inverse of [`encode_nat`] on canonical forms.
pub fn decode_nat(d: &Design) -> Result<usize> {
    let bad = || Error::Unsupported(format!("{} is not a canonical natural number", render_design(d)));
    let mut cur = d.clone();
    let mut k = 0;
    loop {
        let Design::App { head, name, args } = &cur else { return Err(bad()) };
        if head != X0 || args.len() != 1 {
            return Err(bad());
        }
        let Design::Neg(bs) = &args[0] else { return Err(bad()) };
        let Some(br) = bs.get(VAL) else { return Err(bad()) };
        if bs.len() != 1 || br.vars.len() != 1 {
            return Err(bad());
        }
        let body = rename(&br.body, &br.vars[0], X0);
        if name == P1 {
            return if body == constant("n") { Ok(k) } else { Err(bad()) };
        }
        if name != P2 {
            return Err(bad());
        }
        k += 1;
        cur = body;
    }
}

/// A list over designs of an element type: `nil = ι₁(l)`, `cons = ι₂(head ⊗ tail)`.
pub fn encode_list(elems: &[Design]) -> Design {
    let mut d = inject(1, constant("l"));
    for h in elems.iter().rev() {
        d = inject(2, pair(h, &d));
    }
    tidy(&d)
}

#[derive(Clone, Debug, PartialEq)]
pub enum Tree {
    Leaf,
    Node(Design, Vec<Tree>),
}

/// `leaf = ι₁(t)`, `node(a, ts) = ι₂(a ⊗ list(ts))`.
pub fn encode_tree(t: &Tree) -> Design {
    fn go(t: &Tree) -> Design {
        match t {
            Tree::Leaf => inject(1, constant("t")),
            Tree::Node(a, kids) => {
                let mut l = inject(1, constant("l"));
                for k in kids.iter().rev() {
                    l = inject(2, pair(&go(k), &l));
                }
                inject(2, pair(a, &l))
            }
        }
    }
    tidy(&go(t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::behaviours::member;

    #[test]
    fn parses_examples() {
        assert_eq!(parse_pattern("b (+) b").unwrap(), bool_pattern());
        assert_eq!(nat_pattern().to_string(), "mu X. (n (+) X)");
        let l = parse_pattern("mu X. (l (+) (A (*) X))").unwrap();
        assert_eq!(l.free_vars(), vec!["A".to_string()]);
        assert!(parse_closed_pattern("mu X. (l (+) (A (*) X))").is_err());
        assert!(parse_pattern("val (+) b").is_err());
        assert!(parse_pattern("mu X. mu X. X").is_err());
    }

    #[test]
    fn steadiness_examples() {
        assert!(is_steady(&nat_pattern()));
        assert!(is_steady(&bool_pattern()));
        assert!(is_steady(&tree_pattern(&P::Name("b".into()))));
        assert!(!is_steady(&list_no_base_pattern(&P::Var("A".into()))));
        assert!(!is_steady(&parse_pattern("mu X. X").unwrap()));
    }

    #[test]
    fn bases() {
        assert_eq!(basis(&P::Name("b".into())).unwrap(), const_behaviour("b").unwrap());
        let b = basis(&nat_pattern()).unwrap();
        assert_eq!(b, inj(1, down(const_behaviour("n").unwrap())));
        assert_eq!(incarnation(&b, 0).unwrap().len(), 3);
    }

    #[test]
    fn interpretations() {
        assert_eq!(interpret(&P::Name("b".into()), &Env::new(), 0).unwrap(), const_behaviour("b").unwrap());
        assert_eq!(incarnation(&interpret(&bool_pattern(), &Env::new(), 0).unwrap(), 0).unwrap().len(), 5);
        let sizes: Vec<usize> = (0..4)
            .map(|k| incarnation(&interpret(&nat_pattern(), &Env::new(), k).unwrap(), k).unwrap().len())
            .collect();
        assert_eq!(sizes, vec![1, 4, 7, 10]);
    }

    #[test]
    fn nat_codec() {
        for k in 0..=6 {
            assert_eq!(decode_nat(&encode_nat(k)).unwrap(), k);
        }
        let nat = interpret_open(&nat_pattern(), &Env::new(), None).unwrap();
        assert!(member(&encode_nat(0), &nat, 1).unwrap());
        assert!(!member(&encode_nat(2), &nat, 2).unwrap());
        assert!(member(&encode_nat(2), &nat, 3).unwrap());
        assert!(decode_nat(&encode_bool(true)).is_err());
    }

    #[test]
    fn lists_and_trees_are_members() {
        let list = interpret_open(&list_pattern(&P::Name("b".into())), &Env::new(), None).unwrap();
        let b = constant("b");
        let l = encode_list(&[b.clone(), b.clone()]);
        assert!(member(&l, &list, 3).unwrap());
        assert!(!member(&l, &list, 2).unwrap());
        let tree = interpret_open(&tree_pattern(&P::Name("b".into())), &Env::new(), None).unwrap();
        assert!(member(&encode_tree(&Tree::Leaf), &tree, 1).unwrap());
        let t = encode_tree(&Tree::Node(b, vec![Tree::Leaf]));
        assert!(member(&t, &tree, 2).unwrap());
    }

    #[test]
    fn monotone() {
        let r = kleene_monotone_report(&nat_pattern(), &Env::new(), 3, 12).unwrap();
        assert!(r.holds, "{r:?}");
        assert_eq!(r.incarnation_sizes, vec![1, 4, 7, 10]);
        let r = kleene_monotone_report(&bool_pattern(), &Env::new(), 2, 10).unwrap();
        assert!(r.holds && r.incarnation_sizes.iter().all(|&n| n == 5));
    }
}
