//! Designs as terms: signature, concrete syntax and structural operations.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Var = String;
pub type Name = String;
pub type VarSet = BTreeSet<Var>;

/// The distinguished variable of atomic designs.
pub const X0: &str = "x0";

pub const VAL: &str = "val";
pub const P1: &str = "p1";
pub const P2: &str = "p2";
pub const PR: &str = "pr";

pub const RESERVED: [(&str, usize); 4] = [(VAL, 1), (P1, 1), (P2, 1), (PR, 2)];

/// Names with their arities. Reserved names come first and keep fixed indices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Signature {
    names: Vec<(Name, usize)>,
    #[serde(skip)]
    index: HashMap<Name, usize>,
}

impl Default for Signature {
    fn default() -> Self {
        Signature::new()
    }
}

impl Signature {
    pub fn new() -> Self {
        let mut sig = Signature { names: Vec::new(), index: HashMap::new() };
        for (n, k) in RESERVED {
            sig.names.push((n.to_string(), k));
            sig.index.insert(n.to_string(), sig.names.len() - 1);
        }
        sig
    }

    pub fn with(names: &[(&str, usize)]) -> Result<Self> {
        let mut sig = Signature::new();
        for (n, k) in names {
            sig.declare(n, *k)?;
        }
        Ok(sig)
    }

    pub fn declare(&mut self, name: &str, arity: usize) -> Result<()> {
        match self.arity(name) {
            Some(k) if k == arity => Ok(()),
            Some(k) => Err(Error::Arity { name: name.to_string(), expected: k, found: arity }),
            None => {
                self.names.push((name.to_string(), arity));
                self.index.insert(name.to_string(), self.names.len() - 1);
                Ok(())
            }
        }
    }

    pub fn arity(&self, name: &str) -> Option<usize> {
        self.id(name).map(|i| self.names[i].1)
    }

    pub fn id(&self, name: &str) -> Option<usize> {
        if self.index.len() != self.names.len() {
            // deserialized value: index not rebuilt
            return self.names.iter().position(|(n, _)| n == name);
        }
        self.index.get(name).copied()
    }

    pub fn name(&self, id: usize) -> &str {
        &self.names[id].0
    }

    pub fn names(&self) -> impl Iterator<Item = (&str, usize)> {
        self.names.iter().map(|(n, k)| (n.as_str(), *k))
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn is_reserved(name: &str) -> bool {
        RESERVED.iter().any(|(n, _)| *n == name)
    }

    /// Declare every name used in `d`, taking arities from the use sites.
    pub fn absorb(&mut self, d: &Design) -> Result<()> {
        let mut err = None;
        d.visit_names(&mut |n, k| {
            if err.is_none() {
                if let Err(e) = self.declare(n, k) {
                    err = Some(e);
                }
            }
        });
        err.map_or(Ok(()), Err)
    }

    /// Check every name used in `d` is declared with the right arity.
    pub fn check(&self, d: &Design) -> Result<()> {
        let mut err = None;
        d.visit_names(&mut |n, k| {
            if err.is_some() {
                return;
            }
            match self.arity(n) {
                None => err = Some(Error::Undeclared(n.to_string())),
                Some(a) if a != k => {
                    err = Some(Error::Arity { name: n.to_string(), expected: a, found: k })
                }
                _ => {}
            }
        });
        err.map_or(Ok(()), Err)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Branch {
    pub vars: Vec<Var>,
    pub body: Design,
}

/// A finite design. Negative sums map names to branches; absent names are Ω.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Design {
    Daimon,
    Omega,
    App { head: Var, name: Name, args: Vec<Design> },
    Cut { head: Box<Design>, name: Name, args: Vec<Design> },
    Neg(BTreeMap<Name, Branch>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Polarity {
    Positive,
    Negative,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classification {
    pub polarity: Polarity,
    pub atomic: bool,
    pub cut_free: bool,
}

impl Design {
    /// Ω⁻, the negative design with no branch.
    pub fn empty_neg() -> Design {
        Design::Neg(BTreeMap::new())
    }

    pub fn app(head: &str, name: &str, args: Vec<Design>) -> Design {
        Design::App { head: head.to_string(), name: name.to_string(), args }
    }

    pub fn cut(head: Design, name: &str, args: Vec<Design>) -> Design {
        Design::Cut { head: Box::new(head), name: name.to_string(), args }
    }

    pub fn branch(name: &str, vars: &[&str], body: Design) -> Design {
        let mut m = BTreeMap::new();
        m.insert(name.to_string(), Branch { vars: vars.iter().map(|v| v.to_string()).collect(), body });
        Design::Neg(m)
    }

    /// Sum of two negative designs with disjoint branch names.
    pub fn plus(self, other: Design) -> Design {
        match (self, other) {
            (Design::Neg(mut a), Design::Neg(b)) => {
                a.extend(b);
                Design::Neg(a)
            }
            (a, _) => a,
        }
    }

    pub fn polarity(&self) -> Polarity {
        match self {
            Design::Neg(_) => Polarity::Negative,
            _ => Polarity::Positive,
        }
    }

    pub fn is_positive(&self) -> bool {
        self.polarity() == Polarity::Positive
    }

    pub fn is_negative(&self) -> bool {
        self.polarity() == Polarity::Negative
    }

    pub fn is_cut_free(&self) -> bool {
        match self {
            Design::Daimon | Design::Omega => true,
            Design::App { args, .. } => args.iter().all(Design::is_cut_free),
            Design::Cut { .. } => false,
            Design::Neg(bs) => bs.values().all(|b| b.body.is_cut_free()),
        }
    }

    fn visit_names(&self, f: &mut dyn FnMut(&str, usize)) {
        match self {
            Design::Daimon | Design::Omega => {}
            Design::App { name, args, .. } => {
                f(name, args.len());
                args.iter().for_each(|a| a.visit_names(f));
            }
            Design::Cut { head, name, args } => {
                f(name, args.len());
                head.visit_names(f);
                args.iter().for_each(|a| a.visit_names(f));
            }
            Design::Neg(bs) => {
                for (n, b) in bs {
                    f(n, b.vars.len());
                    b.body.visit_names(f);
                }
            }
        }
    }

    /// Number of proper actions and daimons, i.e. nodes of the located forest.
    pub fn action_count(&self) -> usize {
        match self {
            Design::Daimon => 1,
            Design::Omega => 0,
            Design::App { args, .. } => 1 + args.iter().map(Design::action_count).sum::<usize>(),
            Design::Cut { head, args, .. } => {
                head.action_count() + args.iter().map(Design::action_count).sum::<usize>()
            }
            Design::Neg(bs) => bs.values().filter(|b| b.body != Design::Omega).map(|b| 1 + b.body.action_count()).sum(),
        }
    }

    /// Longest branch, counted in actions.
    pub fn depth(&self) -> usize {
        match self {
            Design::Daimon => 1,
            Design::Omega => 0,
            Design::App { args, .. } => 1 + args.iter().map(Design::depth).max().unwrap_or(0),
            Design::Cut { head, args, .. } => {
                head.depth().max(args.iter().map(Design::depth).max().unwrap_or(0))
            }
            Design::Neg(bs) => bs.values().map(|b| 1 + b.body.depth()).max().unwrap_or(0),
        }
    }

    pub fn all_vars(&self, out: &mut HashSet<Var>) {
        match self {
            Design::Daimon | Design::Omega => {}
            Design::App { head, args, .. } => {
                out.insert(head.clone());
                args.iter().for_each(|a| a.all_vars(out));
            }
            Design::Cut { head, args, .. } => {
                head.all_vars(out);
                args.iter().for_each(|a| a.all_vars(out));
            }
            Design::Neg(bs) => {
                for b in bs.values() {
                    out.extend(b.vars.iter().cloned());
                    b.body.all_vars(out);
                }
            }
        }
    }

    fn bound_vars(&self, out: &mut HashSet<Var>) {
        match self {
            Design::Daimon | Design::Omega => {}
            Design::App { args, .. } => args.iter().for_each(|a| a.bound_vars(out)),
            Design::Cut { head, args, .. } => {
                head.bound_vars(out);
                args.iter().for_each(|a| a.bound_vars(out));
            }
            Design::Neg(bs) => {
                for b in bs.values() {
                    out.extend(b.vars.iter().cloned());
                    b.body.bound_vars(out);
                }
            }
        }
    }
}

pub fn free_vars(d: &Design) -> VarSet {
    let mut out = VarSet::new();
    collect_fv(d, &mut Vec::new(), &mut out);
    out
}

fn collect_fv(d: &Design, bound: &mut Vec<Var>, out: &mut VarSet) {
    match d {
        Design::Daimon | Design::Omega => {}
        Design::App { head, args, .. } => {
            if !bound.contains(head) {
                out.insert(head.clone());
            }
            args.iter().for_each(|a| collect_fv(a, bound, out));
        }
        Design::Cut { head, args, .. } => {
            collect_fv(head, bound, out);
            args.iter().for_each(|a| collect_fv(a, bound, out));
        }
        Design::Neg(bs) => {
            for b in bs.values() {
                let n = bound.len();
                bound.extend(b.vars.iter().cloned());
                collect_fv(&b.body, bound, out);
                bound.truncate(n);
            }
        }
    }
}

pub fn classify(d: &Design) -> Classification {
    let fv = free_vars(d);
    let polarity = d.polarity();
    let atomic = match polarity {
        Polarity::Positive => fv.iter().all(|v| v == X0),
        Polarity::Negative => fv.is_empty(),
    };
    Classification { polarity, atomic, cut_free: d.is_cut_free() }
}

pub fn is_linear(d: &Design) -> bool {
    match d {
        Design::Daimon | Design::Omega => true,
        Design::App { head, args, .. } => {
            let mut sets = vec![std::iter::once(head.clone()).collect::<VarSet>()];
            sets.extend(args.iter().map(free_vars));
            pairwise_disjoint(&sets) && args.iter().all(is_linear)
        }
        Design::Cut { head, args, .. } => {
            let mut sets = vec![free_vars(head)];
            sets.extend(args.iter().map(free_vars));
            pairwise_disjoint(&sets) && is_linear(head) && args.iter().all(is_linear)
        }
        Design::Neg(bs) => bs.values().all(|b| is_linear(&b.body)),
    }
}

fn pairwise_disjoint(sets: &[VarSet]) -> bool {
    let mut seen = HashSet::new();
    sets.iter().all(|s| s.iter().all(|v| seen.insert(v.clone())))
}

/// Fresh names avoiding everything in `used`, drawn from a per-call counter.
pub struct Fresh {
    used: HashSet<Var>,
    next: usize,
}

impl Fresh {
    pub fn new(used: HashSet<Var>) -> Self {
        Fresh { used, next: 0 }
    }

    pub fn avoiding(ds: &[&Design]) -> Self {
        let mut used = HashSet::new();
        for d in ds {
            d.all_vars(&mut used);
        }
        used.insert(X0.to_string());
        Fresh::new(used)
    }

    pub fn var(&mut self) -> Var {
        loop {
            self.next += 1;
            let v = format!("v{}", self.next);
            if self.used.insert(v.clone()) {
                return v;
            }
        }
    }
}

/// Simultaneous capture-avoiding substitution of negative designs for variables.
pub fn substitute(d: &Design, bindings: &BTreeMap<Var, Design>) -> Result<Design> {
    let fv = free_vars(d);
    let mut bv = HashSet::new();
    d.bound_vars(&mut bv);
    for k in bindings.keys() {
        if !fv.contains(k) && bv.contains(k) {
            return Err(Error::BoundBinding(k.clone()));
        }
    }
    let live: HashMap<Var, Design> =
        bindings.iter().filter(|(k, _)| fv.contains(*k)).map(|(k, v)| (k.clone(), v.clone())).collect();
    if live.is_empty() {
        return Ok(d.clone());
    }
    let mut refs: Vec<&Design> = vec![d];
    refs.extend(live.values());
    let mut fresh = Fresh::avoiding(&refs);
    let image_fv: HashSet<Var> = live.values().flat_map(free_vars).collect();
    Ok(subst(d, &live, &image_fv, &mut fresh))
}

/// Substitution without precondition checks; `image_fv` holds the free variables of all images.
pub(crate) fn subst(
    d: &Design,
    sigma: &HashMap<Var, Design>,
    image_fv: &HashSet<Var>,
    fresh: &mut Fresh,
) -> Design {
    match d {
        Design::Daimon | Design::Omega => d.clone(),
        Design::App { head, name, args } => {
            let args = args.iter().map(|a| subst(a, sigma, image_fv, fresh)).collect();
            match sigma.get(head) {
                Some(n) => Design::Cut { head: Box::new(n.clone()), name: name.clone(), args },
                None => Design::App { head: head.clone(), name: name.clone(), args },
            }
        }
        Design::Cut { head, name, args } => Design::Cut {
            head: Box::new(subst(head, sigma, image_fv, fresh)),
            name: name.clone(),
            args: args.iter().map(|a| subst(a, sigma, image_fv, fresh)).collect(),
        },
        Design::Neg(bs) => {
            let mut out = BTreeMap::new();
            for (n, b) in bs {
                if b.vars.iter().any(|v| sigma.contains_key(v)) {
                    let mut inner = sigma.clone();
                    b.vars.iter().for_each(|v| {
                        inner.remove(v);
                    });
                    out.insert(n.clone(), subst_branch(b, &inner, image_fv, fresh));
                } else {
                    out.insert(n.clone(), subst_branch(b, sigma, image_fv, fresh));
                }
            }
            Design::Neg(out)
        }
    }
}

fn subst_branch(b: &Branch, sigma: &HashMap<Var, Design>, image_fv: &HashSet<Var>, fresh: &mut Fresh) -> Branch {
    if sigma.is_empty() {
        return b.clone();
    }
    let mut vars = b.vars.clone();
    let mut body = b.body.clone();
    for v in vars.iter_mut() {
        if image_fv.contains(v) {
            let w = fresh.var();
            body = rename(&body, v, &w);
            *v = w;
        }
    }
    Branch { vars, body: subst(&body, sigma, image_fv, fresh) }
}

/// Rename free occurrences of `from` to `to`; `to` must not be bound in `d`.
pub fn rename(d: &Design, from: &str, to: &str) -> Design {
    match d {
        Design::Daimon | Design::Omega => d.clone(),
        Design::App { head, name, args } => Design::App {
            head: if head == from { to.to_string() } else { head.clone() },
            name: name.clone(),
            args: args.iter().map(|a| rename(a, from, to)).collect(),
        },
        Design::Cut { head, name, args } => Design::Cut {
            head: Box::new(rename(head, from, to)),
            name: name.clone(),
            args: args.iter().map(|a| rename(a, from, to)).collect(),
        },
        Design::Neg(bs) => Design::Neg(
            bs.iter()
                .map(|(n, b)| {
                    let body = if b.vars.iter().any(|v| v == from) { b.body.clone() } else { rename(&b.body, from, to) };
                    (n.clone(), Branch { vars: b.vars.clone(), body })
                })
                .collect(),
        ),
    }
}

pub fn alpha_eq(d1: &Design, d2: &Design) -> bool {
    alpha(d1, d2, &mut Vec::new())
}

fn lookup<'a>(env: &'a [(Var, Var)], x: &str, left: bool) -> Option<&'a str> {
    env.iter().rev().find_map(|(a, b)| {
        if left && a == x {
            Some(b.as_str())
        } else if !left && b == x {
            Some(a.as_str())
        } else {
            None
        }
    })
}

fn alpha(d1: &Design, d2: &Design, env: &mut Vec<(Var, Var)>) -> bool {
    match (d1, d2) {
        (Design::Daimon, Design::Daimon) | (Design::Omega, Design::Omega) => true,
        (Design::App { head: h1, name: n1, args: a1 }, Design::App { head: h2, name: n2, args: a2 }) => {
            let heads = match (lookup(env, h1, true), lookup(env, h2, false)) {
                (Some(x), Some(y)) => x == h2 && y == h1,
                (None, None) => h1 == h2,
                _ => false,
            };
            heads && n1 == n2 && a1.len() == a2.len() && a1.iter().zip(a2).all(|(x, y)| alpha(x, y, env))
        }
        (Design::Cut { head: h1, name: n1, args: a1 }, Design::Cut { head: h2, name: n2, args: a2 }) => {
            n1 == n2
                && alpha(h1, h2, env)
                && a1.len() == a2.len()
                && a1.iter().zip(a2).all(|(x, y)| alpha(x, y, env))
        }
        (Design::Neg(b1), Design::Neg(b2)) => {
            // an explicit Ω branch is the same as an absent one
            let live = |m: &'_ BTreeMap<Name, Branch>| -> Vec<(Name, Branch)> {
                m.iter().filter(|(_, b)| b.body != Design::Omega).map(|(n, b)| (n.clone(), b.clone())).collect()
            };
            let (b1, b2) = (live(b1), live(b2));
            b1.len() == b2.len()
                && b1.iter().zip(&b2).all(|((n1, x), (n2, y))| {
                    if n1 != n2 || x.vars.len() != y.vars.len() {
                        return false;
                    }
                    let k = env.len();
                    env.extend(x.vars.iter().cloned().zip(y.vars.iter().cloned()));
                    let ok = alpha(&x.body, &y.body, env);
                    env.truncate(k);
                    ok
                })
        }
        _ => false,
    }
}

/// Alpha-canonical copy: bound variables renamed `_1`, `_2`, ... in traversal order.
pub fn canonical(d: &Design) -> Design {
    let mut n = 0;
    canon(d, &mut Vec::new(), &mut n)
}

fn canon(d: &Design, env: &mut Vec<(Var, Var)>, n: &mut usize) -> Design {
    let look = |env: &Vec<(Var, Var)>, x: &Var| {
        env.iter().rev().find(|(a, _)| a == x).map(|(_, b)| b.clone()).unwrap_or_else(|| x.clone())
    };
    match d {
        Design::Daimon | Design::Omega => d.clone(),
        Design::App { head, name, args } => Design::App {
            head: look(env, head),
            name: name.clone(),
            args: args.iter().map(|a| canon(a, env, n)).collect(),
        },
        Design::Cut { head, name, args } => Design::Cut {
            head: Box::new(canon(head, env, n)),
            name: name.clone(),
            args: args.iter().map(|a| canon(a, env, n)).collect(),
        },
        Design::Neg(bs) => Design::Neg(
            bs.iter()
                .map(|(name, b)| {
                    let k = env.len();
                    let vars: Vec<Var> = b
                        .vars
                        .iter()
                        .map(|v| {
                            *n += 1;
                            let w = format!("_{}", n);
                            env.push((v.clone(), w.clone()));
                            w
                        })
                        .collect();
                    let body = canon(&b.body, env, n);
                    env.truncate(k);
                    (name.clone(), Branch { vars, body })
                })
                .collect(),
        ),
    }
}

// ---------------------------------------------------------------------------
// Concrete syntax

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Int(usize),
    Sym(char),
    Empty,
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c == '-' && chars.get(i + 1) == Some(&'-') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
        } else if c == '{' && chars.get(i + 1) == Some(&'}') {
            out.push((Tok::Empty, i));
            i += 2;
        } else if c.is_ascii_digit() {
            let s = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let t: String = chars[s..i].iter().collect();
            out.push((Tok::Int(t.parse().map_err(|_| Error::Parse(format!("bad integer {t}")))?), s));
        } else if c.is_alphabetic() || c == '_' && chars.get(i + 1).is_some_and(|d| d.is_alphanumeric()) {
            let s = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '\'') {
                i += 1;
                // dotted loci such as x0.1.2
                while i + 1 < chars.len() && chars[i] == '.' && chars[i + 1].is_ascii_digit() {
                    i += 1;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            out.push((Tok::Ident(chars[s..i].iter().collect()), s));
        } else if "#_|<>,{}()[].+/;".contains(c) {
            out.push((Tok::Sym(c), i));
            i += 1;
        } else {
            return Err(Error::Parse(format!("unexpected character '{c}' at offset {i}")));
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug)]
pub struct ParseOptions {
    pub strict_linear: bool,
}

impl Default for ParseOptions {
    fn default() -> Self {
        ParseOptions { strict_linear: true }
    }
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.pos + k).map(|t| &t.0)
    }

    fn err<T>(&self, what: &str) -> Result<T> {
        let at = self.toks.get(self.pos).map(|t| t.1.to_string()).unwrap_or_else(|| "end".into());
        Err(Error::Parse(format!("expected {what} at {at}")))
    }

    fn sym(&mut self, c: char) -> Result<()> {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(&format!("'{c}'"))
        }
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn ident(&mut self) -> Result<String> {
        match self.peek().cloned() {
            Some(Tok::Ident(s)) => {
                self.pos += 1;
                Ok(s)
            }
            _ => self.err("identifier"),
        }
    }

    fn design(&mut self) -> Result<Design> {
        if self.starts_neg() {
            self.neg()
        } else {
            self.pos_design()
        }
    }

    // a negative design starts with `{}`, `NAME (` or a parenthesised negative
    fn starts_neg(&self) -> bool {
        let mut k = 0;
        while self.peek_at(k) == Some(&Tok::Sym('(')) {
            k += 1;
        }
        match (self.peek_at(k), self.peek_at(k + 1)) {
            (Some(Tok::Empty), _) => true,
            (Some(Tok::Ident(_)), Some(Tok::Sym('('))) => true,
            _ => false,
        }
    }

    fn pos_design(&mut self) -> Result<Design> {
        match self.peek().cloned() {
            Some(Tok::Sym('#')) => {
                self.pos += 1;
                Ok(Design::Daimon)
            }
            Some(Tok::Sym('_')) => {
                self.pos += 1;
                Ok(Design::Omega)
            }
            Some(Tok::Sym('(')) => {
                self.pos += 1;
                let d = self.pos_design()?;
                self.sym(')')?;
                Ok(d)
            }
            Some(Tok::Sym('[')) => {
                self.pos += 1;
                let head = self.neg()?;
                self.sym(']')?;
                let (name, args) = self.action_tail()?;
                Ok(Design::Cut { head: Box::new(head), name, args })
            }
            Some(Tok::Ident(_)) => {
                let head = self.ident()?;
                let (name, args) = self.action_tail()?;
                Ok(Design::App { head, name, args })
            }
            _ => self.err("positive design"),
        }
    }

    fn action_tail(&mut self) -> Result<(Name, Vec<Design>)> {
        self.sym('|')?;
        let name = self.ident()?;
        self.sym('<')?;
        let mut args = Vec::new();
        if !self.eat('>') {
            loop {
                args.push(self.neg()?);
                if self.eat('>') {
                    break;
                }
                self.sym(',')?;
            }
        }
        Ok((name, args))
    }

    fn neg(&mut self) -> Result<Design> {
        if self.peek() == Some(&Tok::Empty) {
            self.pos += 1;
            return Ok(Design::empty_neg());
        }
        if self.peek() == Some(&Tok::Sym('(')) {
            self.pos += 1;
            let d = self.neg()?;
            self.sym(')')?;
            return Ok(d);
        }
        let mut bs = BTreeMap::new();
        loop {
            let name = self.ident()?;
            self.sym('(')?;
            let mut vars = Vec::new();
            if !self.eat(')') {
                loop {
                    vars.push(self.ident()?);
                    if self.eat(')') {
                        break;
                    }
                    self.sym(',')?;
                }
            }
            self.sym('.')?;
            let body = self.pos_design()?;
            if bs.insert(name.clone(), Branch { vars, body }).is_some() {
                return Err(Error::Parse(format!("branch '{name}' appears twice in a sum")));
            }
            if !self.eat('+') {
                break;
            }
        }
        Ok(Design::Neg(bs))
    }

    fn done(&self) -> Result<()> {
        if self.pos == self.toks.len() {
            Ok(())
        } else {
            self.err("end of input")
        }
    }
}

fn binds_x0(d: &Design) -> bool {
    match d {
        Design::Daimon | Design::Omega => false,
        Design::App { args, .. } => args.iter().any(binds_x0),
        Design::Cut { head, args, .. } => binds_x0(head) || args.iter().any(binds_x0),
        Design::Neg(bs) => bs.values().any(|b| b.vars.iter().any(|v| v == X0) || binds_x0(&b.body)),
    }
}

fn check_design(d: &Design, sig: &Signature, opts: ParseOptions) -> Result<()> {
    sig.check(d)?;
    if binds_x0(d) {
        return Err(Error::Parse("x0 cannot be bound".into()));
    }
    if opts.strict_linear && !is_linear(d) {
        return Err(Error::NonLinear(render_design(d)));
    }
    Ok(())
}

/// Parse a bare design against a signature.
pub fn parse_design(text: &str, sig: &Signature) -> Result<Design> {
    parse_design_with(text, sig, ParseOptions::default())
}

pub fn parse_design_with(text: &str, sig: &Signature, opts: ParseOptions) -> Result<Design> {
    let mut p = Parser { toks: lex(text)?, pos: 0 };
    let d = p.design()?;
    p.done()?;
    check_design(&d, sig, opts)?;
    Ok(d)
}

/// Parse a design, declaring its names from their use sites.
pub fn parse_design_infer(text: &str, sig: &mut Signature) -> Result<Design> {
    let mut p = Parser { toks: lex(text)?, pos: 0 };
    let d = p.design()?;
    p.done()?;
    sig.absorb(&d)?;
    check_design(&d, sig, ParseOptions::default())?;
    Ok(d)
}

/// Parse a `.lud` file: an optional `sig a/n ... ;` header then a design.
pub fn parse_file(text: &str) -> Result<(Signature, Design)> {
    parse_file_with(text, ParseOptions::default())
}

pub fn parse_file_with(text: &str, opts: ParseOptions) -> Result<(Signature, Design)> {
    let mut p = Parser { toks: lex(text)?, pos: 0 };
    let sig = parse_sig_header(&mut p)?;
    let d = p.design()?;
    p.done()?;
    check_design(&d, &sig, opts)?;
    Ok((sig, d))
}

fn parse_sig_header(p: &mut Parser) -> Result<Signature> {
    let mut sig = Signature::new();
    if p.peek() == Some(&Tok::Ident("sig".into())) && p.peek_at(2) == Some(&Tok::Sym('/')) {
        p.pos += 1;
        loop {
            let name = p.ident()?;
            p.sym('/')?;
            let k = match p.peek().cloned() {
                Some(Tok::Int(k)) => {
                    p.pos += 1;
                    k
                }
                _ => return p.err("arity"),
            };
            sig.declare(&name, k)?;
            if p.eat(';') {
                break;
            }
        }
    }
    Ok(sig)
}

/// Parse design text, with or without a `sig` header.
///
/// Without a header the names are declared from their use sites.
pub fn parse_any(text: &str) -> Result<(Signature, Design)> {
    if text.trim_start().starts_with("sig ") {
        return parse_file(text);
    }
    let mut sig = Signature::new();
    let d = parse_design_infer(text, &mut sig)?;
    Ok((sig, d))
}

/// Parse a signature header alone, e.g. `sig b/0 c/1 ;`.
pub fn parse_signature(text: &str) -> Result<Signature> {
    let mut p = Parser { toks: lex(text)?, pos: 0 };
    let sig = parse_sig_header(&mut p)?;
    p.done()?;
    Ok(sig)
}

pub fn render_signature(sig: &Signature) -> String {
    let user: Vec<String> =
        sig.names().filter(|(n, _)| !Signature::is_reserved(n)).map(|(n, k)| format!("{n}/{k}")).collect();
    if user.is_empty() {
        String::new()
    } else {
        format!("sig {} ;", user.join(" "))
    }
}

pub fn render_design(d: &Design) -> String {
    let mut s = String::new();
    write_design(d, &mut s);
    s
}

fn write_design(d: &Design, out: &mut String) {
    match d {
        Design::Daimon => out.push('#'),
        Design::Omega => out.push('_'),
        Design::App { head, name, args } => {
            out.push_str(head);
            write_tail(name, args, out);
        }
        Design::Cut { head, name, args } => {
            out.push('[');
            write_design(head, out);
            out.push(']');
            write_tail(name, args, out);
        }
        Design::Neg(bs) if bs.is_empty() => out.push_str("{}"),
        Design::Neg(bs) => {
            for (i, (n, b)) in bs.iter().enumerate() {
                if i > 0 {
                    out.push_str(" + ");
                }
                out.push_str(n);
                out.push('(');
                out.push_str(&b.vars.join(","));
                out.push_str(").");
                let paren = matches!(b.body, Design::App { .. } | Design::Cut { .. });
                if paren {
                    out.push('(');
                }
                write_design(&b.body, out);
                if paren {
                    out.push(')');
                }
            }
        }
    }
}

fn write_tail(name: &str, args: &[Design], out: &mut String) {
    out.push('|');
    out.push_str(name);
    out.push('<');
    for (i, a) in args.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        write_design(a, out);
    }
    out.push('>');
}

impl fmt::Display for Design {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_design(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Design {
        parse_design_infer(s, &mut Signature::new()).unwrap()
    }

    #[test]
    fn literals() {
        assert_eq!(p("#"), Design::Daimon);
        assert_eq!(p("_"), Design::Omega);
        assert_eq!(p("x0 | b<>"), Design::app("x0", "b", vec![]));
        assert_eq!(p("{}"), Design::empty_neg());
    }

    #[test]
    fn tree_example_roundtrip() {
        let src = "a(x1,x2).(x2 | b<a(x3,x4).# + c(y1).(y1|d<>), c(y2).(x1|d<>)>)";
        let d = p(src);
        assert!(classify(&d).atomic);
        let again = p(&render_design(&d));
        assert!(alpha_eq(&d, &again));
        let sub = p("a(x1,x2).(x2 | b<{}, c(y).(y|d<>)>)");
        match sub {
            Design::Neg(bs) => assert_eq!(bs.len(), 1),
            _ => panic!(),
        }
    }

    #[test]
    fn fv() {
        assert!(free_vars(&p("#")).is_empty());
        assert_eq!(free_vars(&p("x0 | b<>")).into_iter().collect::<Vec<_>>(), vec!["x0".to_string()]);
        assert_eq!(free_vars(&p("a(x).(y|b<>)")).into_iter().collect::<Vec<_>>(), vec!["y".to_string()]);
    }

    #[test]
    fn substitution_examples() {
        let mut m = BTreeMap::new();
        m.insert("x0".to_string(), p("b().#"));
        assert_eq!(substitute(&p("x0|b<>"), &m).unwrap(), Design::cut(p("b().#"), "b", vec![]));
        let n = p("c(y).(y|d<>)");
        let mut m = BTreeMap::new();
        m.insert("x".to_string(), n.clone());
        assert_eq!(substitute(&p("x|c<{}>"), &m).unwrap(), Design::cut(n, "c", vec![Design::empty_neg()]));
        assert_eq!(substitute(&Design::Daimon, &m).unwrap(), Design::Daimon);
    }

    #[test]
    fn capture_is_avoided() {
        // substituting a design with free y under a binder named y
        let d = p("a(y).(x|b<c().(y|e<>)>)");
        let mut m = BTreeMap::new();
        m.insert("x".to_string(), p("b(z).(y|f<>)"));
        let r = substitute(&d, &m).unwrap();
        let fv = free_vars(&r);
        assert!(fv.contains("y"));
        match &r {
            Design::Neg(bs) => assert_ne!(bs["a"].vars[0], "y"),
            _ => panic!(),
        }
    }

    #[test]
    fn binding_bound_variable_is_an_error() {
        let mut m = BTreeMap::new();
        m.insert("y".to_string(), p("{}"));
        assert!(substitute(&p("a(y).(y|b<>)"), &m).is_err());
    }

    #[test]
    fn linearity() {
        assert!(is_linear(&p("x0|a<{}, {}>")));
        let opts = ParseOptions { strict_linear: false };
        let mut sig = Signature::new();
        sig.declare("a", 2).unwrap();
        sig.declare("c", 1).unwrap();
        sig.declare("d", 0).unwrap();
        let d1 = parse_design_with("x0|a<c(y).(x0|d<>) , {}>", &sig, opts).unwrap();
        assert!(!is_linear(&d1));
        let d2 = parse_design_with("x0|a<c(y).(z|d<>), c(y).(z|d<>)>", &sig, opts).unwrap();
        assert!(!is_linear(&d2));
        assert!(parse_design("x0|a<c(y).(x0|d<>) , {}>", &sig).is_err());
    }

    #[test]
    fn alpha() {
        assert!(alpha_eq(&p("a(x).(x|b<>)"), &p("a(z).(z|b<>)")));
        assert!(!alpha_eq(&p("a(x).(x|b<>)"), &p("a(x).(x|d<>)")));
        assert!(!alpha_eq(&p("a(x).(x|b<>)"), &p("a(z).(x|b<>)")));
    }

    #[test]
    fn classification() {
        let c = classify(&Design::Daimon);
        assert!(c.polarity == Polarity::Positive && c.atomic && c.cut_free);
        let c = classify(&Design::cut(p("b().#"), "b", vec![]));
        assert!(c.atomic && !c.cut_free);
        let c = classify(&p("a(x).#"));
        assert!(c.polarity == Polarity::Negative && c.atomic);
    }

    #[test]
    fn signature_errors() {
        let sig = Signature::with(&[("b", 0)]).unwrap();
        assert!(matches!(parse_design("x0|c<>", &sig), Err(Error::Undeclared(_))));
        assert!(matches!(parse_design("x0|b<{}>", &sig), Err(Error::Arity { .. })));
        assert!(parse_design("b(x0).#", &sig).is_err());
        let (sig, d) = parse_file("-- constant\nsig b/0 ; x0|b<>").unwrap();
        assert_eq!(sig.arity("b"), Some(0));
        assert_eq!(d, Design::app("x0", "b", vec![]));
    }
}
