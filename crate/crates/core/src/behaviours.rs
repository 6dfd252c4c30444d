//! Behaviours given by constructor trees: incarnations, visitable paths and the
//! regularity and purity checks, all computed up to explicit bounds.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::compact::{from_seq, name_id, to_seq, CAct, CTree, End, Flow, Locus, PathSet, Shuffler, Side};
use crate::error::{Error, Result};
use crate::paths::{trivial_view_indices, well_bracketed_ok, Seq};
use crate::reduction::{normalize, obs_leq, DEFAULT_FUEL};
use crate::syntax::{classify, rename, Design, Polarity, Signature, P1, P2, PR, VAL, X0};

/// Largest number of designs the orthogonal enumeration may produce.
pub const ENUM_BUDGET: usize = 500_000;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BehaviourExpr {
    Const { name: String, arity: usize },
    Daimon,
    Up(Box<BehaviourExpr>),
    Down(Box<BehaviourExpr>),
    Plus(Box<BehaviourExpr>, Box<BehaviourExpr>),
    Tensor(Box<BehaviourExpr>, Box<BehaviourExpr>),
    Limp(Box<BehaviourExpr>, Box<BehaviourExpr>),
    /// One side of a sum: `{✠} ∪ ι_i⟨N⟩`.
    Inj(u8, Box<BehaviourExpr>),
    Orth(Box<BehaviourExpr>),
    Var(String),
    /// Kleene approximant: `body` iterated `level` times from `seed`; `None` takes the level of the query.
    Mu { var: String, body: Box<BehaviourExpr>, level: Option<usize>, seed: Box<BehaviourExpr> },
    /// The behaviour relocated at variable `var` instead of `x0`.
    Deloc(Box<BehaviourExpr>, String),
}

use BehaviourExpr as B;

pub fn const_behaviour(a: &str) -> Result<BehaviourExpr> {
    const_with_arity(a, 0)
}

pub fn const_with_arity(a: &str, arity: usize) -> Result<BehaviourExpr> {
    if Signature::is_reserved(a) {
        return Err(Error::Reserved(a.to_string()));
    }
    if arity > Locus::MAX_DIGIT {
        return Err(Error::Unsupported(format!("arity {arity} is too large")));
    }
    Ok(B::Const { name: a.to_string(), arity })
}

pub fn up(n: BehaviourExpr) -> BehaviourExpr {
    B::Up(Box::new(n))
}

pub fn down(p: BehaviourExpr) -> BehaviourExpr {
    B::Down(Box::new(p))
}

pub fn plus(m: BehaviourExpr, n: BehaviourExpr) -> BehaviourExpr {
    B::Plus(Box::new(m), Box::new(n))
}

pub fn tensor(m: BehaviourExpr, n: BehaviourExpr) -> BehaviourExpr {
    B::Tensor(Box::new(m), Box::new(n))
}

pub fn limp(n: BehaviourExpr, p: BehaviourExpr) -> BehaviourExpr {
    B::Limp(Box::new(n), Box::new(p))
}

pub fn orth(b: BehaviourExpr) -> BehaviourExpr {
    B::Orth(Box::new(b))
}

pub fn inj(i: u8, n: BehaviourExpr) -> BehaviourExpr {
    B::Inj(i, Box::new(n))
}

/// `P ⊕⁺ Q = ↓P ⊕ ↓Q`
pub fn plus_pos(p: BehaviourExpr, q: BehaviourExpr) -> BehaviourExpr {
    plus(down(p), down(q))
}

/// `P ⊗⁺ Q = ↓P ⊗ ↓Q`
pub fn tensor_pos(p: BehaviourExpr, q: BehaviourExpr) -> BehaviourExpr {
    tensor(down(p), down(q))
}

/// `P ⊸⁺ Q = ↑(↓P ⊸ Q)`
pub fn limp_pos(p: BehaviourExpr, q: BehaviourExpr) -> BehaviourExpr {
    up(limp(down(p), q))
}

impl BehaviourExpr {
    pub fn polarity(&self) -> Polarity {
        match self {
            B::Down(_) | B::Limp(..) => Polarity::Negative,
            B::Orth(b) => match b.polarity() {
                Polarity::Positive => Polarity::Negative,
                Polarity::Negative => Polarity::Positive,
            },
            B::Deloc(b, _) => b.polarity(),
            _ => Polarity::Positive,
        }
    }

    pub fn is_positive(&self) -> bool {
        self.polarity() == Polarity::Positive
    }

    /// Polarity discipline of the constructors.
    pub fn validate(&self) -> Result<()> {
        let want = |b: &B, pol: Polarity, what: &str| -> Result<()> {
            b.validate()?;
            if b.polarity() != pol {
                return Err(Error::Unsupported(format!("{what} expects a {} operand, got {b}", pol_word(pol))));
            }
            Ok(())
        };
        match self {
            B::Const { name, arity } => {
                if Signature::is_reserved(name) {
                    return Err(Error::Reserved(name.clone()));
                }
                if *arity > Locus::MAX_DIGIT {
                    return Err(Error::Unsupported(format!("arity {arity} is too large")));
                }
                Ok(())
            }
            B::Daimon | B::Var(_) => Ok(()),
            B::Up(n) => want(n, Polarity::Negative, "up"),
            B::Down(p) => want(p, Polarity::Positive, "down"),
            B::Plus(m, n) | B::Tensor(m, n) => {
                want(m, Polarity::Negative, "sum and tensor")?;
                want(n, Polarity::Negative, "sum and tensor")
            }
            B::Limp(n, p) => {
                want(n, Polarity::Negative, "linear map")?;
                want(p, Polarity::Positive, "linear map")
            }
            B::Inj(i, n) => {
                if !(1..=2).contains(i) {
                    return Err(Error::Unsupported(format!("injection {i}")));
                }
                want(n, Polarity::Negative, "injection")
            }
            B::Orth(b) => b.validate(),
            B::Mu { body, seed, .. } => {
                want(body, Polarity::Positive, "mu")?;
                want(seed, Polarity::Positive, "mu seed")
            }
            B::Deloc(b, v) => {
                if v == X0 {
                    return Err(Error::Unsupported("delocation onto x0".into()));
                }
                b.validate()
            }
        }
    }

    /// Replace free occurrences of a variable.
    pub fn subst(&self, x: &str, by: &BehaviourExpr) -> BehaviourExpr {
        let s = |b: &B| Box::new(b.subst(x, by));
        match self {
            B::Var(v) if v == x => by.clone(),
            B::Const { .. } | B::Daimon | B::Var(_) => self.clone(),
            B::Up(n) => B::Up(s(n)),
            B::Down(n) => B::Down(s(n)),
            B::Orth(n) => B::Orth(s(n)),
            B::Inj(i, n) => B::Inj(*i, s(n)),
            B::Plus(a, b) => B::Plus(s(a), s(b)),
            B::Tensor(a, b) => B::Tensor(s(a), s(b)),
            B::Limp(a, b) => B::Limp(s(a), s(b)),
            B::Deloc(a, v) => B::Deloc(s(a), v.clone()),
            B::Mu { var, body, level, seed } => B::Mu {
                var: var.clone(),
                body: if var == x { body.clone() } else { s(body) },
                level: *level,
                seed: s(seed),
            },
        }
    }

    /// Expand every fixed point into its approximant. Levels left open take `level`.
    pub fn unfold(&self, level: usize) -> Result<BehaviourExpr> {
        let u = |b: &B| b.unfold(level).map(Box::new);
        Ok(match self {
            B::Const { .. } | B::Daimon => self.clone(),
            B::Var(v) => return Err(Error::Pattern(format!("unbound variable {v}"))),
            B::Up(n) => B::Up(u(n)?),
            B::Down(n) => B::Down(u(n)?),
            B::Orth(n) => B::Orth(u(n)?),
            B::Inj(i, n) => B::Inj(*i, u(n)?),
            B::Plus(a, b) => B::Plus(u(a)?, u(b)?),
            B::Tensor(a, b) => B::Tensor(u(a)?, u(b)?),
            B::Limp(a, b) => B::Limp(u(a)?, u(b)?),
            B::Deloc(a, v) => B::Deloc(u(a)?, v.clone()),
            B::Mu { var, body, level: lv, seed } => {
                let k = lv.unwrap_or(level);
                if k == 0 {
                    seed.unfold(level)?
                } else {
                    let prev = B::Mu { var: var.clone(), body: body.clone(), level: Some(k - 1), seed: seed.clone() };
                    body.subst(var, &prev).unfold(level)?
                }
            }
        })
    }

    /// Constant names, with arities, occurring in the expression.
    pub fn constants(&self) -> BTreeSet<(String, usize)> {
        let mut out = BTreeSet::new();
        self.collect_constants(&mut out);
        out
    }

    fn collect_constants(&self, out: &mut BTreeSet<(String, usize)>) {
        match self {
            B::Const { name, arity } => {
                out.insert((name.clone(), *arity));
            }
            B::Daimon | B::Var(_) => {}
            B::Up(n) | B::Down(n) | B::Orth(n) | B::Inj(_, n) | B::Deloc(n, _) => n.collect_constants(out),
            B::Plus(a, b) | B::Tensor(a, b) | B::Limp(a, b) => {
                a.collect_constants(out);
                b.collect_constants(out);
            }
            B::Mu { body, seed, .. } => {
                body.collect_constants(out);
                seed.collect_constants(out);
            }
        }
    }

    /// Reserved names plus the constants of the expression.
    pub fn signature(&self) -> Signature {
        let mut sig = Signature::new();
        for (n, k) in self.constants() {
            // constants were validated as non-reserved; a clash of arities is reported by `declare`
            let _ = sig.declare(&n, k);
        }
        sig
    }
}

fn pol_word(p: Polarity) -> &'static str {
    match p {
        Polarity::Positive => "positive",
        Polarity::Negative => "negative",
    }
}

impl fmt::Display for BehaviourExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            B::Const { name, arity: 0 } => write!(f, "C {name}"),
            B::Const { name, arity } => write!(f, "C {name}/{arity}"),
            B::Daimon => write!(f, "dai"),
            B::Up(n) => write!(f, "up({n})"),
            B::Down(n) => write!(f, "down({n})"),
            B::Orth(n) => write!(f, "orth({n})"),
            B::Inj(i, n) => write!(f, "inj{i}({n})"),
            B::Plus(a, b) => write!(f, "({a} (+) {b})"),
            B::Tensor(a, b) => write!(f, "({a} (x) {b})"),
            B::Limp(a, b) => write!(f, "({a} -o {b})"),
            B::Var(v) => write!(f, "{v}"),
            B::Mu { var, body, level, seed } => {
                write!(f, "mu {var}")?;
                let dai = **seed == B::Daimon;
                match (level, dai) {
                    (None, true) => {}
                    (Some(k), true) => write!(f, "[{k}]")?,
                    (None, false) => write!(f, "[; {seed}]")?,
                    (Some(k), false) => write!(f, "[{k}; {seed}]")?,
                }
                write!(f, ". {body}")
            }
            B::Deloc(b, v) => write!(f, "deloc({b}, {v})"),
        }
    }
}

// ---------------------------------------------------------------------------
// Parsing

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Int(usize),
    Sym(&'static str),
    Braced(String),
}

fn lex(text: &str) -> Result<Vec<Tok>> {
    let cs: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < cs.len() {
        let c = cs[i];
        let rest: String = cs[i..cs.len().min(i + 3)].iter().collect();
        if c.is_whitespace() {
            i += 1;
        } else if rest == "(+)" || rest == "(x)" || rest == "(*)" {
            out.push(Tok::Sym(if rest == "(+)" { "(+)" } else { "(x)" }));
            i += 3;
        } else if rest.starts_with("-o") {
            out.push(Tok::Sym("-o"));
            i += 2;
        } else if c == '{' {
            let mut depth = 0;
            let start = i + 1;
            while i < cs.len() {
                match cs[i] {
                    '{' => depth += 1,
                    '}' => {
                        depth -= 1;
                        if depth == 0 {
                            break;
                        }
                    }
                    _ => {}
                }
                i += 1;
            }
            if i >= cs.len() {
                return Err(Error::Parse("unclosed '{'".into()));
            }
            out.push(Tok::Braced(cs[start..i].iter().collect()));
            i += 1;
        } else if c.is_ascii_digit() {
            let s = i;
            while i < cs.len() && cs[i].is_ascii_digit() {
                i += 1;
            }
            let t: String = cs[s..i].iter().collect();
            out.push(Tok::Int(t.parse().map_err(|_| Error::Parse(format!("bad integer {t}")))?));
        } else if c.is_alphabetic() || c == '_' {
            let s = i;
            while i < cs.len() && (cs[i].is_alphanumeric() || cs[i] == '_' || cs[i] == '\'') {
                i += 1;
            }
            out.push(Tok::Ident(cs[s..i].iter().collect()));
        } else {
            let sym = match c {
                '(' => "(",
                ')' => ")",
                '[' => "[",
                ']' => "]",
                ';' => ";",
                '.' => ".",
                ',' => ",",
                '/' => "/",
                _ => return Err(Error::Parse(format!("unexpected character '{c}' in behaviour"))),
            };
            out.push(Tok::Sym(sym));
            i += 1;
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn eat(&mut self, s: &str) -> bool {
        if self.peek() == Some(&Tok::Sym(match s {
            "(" => "(",
            ")" => ")",
            "[" => "[",
            "]" => "]",
            ";" => ";",
            "." => ".",
            "," => ",",
            "/" => "/",
            "(+)" => "(+)",
            "(x)" => "(x)",
            "-o" => "-o",
            _ => return false,
        })) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, s: &str) -> Result<()> {
        if self.eat(s) {
            Ok(())
        } else {
            Err(Error::Parse(format!("expected '{s}' in behaviour expression")))
        }
    }

    fn ident(&mut self) -> Result<String> {
        match self.toks.get(self.pos).cloned() {
            Some(Tok::Ident(s)) => {
                self.pos += 1;
                Ok(s)
            }
            _ => Err(Error::Parse("expected a name in behaviour expression".into())),
        }
    }

    fn expr(&mut self) -> Result<B> {
        let lhs = self.sum()?;
        if self.eat("-o") {
            let rhs = self.expr()?;
            return Ok(limp(lhs, rhs));
        }
        Ok(lhs)
    }

    fn sum(&mut self) -> Result<B> {
        let mut acc = self.atom()?;
        loop {
            if self.eat("(+)") {
                acc = plus(acc, self.atom()?);
            } else if self.eat("(x)") {
                acc = tensor(acc, self.atom()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self, f: fn(B) -> B) -> Result<B> {
        self.expect("(")?;
        let e = self.expr()?;
        self.expect(")")?;
        Ok(f(e))
    }

    fn atom(&mut self) -> Result<B> {
        match self.toks.get(self.pos).cloned() {
            Some(Tok::Sym("(")) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(")")?;
                Ok(e)
            }
            Some(Tok::Braced(text)) => {
                self.pos += 1;
                let pat = crate::datatypes::parse_pattern(&text)?;
                crate::datatypes::interpret_open(&pat, &crate::datatypes::Env::new(), None)
            }
            Some(Tok::Ident(id)) => {
                self.pos += 1;
                match id.as_str() {
                    "dai" => Ok(B::Daimon),
                    "up" => self.unary(up),
                    "down" => self.unary(down),
                    "orth" => self.unary(orth),
                    "inj1" => self.unary(|e| inj(1, e)),
                    "inj2" => self.unary(|e| inj(2, e)),
                    "C" => {
                        let n = self.ident()?;
                        self.constant(&n)
                    }
                    "deloc" => {
                        self.expect("(")?;
                        let e = self.expr()?;
                        self.expect(",")?;
                        let v = self.ident()?;
                        self.expect(")")?;
                        Ok(B::Deloc(Box::new(e), v))
                    }
                    "mu" => {
                        let var = self.ident()?;
                        let mut level = None;
                        let mut seed = B::Daimon;
                        if self.eat("[") {
                            if let Some(Tok::Int(k)) = self.peek().cloned() {
                                self.pos += 1;
                                level = Some(k);
                            }
                            if self.eat(";") {
                                seed = self.expr()?;
                            }
                            self.expect("]")?;
                        }
                        self.expect(".")?;
                        let body = self.expr()?;
                        Ok(B::Mu { var, body: Box::new(body), level, seed: Box::new(seed) })
                    }
                    _ => match id.strip_prefix("C_") {
                        Some(n) if !n.is_empty() => self.constant(n),
                        _ => Ok(B::Var(id)),
                    },
                }
            }
            _ => Err(Error::Parse("unexpected end of behaviour expression".into())),
        }
    }

    fn constant(&mut self, n: &str) -> Result<B> {
        let mut arity = 0;
        if self.eat("/") {
            match self.toks.get(self.pos).cloned() {
                Some(Tok::Int(k)) => {
                    self.pos += 1;
                    arity = k;
                }
                _ => return Err(Error::Parse("expected an arity after '/'".into())),
            }
        }
        const_with_arity(n, arity)
    }
}

/// Parse a behaviour expression such as `up(down(C b)) (+) dai` or `{mu X. (n (+) X)}`.
pub fn parse_behaviour(text: &str) -> Result<BehaviourExpr> {
    let mut p = Parser { toks: lex(text)?, pos: 0 };
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(Error::Parse("trailing input in behaviour expression".into()));
    }
    e.validate()?;
    Ok(e)
}

// ---------------------------------------------------------------------------
// Caches

type VisKey = (BehaviourExpr, usize);

fn vis_cache() -> &'static Mutex<HashMap<VisKey, Arc<PathSet>>> {
    static C: OnceLock<Mutex<HashMap<VisKey, Arc<PathSet>>>> = OnceLock::new();
    C.get_or_init(Default::default)
}

fn inc_cache() -> &'static Mutex<HashMap<BehaviourExpr, Arc<Vec<CTree>>>> {
    static C: OnceLock<Mutex<HashMap<BehaviourExpr, Arc<Vec<CTree>>>>> = OnceLock::new();
    C.get_or_init(Default::default)
}

/// Drop all memoized incarnations and visitable paths.
pub fn clear_caches() {
    vis_cache().lock().unwrap().clear();
    inc_cache().lock().unwrap().clear();
}

/// Validate, unfold, and split off a top-level delocation.
fn prepare(b: &BehaviourExpr, level: usize) -> Result<(BehaviourExpr, Option<String>)> {
    b.validate()?;
    let u = b.unfold(level)?;
    match u {
        B::Deloc(inner, v) => Ok((*inner, Some(v))),
        other => Ok((other, None)),
    }
}

fn no_deloc(b: &BehaviourExpr) -> Result<()> {
    let err = || Err(Error::Unsupported("delocation is only supported at the top of an expression".into()));
    match b {
        B::Deloc(..) => err(),
        B::Const { .. } | B::Daimon | B::Var(_) => Ok(()),
        B::Up(n) | B::Down(n) | B::Orth(n) | B::Inj(_, n) => no_deloc(n),
        B::Plus(a, b) | B::Tensor(a, b) | B::Limp(a, b) => no_deloc(a).and(no_deloc(b)),
        B::Mu { body, seed, .. } => no_deloc(body).and(no_deloc(seed)),
    }
}

// ---------------------------------------------------------------------------
// Incarnations

fn kappa(kind: crate::paths::Kind, name: &str, arity: usize) -> CAct {
    CAct { kind, addr: Locus::ROOT, name: name_id(name), arity: arity as u8 }
}

fn daimon_tree() -> CTree {
    let mut t = CTree::default();
    t.add(None, CAct::DAIMON);
    t
}

fn graft(t: &mut CTree, parent: Option<u32>, src: &CTree, digit: usize) -> Result<()> {
    fn go(t: &mut CTree, parent: Option<u32>, src: &CTree, n: u32, digit: usize) -> Result<()> {
        let a = src.act(n).reloc(digit).ok_or_else(|| Error::Unsupported("design too deep".into()))?;
        let id = t.add(parent, a);
        for &c in &src.nodes[n as usize].children {
            go(t, Some(id), src, c, digit)?;
        }
        Ok(())
    }
    for &r in &src.roots {
        go(t, parent, src, r, digit)?;
    }
    Ok(())
}

/// A tree with one root action and relocated copies of `subs` below it.
fn wrap(root: CAct, subs: &[(&CTree, usize)]) -> Result<CTree> {
    let mut t = CTree::default();
    let r = t.add(None, root);
    for (s, d) in subs {
        graft(&mut t, Some(r), s, *d)?;
    }
    Ok(t)
}

fn inc(b: &BehaviourExpr) -> Result<Arc<Vec<CTree>>> {
    if let Some(v) = inc_cache().lock().unwrap().get(b) {
        return Ok(v.clone());
    }
    let v = Arc::new(inc_raw(b)?);
    inc_cache().lock().unwrap().insert(b.clone(), v.clone());
    Ok(v)
}

fn inc_raw(b: &BehaviourExpr) -> Result<Vec<CTree>> {
    use crate::paths::Kind::{Neg, Pos};
    let mut out = Vec::new();
    match b {
        B::Const { name, arity } => {
            out.push(daimon_tree());
            out.push(wrap(kappa(Pos, name, *arity), &[])?);
        }
        B::Daimon => out.push(daimon_tree()),
        B::Up(n) => {
            out.push(daimon_tree());
            for t in inc(n)?.iter() {
                out.push(wrap(kappa(Pos, VAL, 1), &[(t, 1)])?);
            }
        }
        B::Down(p) => {
            for t in inc(p)?.iter() {
                out.push(wrap(kappa(Neg, VAL, 1), &[(t, 1)])?);
            }
        }
        B::Plus(m, n) => {
            out.push(daimon_tree());
            for t in inc(m)?.iter() {
                out.push(wrap(kappa(Pos, P1, 1), &[(t, 1)])?);
            }
            for t in inc(n)?.iter() {
                out.push(wrap(kappa(Pos, P2, 1), &[(t, 1)])?);
            }
        }
        B::Inj(i, n) => {
            out.push(daimon_tree());
            let name = if *i == 1 { P1 } else { P2 };
            for t in inc(n)?.iter() {
                out.push(wrap(kappa(Pos, name, 1), &[(t, 1)])?);
            }
        }
        B::Tensor(m, n) => {
            out.push(daimon_tree());
            let (im, inn) = (inc(m)?, inc(n)?);
            for a in im.iter() {
                for c in inn.iter() {
                    out.push(wrap(kappa(Pos, PR, 2), &[(a, 1), (c, 2)])?);
                }
            }
        }
        B::Limp(n, p) => return Ok(inc(&orth(tensor((**n).clone(), orth((**p).clone()))))?.to_vec()),
        B::Orth(x) => match &**x {
            B::Const { name, arity } => out.push(wrap(kappa(Neg, name, *arity), &[(&daimon_tree(), 1)])?),
            B::Daimon => out.push(CTree::default()),
            B::Up(n) => return Ok(inc(&down(orth((**n).clone())))?.to_vec()),
            B::Down(p) => return Ok(inc(&up(orth((**p).clone())))?.to_vec()),
            B::Orth(y) => return Ok(inc(y)?.to_vec()),
            B::Limp(n, p) => return Ok(inc(&tensor((**n).clone(), orth((**p).clone())))?.to_vec()),
            B::Plus(m, n) => {
                let (qm, qn) = (inc(&orth((**m).clone()))?, inc(&orth((**n).clone()))?);
                for a in qm.iter() {
                    for c in qn.iter() {
                        let mut t = CTree::default();
                        let r1 = t.add(None, kappa(Neg, P1, 1));
                        graft(&mut t, Some(r1), a, 1)?;
                        let r2 = t.add(None, kappa(Neg, P2, 1));
                        graft(&mut t, Some(r2), c, 1)?;
                        out.push(t);
                    }
                }
            }
            B::Inj(i, n) => {
                let name = if *i == 1 { P1 } else { P2 };
                for a in inc(&orth((**n).clone()))?.iter() {
                    out.push(wrap(kappa(Neg, name, 1), &[(a, 1)])?);
                }
            }
            B::Tensor(..) => {
                let tests = inc(x)?;
                let sig = sig_ids(x);
                return enumerate_orthogonal(&tests, &sig, ENUM_BUDGET);
            }
            other => return Err(Error::Unsupported(format!("no incarnation for orth({other})"))),
        },
        other => return Err(Error::Unsupported(format!("no incarnation for {other}"))),
    }
    Ok(out)
}

fn sig_ids(b: &BehaviourExpr) -> Vec<(u16, u8)> {
    b.signature().names().map(|(n, k)| (name_id(n), k as u8)).collect()
}

/// All incarnated negative designs orthogonal to every positive tree of `tests`.
///
/// The designs are grown lazily: each interaction that reaches a missing branch or response
/// forks over every legal positive answer at that point, so only visited actions appear.
pub fn enumerate_orthogonal(tests: &[CTree], sig: &[(u16, u8)], budget: usize) -> Result<Vec<CTree>> {
    let mut g = Gen { tests, sig, e: CTree::default(), out: vec![], budget };
    g.go(0)?;
    Ok(g.out)
}

struct Gen<'a> {
    tests: &'a [CTree],
    sig: &'a [(u16, u8)],
    e: CTree,
    out: Vec<CTree>,
    budget: usize,
}

impl Gen<'_> {
    fn go(&mut self, mut k: usize) -> Result<()> {
        while k < self.tests.len() {
            let r = CTree::interact(&self.tests[k], &self.e);
            match r.end {
                End::Daimon(_) => k += 1,
                End::Stuck(Side::Pos, _) => return Ok(()),
                End::Stuck(Side::Neg, hole) => {
                    return match hole {
                        crate::compact::Hole::Branch { parent, act } => {
                            let node = self.e.add(parent, act);
                            let res = self.respond(node, k);
                            self.e.pop();
                            res
                        }
                        crate::compact::Hole::Response(node) => self.respond(node, k),
                        crate::compact::Hole::Empty => Ok(()),
                    };
                }
            }
        }
        if self.out.len() >= self.budget {
            return Err(Error::Budget(self.budget));
        }
        self.out.push(self.e.clone());
        Ok(())
    }

    fn respond(&mut self, node: u32, k: usize) -> Result<()> {
        for c in self.candidates(node) {
            self.e.add(Some(node), c);
            let res = self.go(k);
            self.e.pop();
            res?;
        }
        Ok(())
    }

    /// ✠ and every action on a locus bound in the view of `node` and free for linearity.
    fn candidates(&self, node: u32) -> Vec<CAct> {
        let mut out = vec![CAct::DAIMON];
        let mut chain = vec![];
        let mut k = Some(node);
        while let Some(i) = k {
            chain.push(i);
            k = self.e.nodes[i as usize].parent;
        }
        let view: Vec<CAct> = chain.iter().rev().map(|&i| self.e.act(i)).collect();
        let used: Vec<Locus> = view.iter().filter(|a| a.kind == crate::paths::Kind::Pos).map(|a| a.addr).collect();
        for a in view.iter().filter(|a| a.kind == crate::paths::Kind::Neg) {
            for l in a.bound() {
                if used.contains(&l) || self.used_elsewhere(l, &chain) {
                    continue;
                }
                for &(name, arity) in self.sig {
                    out.push(CAct { kind: crate::paths::Kind::Pos, addr: l, name, arity });
                }
            }
        }
        out
    }

    /// `l` is already the address of a positive action in a different argument of a common
    /// positive ancestor (sibling branches of a sum may reuse it).
    fn used_elsewhere(&self, l: Locus, chain: &[u32]) -> bool {
        for (i, n) in self.e.nodes.iter().enumerate() {
            if n.act.kind != crate::paths::Kind::Pos || n.act.addr != l {
                continue;
            }
            let mut k = Some(i as u32);
            while let Some(c) = k {
                if let Some(pos) = chain.iter().position(|&x| x == c) {
                    // lowest common ancestor found
                    let lca = chain[pos];
                    if self.e.act(lca).kind == crate::paths::Kind::Pos {
                        return true;
                    }
                    break;
                }
                k = self.e.nodes[c as usize].parent;
            }
        }
        false
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IncarnationSet {
    pub designs: Vec<Design>,
    pub behaviour: BehaviourExpr,
    pub level: usize,
}

impl IncarnationSet {
    pub fn len(&self) -> usize {
        self.designs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.designs.is_empty()
    }
}

fn trees_to_designs(ts: &[CTree], pol: Polarity, deloc: Option<&str>) -> Vec<Design> {
    ts.iter()
        .map(|t| {
            let d = t.to_design(pol);
            match deloc {
                Some(v) => rename(&d, X0, v),
                None => d,
            }
        })
        .collect()
}

/// `|B|` at the given level.
pub fn incarnation(b: &BehaviourExpr, level: usize) -> Result<IncarnationSet> {
    let (core, deloc) = prepare(b, level)?;
    no_deloc(&core)?;
    let ts = inc(&core)?;
    Ok(IncarnationSet {
        designs: trees_to_designs(&ts, core.polarity(), deloc.as_deref()),
        behaviour: b.clone(),
        level,
    })
}

/// Incarnation as located trees, for callers that run many interactions.
pub fn incarnation_trees(b: &BehaviourExpr, level: usize) -> Result<Arc<Vec<CTree>>> {
    let (core, deloc) = prepare(b, level)?;
    if deloc.is_some() {
        return Err(Error::Unsupported("located trees of a delocated behaviour".into()));
    }
    no_deloc(&core)?;
    inc(&core)
}

fn check_design(d: &Design, want: Polarity) -> Result<Design> {
    let d = if d.is_cut_free() { d.clone() } else { normalize(d, DEFAULT_FUEL).result };
    let c = classify(&d);
    if c.polarity != want {
        return Err(Error::Polarity { expected: pol_word(want) });
    }
    Ok(d)
}

fn undeloc(d: &Design, deloc: &Option<String>) -> Design {
    match deloc {
        Some(v) => rename(d, v, X0),
        None => d.clone(),
    }
}

/// `d ∈ B`, decided through the incarnation and the observational order.
pub fn member(d: &Design, b: &BehaviourExpr, level: usize) -> Result<bool> {
    let (core, deloc) = prepare(b, level)?;
    no_deloc(&core)?;
    if !d.is_cut_free() {
        return Err(Error::HasCuts);
    }
    let d = check_design(&undeloc(d, &deloc), core.polarity())?;
    if !classify(&d).atomic {
        return Err(Error::NotAtomic);
    }
    let ts = inc(&core)?;
    Ok(ts.iter().any(|t| obs_leq(&t.to_design(core.polarity()), &d)))
}

/// `e ∈ B⊥`: orthogonal to every design of `|B|`.
pub fn ortho_member(e: &Design, b: &BehaviourExpr, level: usize) -> Result<bool> {
    let (core, deloc) = prepare(b, level)?;
    no_deloc(&core)?;
    let want = match core.polarity() {
        Polarity::Positive => Polarity::Negative,
        Polarity::Negative => Polarity::Positive,
    };
    let e = check_design(&undeloc(e, &deloc), want)?;
    if !classify(&e).atomic {
        return Err(Error::NotAtomic);
    }
    if core == B::Daimon {
        return Ok(true);
    }
    let et = CTree::from_design(&e)?;
    let ts = inc(&core)?;
    Ok(orthogonal_to_all(&et, &ts, core.is_positive()))
}

/// `t` against every tree of `others`; `others_positive` says which side plays first.
pub fn orthogonal_to_all(t: &CTree, others: &[CTree], others_positive: bool) -> bool {
    others.iter().all(|o| {
        let r = if others_positive { CTree::interact(o, t) } else { CTree::interact(t, o) };
        r.converged()
    })
}

/// `|d|_B`: the actions of `d` visited by the tests of `|B⊥|`.
pub fn incarnate_design(d: &Design, b: &BehaviourExpr, level: usize) -> Result<Design> {
    if !member(d, b, level)? {
        return Err(Error::Unsupported("design is not a member of the behaviour".into()));
    }
    let (core, deloc) = prepare(b, level)?;
    let d = undeloc(d, &deloc);
    let dt = CTree::from_design(&d)?;
    let pos = core.is_positive();
    let mut keep = vec![false; dt.len()];
    if core != B::Daimon {
        let tests = inc(&orth(core.clone()))?;
        for t in tests.iter() {
            let r = if pos { CTree::interact(&dt, t) } else { CTree::interact(t, &dt) };
            if !r.converged() {
                return Err(Error::Unsupported("design is not orthogonal to an enumerated test".into()));
            }
            for &n in if pos { &r.pos_nodes } else { &r.neg_nodes } {
                keep[n as usize] = true;
            }
        }
    } else if let Some(&r) = dt.roots.first() {
        keep[r as usize] = true;
    }
    let f = dt.forest_of(&|n| keep[n as usize]);
    let out = crate::paths::unlocate(&f, core.polarity());
    Ok(match deloc {
        Some(v) => rename(&out, X0, &v),
        None => out,
    })
}

// ---------------------------------------------------------------------------
// Visitable paths

fn vis(b: &BehaviourExpr, l: usize) -> Result<Arc<PathSet>> {
    let key = (b.clone(), l);
    if let Some(v) = vis_cache().lock().unwrap().get(&key) {
        return Ok(v.clone());
    }
    let v = Arc::new(vis_raw(b, l)?);
    vis_cache().lock().unwrap().insert(key, v.clone());
    Ok(v)
}

fn vis_raw(b: &BehaviourExpr, l: usize) -> Result<PathSet> {
    use crate::paths::Kind::{Neg, Pos};
    let mut out = PathSet::new();
    if l == 0 {
        if !b.is_positive() {
            out.set_member(PathSet::ROOT);
        }
        return Ok(out);
    }
    let dai = |out: &mut PathSet| {
        let k = out.add_child(PathSet::ROOT, CAct::DAIMON);
        out.set_member(k);
    };
    match b {
        B::Const { name, arity } => {
            dai(&mut out);
            out.insert(&[kappa(Pos, name, *arity)]);
        }
        B::Daimon => dai(&mut out),
        B::Up(n) => {
            dai(&mut out);
            let k = out.add_child(PathSet::ROOT, kappa(Pos, VAL, 1));
            out.graft(k, &*(vis(n, l - 1)?), Some(1), l - 1)?;
        }
        B::Down(p) => {
            out.set_member(PathSet::ROOT);
            let k = out.add_child(PathSet::ROOT, kappa(Neg, VAL, 1));
            out.graft(k, &*(vis(p, l - 1)?), Some(1), l - 1)?;
        }
        B::Plus(m, n) => {
            dai(&mut out);
            let k = out.add_child(PathSet::ROOT, kappa(Pos, P1, 1));
            out.graft(k, &*(vis(m, l - 1)?), Some(1), l - 1)?;
            let k = out.add_child(PathSet::ROOT, kappa(Pos, P2, 1));
            out.graft(k, &*(vis(n, l - 1)?), Some(1), l - 1)?;
        }
        B::Inj(i, n) => {
            dai(&mut out);
            let k = out.add_child(PathSet::ROOT, kappa(Pos, if *i == 1 { P1 } else { P2 }, 1));
            out.graft(k, &*(vis(n, l - 1)?), Some(1), l - 1)?;
        }
        B::Tensor(m, n) => {
            dai(&mut out);
            let (vm, vn) = (vis(m, l - 1)?, vis(n, l - 1)?);
            let mut sh = Shuffler::new(&vm, &vn, l).with_prefix(&[kappa(Pos, PR, 2)]);
            sh.ra = Some(1);
            sh.rb = Some(2);
            sh.run(&mut |u, ma, mb| {
                if ma && mb {
                    out.insert(u);
                }
                Flow::Continue
            });
        }
        B::Limp(n, p) => return Ok((*vis(&orth(tensor((**n).clone(), orth((**p).clone()))), l)?).clone()),
        B::Orth(x) => return Ok(vis(x, l + 1)?.dual(l)),
        other => return Err(Error::Unsupported(format!("no visitable paths for {other}"))),
    }
    Ok(out)
}

fn deloc_seq(s: &Seq, v: &Option<String>) -> Seq {
    let Some(v) = v else { return s.clone() };
    let fix = |a: &str| match a.strip_prefix(X0) {
        Some(rest) if rest.is_empty() || rest.starts_with('.') => format!("{v}{rest}"),
        _ => a.to_string(),
    };
    use crate::paths::Action;
    Seq(s
        .0
        .iter()
        .map(|a| match a {
            Action::Daimon => Action::Daimon,
            Action::Pos { addr, name, bound } => {
                Action::Pos { addr: fix(addr), name: name.clone(), bound: bound.iter().map(|b| fix(b)).collect() }
            }
            Action::Neg { addr, name, bound } => {
                Action::Neg { addr: fix(addr), name: name.clone(), bound: bound.iter().map(|b| fix(b)).collect() }
            }
        })
        .collect())
}

/// `V_B` up to `max_len` actions, by the closed forms on the constructor tree.
pub fn visitable_set(b: &BehaviourExpr, level: usize, max_len: usize) -> Result<Arc<PathSet>> {
    let (core, deloc) = prepare(b, level)?;
    if deloc.is_some() {
        return Err(Error::Unsupported("packed paths of a delocated behaviour".into()));
    }
    no_deloc(&core)?;
    vis(&core, max_len)
}

/// `V_B` up to `max_len` actions, sorted.
pub fn visitable_paths(b: &BehaviourExpr, level: usize, max_len: usize) -> Result<Vec<Seq>> {
    let (core, deloc) = prepare(b, level)?;
    no_deloc(&core)?;
    let v = vis(&core, max_len)?;
    let mut out: Vec<Seq> = v.paths().iter().map(|p| deloc_seq(&to_seq(p), &deloc)).collect();
    out.sort();
    Ok(out)
}

/// `V_B` by definition: the paths `s` of incarnated designs whose dual completion lies in `B⊥`.
pub fn visitable_paths_oracle(b: &BehaviourExpr, level: usize, max_len: usize) -> Result<Vec<Seq>> {
    let (core, deloc) = prepare(b, level)?;
    no_deloc(&core)?;
    let set = oracle_set(&core, max_len)?;
    let mut out: Vec<Seq> = set.paths().iter().map(|p| deloc_seq(&to_seq(p), &deloc)).collect();
    out.sort();
    Ok(out)
}

fn oracle_set(core: &BehaviourExpr, max_len: usize) -> Result<PathSet> {
    let ts = inc(core)?;
    let neg = !core.is_positive();
    let mut cands = PathSet::new();
    for t in ts.iter() {
        for p in t.paths(neg, max_len) {
            cands.insert(&p);
        }
    }
    // An interaction with a completion of at most `max_len + 1` actions stays within
    // `max_len + 3` actions, so deeper parts of the designs are never reached.
    let mut seen = std::collections::HashSet::new();
    let tests: Vec<CTree> = ts
        .iter()
        .map(|t| truncate(t, max_len + 3))
        .filter(|t| seen.insert(t.nodes.iter().map(|n| (n.parent, n.act)).collect::<Vec<_>>()))
        .collect();
    let sig = sig_ids(core);
    let mut out = PathSet::new();
    for p in cands.paths() {
        let c = completion_tree(&crate::paths::dual_of(&p), &sig, !neg)?;
        if orthogonal_to_all(&c, &tests, !neg) {
            out.insert(&p);
        }
    }
    Ok(out)
}

/// The nodes of `t` at depth at most `depth`.
fn truncate(t: &CTree, depth: usize) -> CTree {
    fn go(t: &CTree, out: &mut CTree, parent: Option<u32>, n: u32, left: usize) {
        let id = out.add(parent, t.act(n));
        if left > 1 {
            for &c in &t.nodes[n as usize].children {
                go(t, out, Some(id), c, left - 1);
            }
        }
    }
    let mut out = CTree::default();
    if depth > 0 {
        for &r in &t.roots {
            go(t, &mut out, None, r, depth);
        }
    }
    out
}

/// `⌈s⌉` as a located tree: the branches of `s`, with every other name answered by ✠.
/// An empty `s` gives the padded sum at `x0` when `negative`, and the empty tree otherwise.
pub fn completion_tree(s: &[CAct], sig: &[(u16, u8)], negative: bool) -> Result<CTree> {
    let mut t = CTree::default();
    match s.first() {
        None if negative => sum_tree(&mut t, None, Locus::ROOT, None, s, sig),
        None => {}
        Some(a) if a.kind == crate::paths::Kind::Neg => sum_tree(&mut t, None, a.addr, Some(0), s, sig),
        Some(_) => pos_tree(&mut t, None, 0, s, sig),
    }
    Ok(t)
}

fn pos_tree(t: &mut CTree, parent: Option<u32>, i: usize, s: &[CAct], sig: &[(u16, u8)]) {
    let a = s[i];
    let id = t.add(parent, a);
    for l in a.bound() {
        let taken = s.iter().position(|b| b.kind == crate::paths::Kind::Neg && b.addr == l);
        sum_tree(t, Some(id), l, taken, s, sig);
    }
}

fn sum_tree(t: &mut CTree, parent: Option<u32>, l: Locus, taken: Option<usize>, s: &[CAct], sig: &[(u16, u8)]) {
    let tname = taken.map(|i| s[i].name);
    for &(name, arity) in sig {
        if Some(name) == tname {
            continue;
        }
        let n = t.add(parent, CAct { kind: crate::paths::Kind::Neg, addr: l, name, arity });
        t.add(Some(n), CAct::DAIMON);
    }
    if let Some(i) = taken {
        let n = t.add(parent, s[i]);
        if i + 1 < s.len() {
            pos_tree(t, Some(n), i + 1, s, sig);
        }
    }
}

// ---------------------------------------------------------------------------
// Checks

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Holds,
    FailsWithWitness,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckReport {
    pub verdict: Verdict,
    pub witness: Option<Seq>,
    pub level: usize,
    pub max_len: usize,
    pub detail: String,
}

impl CheckReport {
    pub fn holds(&self) -> bool {
        self.verdict == Verdict::Holds
    }

    fn ok(level: usize, max_len: usize, detail: impl Into<String>) -> Self {
        CheckReport { verdict: Verdict::Holds, witness: None, level, max_len, detail: detail.into() }
    }

    fn fail(level: usize, max_len: usize, w: Seq, detail: impl Into<String>) -> Self {
        CheckReport { verdict: Verdict::FailsWithWitness, witness: Some(w), level, max_len, detail: detail.into() }
    }
}

/// Some merge of two members of `v` that is missing from `v`.
fn shuffle_gap(v: &PathSet, positive: bool, max_len: usize) -> Option<Vec<CAct>> {
    let mut gap = None;
    let mut sh = Shuffler::new(v, v, max_len);
    sh.shared_first = positive;
    sh.run(&mut |u, ma, mb| {
        if ma && mb && !v.contains(u) {
            gap = Some(u.to_vec());
            return Flow::Stop;
        }
        Flow::Continue
    });
    gap
}

/// Regularity within bounds: paths of `|B|` are visitable and `V_B`, `V_B⊥` are closed under
/// shuffle; the trivial-view characterization is evaluated alongside as a cross-check.
pub fn check_regular(b: &BehaviourExpr, level: usize, max_len: usize) -> Result<CheckReport> {
    let (core, _) = prepare(b, level)?;
    no_deloc(&core)?;
    let v = vis(&core, max_len)?;
    let vd = vis(&orth(core.clone()), max_len)?;
    let ts = inc(&core)?;
    let neg = !core.is_positive();

    let mut missing = None;
    let mut seen = std::collections::HashSet::new();
    'outer: for t in ts.iter() {
        let t = truncate(t, max_len);
        if !seen.insert(t.nodes.iter().map(|n| (n.parent, n.act)).collect::<Vec<_>>()) {
            continue;
        }
        for p in t.paths(neg, max_len) {
            if !v.contains(&p) {
                missing = Some(p);
                break 'outer;
            }
        }
    }
    let mut trivial = None;
    'tv: for t in ts.iter() {
        for view in t.positive_views() {
            let tv: Vec<CAct> = trivial_view_indices(&view).iter().map(|&i| view[i]).collect();
            if tv.len() <= max_len && !v.contains(&tv) {
                trivial = Some(tv);
                break 'tv;
            }
        }
    }
    let gap = shuffle_gap(&v, !neg, max_len);
    let gap_dual = if gap.is_none() { shuffle_gap(&vd, neg, max_len) } else { None };

    let closed = gap.is_none() && gap_dual.is_none();
    let direct = missing.is_none() && closed;
    let by_views = trivial.is_none() && closed;
    let detail = format!(
        "{} visitable paths; paths of incarnation: {}; trivial views: {}; shuffle closure: {}",
        v.len(),
        if missing.is_none() { "visitable" } else { "not visitable" },
        if trivial.is_none() { "visitable" } else { "not visitable" },
        if closed { "closed" } else { "not closed" },
    );
    if direct && by_views {
        return Ok(CheckReport::ok(level, max_len, detail));
    }
    let w = missing.or(trivial).or(gap).or(gap_dual.map(|g| crate::paths::dual_of(&g))).unwrap_or_default();
    let mut detail = detail;
    if direct != by_views {
        detail.push_str("; the two characterizations disagree");
    }
    Ok(CheckReport::fail(level, max_len, to_seq(&w), detail))
}

/// ✠-ended visitable paths with no proper positive alternative, least first.
fn maximal_daimon_paths(v: &PathSet, well_bracketed_only: bool) -> Vec<Vec<CAct>> {
    let mut out = Vec::new();
    v.for_each_node(|n, p| {
        let Some(dk) = v.children(n).find(|&c| v.act(c).is_daimon()) else { return };
        if !v.is_member(dk) {
            return;
        }
        let extensible = v.children(n).any(|c| {
            let a = v.act(c);
            a.kind == crate::paths::Kind::Pos && v.is_member(c)
        });
        if extensible {
            return;
        }
        let mut w = p.to_vec();
        w.push(CAct::DAIMON);
        if !well_bracketed_only || well_bracketed_ok(&w) {
            out.push(w);
        }
    });
    out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    out
}

fn purity(b: &BehaviourExpr, level: usize, max_len: usize, quasi: bool) -> Result<CheckReport> {
    let (core, _) = prepare(b, level)?;
    no_deloc(&core)?;
    let v = vis(&core, max_len)?;
    let ws = maximal_daimon_paths(&v, quasi);
    let what = if quasi { "well-bracketed ✠-ended" } else { "✠-ended" };
    match ws.first() {
        None => Ok(CheckReport::ok(level, max_len, format!("every {what} visitable path is extensible"))),
        Some(w) => Ok(CheckReport::fail(
            level,
            max_len,
            to_seq(w),
            format!("{} maximal {what} visitable paths", ws.len()),
        )),
    }
}

pub fn check_pure(b: &BehaviourExpr, level: usize, max_len: usize) -> Result<CheckReport> {
    purity(b, level, max_len, false)
}

pub fn check_quasi_pure(b: &BehaviourExpr, level: usize, max_len: usize) -> Result<CheckReport> {
    purity(b, level, max_len, true)
}

/// `s κ⁺ ∈ V_B` for some proper positive `κ⁺`, with `s✠` given.
pub fn extensible(b: &BehaviourExpr, level: usize, s: &Seq, max_len: usize) -> Result<bool> {
    let v = visitable_set(b, level, max_len)?;
    let p = from_seq(s)?;
    let Some(pre) = p.strip_suffix(&[CAct::DAIMON]) else {
        return Err(Error::Unsupported("path does not end with a daimon".into()));
    };
    Ok(match v.find(pre) {
        Some(n) => v.children(n).any(|c| v.act(c).kind == crate::paths::Kind::Pos && v.is_member(c)),
        None => false,
    })
}

// ---------------------------------------------------------------------------
// Explicit sets

/// Membership in the explicit description of a connective: `↑N = ▽⟨N⟩ ∪ {✠}` and so on, with
/// constants upward closed and orthogonals decided against the incarnation.
pub fn explicit_member(d: &Design, b: &BehaviourExpr, level: usize) -> Result<bool> {
    let core = b.unfold(level)?;
    explicit(d, &core)
}

fn explicit(d: &Design, b: &BehaviourExpr) -> Result<bool> {
    if b.is_positive() && *d == Design::Daimon {
        return Ok(true);
    }
    let app = |name: &str, k: usize| -> Option<Vec<Design>> {
        match d {
            Design::App { head, name: n, args } if head == X0 && n == name && args.len() == k => Some(args.clone()),
            _ => None,
        }
    };
    Ok(match b {
        B::Const { name, arity } => app(name, *arity).is_some(),
        B::Daimon => false,
        B::Up(n) => match app(VAL, 1) {
            Some(a) => explicit(&a[0], n)?,
            None => false,
        },
        B::Plus(m, n) => match (app(P1, 1), app(P2, 1)) {
            (Some(a), _) => explicit(&a[0], m)?,
            (_, Some(a)) => explicit(&a[0], n)?,
            _ => false,
        },
        B::Inj(i, n) => match app(if *i == 1 { P1 } else { P2 }, 1) {
            Some(a) => explicit(&a[0], n)?,
            None => false,
        },
        B::Tensor(m, n) => match app(PR, 2) {
            Some(a) => explicit(&a[0], m)? && explicit(&a[1], n)?,
            None => false,
        },
        B::Down(p) => match d {
            Design::Neg(bs) => match bs.get(VAL) {
                Some(br) if br.vars.len() == 1 => {
                    let body = rename(&br.body, &br.vars[0], X0);
                    explicit(&body, p)?
                }
                _ => false,
            },
            _ => false,
        },
        B::Orth(_) | B::Limp(..) => {
            let want = b.polarity();
            if d.polarity() != want || !d.is_cut_free() || !classify(d).atomic {
                return Ok(false);
            }
            let other = orth(b.clone());
            let ts = inc(&crate::behaviours::simplify_orth(&other))?;
            let dt = CTree::from_design(d)?;
            orthogonal_to_all(&dt, &ts, !b.is_positive())
        }
        other => return Err(Error::Unsupported(format!("no explicit set for {other}"))),
    })
}

/// `orth(orth(B))` written as `B`.
pub fn simplify_orth(b: &BehaviourExpr) -> BehaviourExpr {
    match b {
        B::Orth(x) => match &**x {
            B::Orth(y) => simplify_orth(y),
            _ => b.clone(),
        },
        _ => b.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::paths::parse_seq;
    use crate::syntax::parse_design_infer;

    fn cb() -> B {
        const_behaviour("b").unwrap()
    }

    fn bool_() -> B {
        plus_pos(cb(), cb())
    }

    fn d(s: &str) -> Design {
        parse_design_infer(s, &mut Signature::new()).unwrap()
    }

    fn nat() -> B {
        B::Mu {
            var: "X".into(),
            body: Box::new(plus_pos(const_behaviour("n").unwrap(), B::Var("X".into()))),
            level: None,
            seed: Box::new(B::Daimon),
        }
    }

    fn rendered(v: &[Design]) -> Vec<String> {
        let mut out: Vec<String> = v.iter().map(|d| crate::syntax::render_design(&crate::syntax::canonical(d))).collect();
        out.sort();
        out
    }

    #[test]
    fn constant_incarnation_and_paths() {
        let inc = incarnation(&cb(), 0).unwrap();
        assert_eq!(rendered(&inc.designs), rendered(&[Design::Daimon, d("x0|b<>")]));
        let v: Vec<String> = visitable_paths(&cb(), 0, 5).unwrap().iter().map(|s| s.to_string()).collect();
        assert_eq!(v, vec!["#", "x0|b<>"]);
        assert!(const_behaviour("val").is_err());
    }

    #[test]
    fn down_and_bool_incarnations() {
        let inc = incarnation(&down(cb()), 0).unwrap();
        assert_eq!(rendered(&inc.designs), rendered(&[d("val(x).#"), d("val(x).(x|b<>)")]));
        assert_eq!(incarnation(&bool_(), 0).unwrap().len(), 5);
    }

    #[test]
    fn nat_sizes() {
        let sizes: Vec<usize> = (0..4).map(|k| incarnation(&nat(), k).unwrap().len()).collect();
        assert_eq!(sizes, vec![1, 4, 7, 10]);
    }

    #[test]
    fn membership() {
        assert!(member(&Design::Daimon, &bool_(), 0).unwrap());
        assert!(!member(&d("x0|c<>"), &bool_(), 0).unwrap());
        assert!(member(&d("x0|b<>"), &cb(), 0).unwrap());
        assert!(ortho_member(&d("b().#"), &cb(), 0).unwrap());
        assert!(!ortho_member(&d("b().(_)"), &cb(), 0).unwrap());
        assert!(member(&Design::Daimon, &B::Daimon, 0).unwrap());
    }

    #[test]
    fn nat_membership_by_level() {
        let one = d("x0|p2< val(x).(x|p1< val(y).(y|n<>) >) >");
        assert!(!member(&one, &nat(), 1).unwrap());
        assert!(member(&one, &nat(), 2).unwrap());
    }

    #[test]
    fn up_paths_are_shifted() {
        let v = visitable_paths(&up(down(cb())), 0, 6).unwrap();
        let got: Vec<String> = v.iter().map(|s| s.to_string()).collect();
        assert_eq!(got, vec!["#", "x0|val<x0.1>", "x0|val<x0.1> val_x0.1(x0.1.1) #", "x0|val<x0.1> val_x0.1(x0.1.1) x0.1.1|b<>"]);
    }

    #[test]
    fn two_methods_agree() {
        for b in [bool_(), tensor_pos(bool_(), bool_()), nat()] {
            assert_eq!(visitable_paths(&b, 2, 12).unwrap(), visitable_paths_oracle(&b, 2, 12).unwrap(), "{b}");
        }
    }

    #[test]
    fn orth_paths_are_duals() {
        let v = visitable_paths(&bool_(), 0, 8).unwrap();
        let w = visitable_paths(&orth(bool_()), 0, 7).unwrap();
        let mut duals: Vec<Seq> =
            v.iter().map(|s| crate::paths::dual(s).unwrap()).filter(|s| s.len() <= 7).collect();
        duals.sort();
        assert_eq!(duals, w);
    }

    #[test]
    fn regular_and_pure() {
        assert!(check_regular(&cb(), 0, 8).unwrap().holds());
        assert!(check_regular(&nat(), 3, 12).unwrap().holds());
        assert!(check_pure(&bool_(), 0, 12).unwrap().holds());
        let arrow = limp_pos(bool_(), bool_());
        assert!(check_regular(&arrow, 0, 12).unwrap().holds());
        assert!(check_pure(&arrow, 0, 14).unwrap().holds());
    }

    #[test]
    fn higher_order_is_impure_but_quasi_pure() {
        let p = limp_pos(limp_pos(bool_(), bool_()), bool_());
        let r = check_pure(&p, 0, 16).unwrap();
        assert_eq!(r.verdict, Verdict::FailsWithWitness);
        let w = r.witness.unwrap();
        assert!(w.daimon_ended());
        assert!(!crate::paths::is_well_bracketed(&w));
        assert!(check_quasi_pure(&p, 0, 16).unwrap().holds());
    }

    #[test]
    fn incarnate_prunes_padding() {
        let padded = d("x0|p1< val(x).(x|n<>) + p1(y).# >");
        let got = incarnate_design(&padded, &nat(), 2).unwrap();
        assert!(crate::syntax::alpha_eq(&got, &d("x0|p1< val(x).(x|n<>) >")));
    }

    #[test]
    fn generic_orthogonal_enumeration() {
        // (↓C_b ⊗ ↓C_b)⊥ by enumeration against the structural incarnation of its orthogonal
        let t = tensor_pos(cb(), cb());
        let es = incarnation(&orth(t.clone()), 0).unwrap();
        assert!(!es.is_empty());
        for e in &es.designs {
            assert!(ortho_member(e, &t, 0).unwrap());
        }
    }

    #[test]
    fn parse_roundtrip() {
        for s in ["up(down(C b))", "(down(C b) (+) down(C b))", "(down(C b) -o C b)", "orth(C a/2)", "inj1(down(dai))"] {
            let e = parse_behaviour(s).unwrap();
            assert_eq!(parse_behaviour(&e.to_string()).unwrap(), e);
        }
        assert!(parse_behaviour("up(C b)").is_err());
        let v = parse_seq("x0|b<>").unwrap();
        assert!(visitable_paths(&parse_behaviour("C_b").unwrap(), 0, 3).unwrap().contains(&v));
    }

    #[test]
    fn delocated() {
        let b = B::Deloc(Box::new(cb()), "y".into());
        let inc = incarnation(&b, 0).unwrap();
        assert!(inc.designs.contains(&d("y|b<>")));
        assert!(member(&d("y|b<>"), &b, 0).unwrap());
    }
}
