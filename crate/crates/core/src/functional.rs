//! Functional behaviours, one-hole contexts, and the impurity criterion with its witness.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::behaviours::{
    check_pure, check_quasi_pure, check_regular, limp_pos, plus_pos, tensor_pos, visitable_set, BehaviourExpr,
    CheckReport,
};
use crate::compact::{to_seq, CAct, CTree, PathSet};
use crate::datatypes::{bool_pattern, interpret_seeded, is_steady, named_pattern, nat_pattern, DataPattern, Env, Seed};
use crate::error::{Error, Result};
use crate::paths::{completion, is_well_bracketed, skeleton, Kind, Seq};
use crate::syntax::Design;

/// Level used for data leaves when the caller gives none.
pub const WITNESS_LEVEL: usize = 3;
/// Longest auxiliary path searched for while building a witness.
pub const WITNESS_SEARCH_LEN: usize = 32;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FuncType {
    Data(DataPattern),
    Plus(Box<FuncType>, Box<FuncType>),
    Tensor(Box<FuncType>, Box<FuncType>),
    Limp(Box<FuncType>, Box<FuncType>),
}

use FuncType as F;

impl FuncType {
    pub fn name(a: &str) -> FuncType {
        F::Data(DataPattern::Name(a.to_string()))
    }

    pub fn bool() -> FuncType {
        F::Data(bool_pattern())
    }

    pub fn plus(a: FuncType, b: FuncType) -> FuncType {
        F::Plus(Box::new(a), Box::new(b))
    }

    pub fn tensor(a: FuncType, b: FuncType) -> FuncType {
        F::Tensor(Box::new(a), Box::new(b))
    }

    pub fn limp(a: FuncType, b: FuncType) -> FuncType {
        F::Limp(Box::new(a), Box::new(b))
    }

    pub fn is_const(&self) -> bool {
        matches!(self, F::Data(DataPattern::Name(_)))
    }

    pub fn depth(&self) -> usize {
        match self {
            F::Data(_) => 1,
            F::Plus(a, b) | F::Tensor(a, b) | F::Limp(a, b) => 1 + a.depth().max(b.depth()),
        }
    }

    /// The behaviour, with fixed points iterated from their basis.
    pub fn compile(&self) -> Result<BehaviourExpr> {
        Ok(match self {
            F::Data(p) => {
                if !p.free_vars().is_empty() || !is_steady(p) {
                    return Err(Error::Pattern(format!("{p} is not a closed steady pattern")));
                }
                interpret_seeded(p, &Env::new(), None, Seed::Basis)?
            }
            F::Plus(a, b) => plus_pos(a.compile()?, b.compile()?),
            F::Tensor(a, b) => tensor_pos(a.compile()?, b.compile()?),
            F::Limp(a, b) => limp_pos(a.compile()?, b.compile()?),
        })
    }
}

impl fmt::Display for FuncType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            F::Data(DataPattern::Name(a)) => write!(f, "C_{a}"),
            F::Data(p) if *p == bool_pattern() => write!(f, "Bool"),
            F::Data(p) if *p == nat_pattern() => write!(f, "Nat"),
            F::Data(p) => write!(f, "{{{p}}}"),
            F::Plus(a, b) => write!(f, "({a} (+) {b})"),
            F::Tensor(a, b) => write!(f, "({a} (*) {b})"),
            F::Limp(a, b) => write!(f, "({a} -o {b})"),
        }
    }
}

// ---------------------------------------------------------------------------
// Parsing

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Id(String),
    Braced(String),
    Plus,
    Times,
    Limp,
    LParen,
    RParen,
}

fn lex(text: &str) -> Result<Vec<Tok>> {
    let mut out = vec![];
    let mut it = text.char_indices().peekable();
    while let Some(&(i, c)) = it.peek() {
        let rest = &text[i..];
        if c.is_whitespace() {
            it.next();
        } else if rest.starts_with("(+)") || rest.starts_with("(*)") || rest.starts_with("(x)") {
            out.push(if rest.starts_with("(+)") { Tok::Plus } else { Tok::Times });
            it.nth(2);
        } else if rest.starts_with("-o") {
            out.push(Tok::Limp);
            it.nth(1);
        } else if c == '(' {
            out.push(Tok::LParen);
            it.next();
        } else if c == ')' {
            out.push(Tok::RParen);
            it.next();
        } else if c == '{' {
            let end = rest.find('}').ok_or_else(|| Error::Parse("unclosed '{' in type".into()))?;
            out.push(Tok::Braced(rest[1..end].to_string()));
            for _ in 0..rest[..=end].chars().count() {
                it.next();
            }
        } else if c.is_alphanumeric() || c == '_' {
            let mut s = String::new();
            while let Some(&(_, c)) = it.peek() {
                if c.is_alphanumeric() || c == '_' {
                    s.push(c);
                    it.next();
                } else {
                    break;
                }
            }
            out.push(Tok::Id(s));
        } else {
            return Err(Error::Parse(format!("unexpected character '{c}' in type")));
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn ty(&mut self) -> Result<FuncType> {
        let mut acc = self.atom()?;
        loop {
            match self.toks.get(self.pos) {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    acc = F::plus(acc, self.atom()?);
                }
                Some(Tok::Times) => {
                    self.pos += 1;
                    acc = F::tensor(acc, self.atom()?);
                }
                Some(Tok::Limp) => {
                    self.pos += 1;
                    return Ok(F::limp(acc, self.ty()?));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn atom(&mut self) -> Result<FuncType> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        match t {
            Some(Tok::LParen) => {
                let ty = self.ty()?;
                if self.toks.get(self.pos) != Some(&Tok::RParen) {
                    return Err(Error::Parse("expected ')' in type".into()));
                }
                self.pos += 1;
                Ok(ty)
            }
            Some(Tok::Braced(p)) => Ok(F::Data(crate::datatypes::parse_closed_pattern(&p)?)),
            Some(Tok::Id(id)) => {
                if id == "1" {
                    return Ok(F::name("u"));
                }
                if let Some(a) = id.strip_prefix("C_") {
                    if crate::syntax::Signature::is_reserved(a) {
                        return Err(Error::Reserved(a.to_string()));
                    }
                    return Ok(F::name(a));
                }
                named_pattern(&id).map(F::Data).ok_or_else(|| Error::Parse(format!("unknown type {id}")))
            }
            _ => Err(Error::Parse("unexpected end of type".into())),
        }
    }
}

/// Parse `T ::= DATA | T (+) T | T (*) T | T -o T`, with `-o` to the right and weakest.
///
/// Data leaves are `Bool`, `Nat`, `List_a`, `Tree_a`, a constant `C_a` (`1` is `C_u`), or a
/// braced pattern.
pub fn parse_func_type(text: &str) -> Result<FuncType> {
    let mut p = Parser { toks: lex(text)?, pos: 0 };
    let t = p.ty()?;
    if p.pos != p.toks.len() {
        return Err(Error::Parse("trailing input in type".into()));
    }
    Ok(t)
}

// ---------------------------------------------------------------------------
// Contexts

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Step {
    /// `[ ] ⊕⁺ Q`
    PlusL(FuncType),
    /// `Q ⊕⁺ [ ]`
    PlusR(FuncType),
    TensorL(FuncType),
    TensorR(FuncType),
    /// `Q ⊸⁺ [ ]`
    LimpR(FuncType),
}

/// A one-hole context, outermost step first.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Context(pub Vec<Step>);

impl Context {
    pub fn hole() -> Self {
        Context(vec![])
    }

    pub fn plug(&self, t: FuncType) -> FuncType {
        self.0.iter().rev().fold(t, |acc, s| match s {
            Step::PlusL(q) => F::plus(acc, q.clone()),
            Step::PlusR(q) => F::plus(q.clone(), acc),
            Step::TensorL(q) => F::tensor(acc, q.clone()),
            Step::TensorR(q) => F::tensor(q.clone(), acc),
            Step::LimpR(q) => F::limp(q.clone(), acc),
        })
    }
}

impl fmt::Display for Context {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = self.0.iter().rev().fold("[ ]".to_string(), |acc, s| match s {
            Step::PlusL(q) => format!("({acc} (+) {q})"),
            Step::PlusR(q) => format!("({q} (+) {acc})"),
            Step::TensorL(q) => format!("({acc} (*) {q})"),
            Step::TensorR(q) => format!("({q} (*) {acc})"),
            Step::LimpR(q) => format!("({q} -o {acc})"),
        });
        f.write_str(&s)
    }
}

/// Every `(C, T)` with `t = C[T]`, outer positions first.
fn positions(t: &FuncType) -> Vec<(Context, FuncType)> {
    fn go(t: &FuncType, ctx: &mut Vec<Step>, out: &mut Vec<(Context, FuncType)>) {
        out.push((Context(ctx.clone()), t.clone()));
        let mut sub = |s: Step, x: &FuncType, ctx: &mut Vec<Step>| {
            ctx.push(s);
            go(x, ctx, out);
            ctx.pop();
        };
        match t {
            F::Data(_) => {}
            F::Plus(a, b) => {
                sub(Step::PlusL((**b).clone()), a, ctx);
                sub(Step::PlusR((**a).clone()), b, ctx);
            }
            F::Tensor(a, b) => {
                sub(Step::TensorL((**b).clone()), a, ctx);
                sub(Step::TensorR((**a).clone()), b, ctx);
            }
            F::Limp(a, b) => sub(Step::LimpR((**a).clone()), b, ctx),
        }
    }
    let mut out = vec![];
    go(t, &mut vec![], &mut out);
    out
}

/// `P = C1[ C2[Q1 ⊸⁺ Q2] ⊸⁺ R ]` with `R` not a constant.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decomposition {
    pub c1: Context,
    pub c2: Context,
    pub q1: FuncType,
    pub q2: FuncType,
    pub r: FuncType,
}

impl Decomposition {
    pub fn rebuild(&self) -> FuncType {
        let q = self.c2.plug(F::limp(self.q1.clone(), self.q2.clone()));
        self.c1.plug(F::limp(q, self.r.clone()))
    }
}

impl fmt::Display for Decomposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "C1 = {}, C2 = {}, Q1 = {}, Q2 = {}, R = {}", self.c1, self.c2, self.q1, self.q2, self.r)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Criterion {
    Pure,
    Impure(Decomposition),
}

/// Syntactic search for a higher-order argument feeding a non-constant result.
pub fn impurity_criterion(p: &FuncType) -> Criterion {
    for (c1, sub) in positions(p) {
        let F::Limp(a, r) = &sub else { continue };
        if r.is_const() {
            continue;
        }
        for (c2, inner) in positions(a) {
            if let F::Limp(q1, q2) = inner {
                return Criterion::Impure(Decomposition {
                    c1,
                    c2,
                    q1: (*q1).clone(),
                    q2: (*q2).clone(),
                    r: (**r).clone(),
                });
            }
        }
    }
    Criterion::Pure
}

// ---------------------------------------------------------------------------
// Witness construction

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImpurityWitness {
    /// Smallest design having `s` as a path, or its completion when that one is not in the type.
    pub p: Design,
    /// `⌈s̃⌉`.
    pub n: Design,
    pub s: Seq,
    pub decomposition: Decomposition,
    pub p_is_skeleton: bool,
}

fn flip(a: CAct) -> CAct {
    let kind = match a.kind {
        Kind::Pos => Kind::Neg,
        Kind::Neg => Kind::Pos,
        Kind::Daimon => Kind::Daimon,
    };
    CAct { kind, ..a }
}

fn flipped(s: &[CAct]) -> Vec<CAct> {
    s.iter().map(|&a| flip(a)).collect()
}

/// Relocate a path rooted at `x0` to `x0.d1.d2...`.
fn place(s: &[CAct], at: &[usize]) -> Result<Vec<CAct>> {
    s.iter()
        .map(|a| {
            at.iter()
                .rev()
                .try_fold(*a, |a, &d| a.reloc(d))
                .ok_or_else(|| Error::Unsupported("witness path too deep".into()))
        })
        .collect()
}

fn act(kind: Kind, at: &[usize], name: &str, arity: usize) -> Result<CAct> {
    let base = CAct { kind, addr: crate::compact::Locus::ROOT, name: crate::compact::name_id(name), arity: arity as u8 };
    Ok(place(&[base], at)?[0])
}

use crate::syntax::{P1, P2, PR, VAL};

struct Builder {
    level: usize,
}

impl Builder {
    fn vis(&self, t: &FuncType, len: usize) -> Result<std::sync::Arc<PathSet>> {
        visitable_set(&t.compile()?, self.level, len)
    }

    /// Least ✠-free maximal visitable path, certified within the bound it was found at.
    fn max_free(&self, t: &FuncType) -> Result<Vec<CAct>> {
        let mut len = 4;
        while len <= WITNESS_SEARCH_LEN {
            let v = self.vis(t, len)?;
            let mut best: Option<Vec<CAct>> = None;
            v.for_each_node(|n, p| {
                if n == PathSet::ROOT || !v.is_member(n) || p.len() + 2 > len || p.iter().any(|a| a.is_daimon()) {
                    return;
                }
                if has_member_below(&v, n) {
                    return;
                }
                let better = match &best {
                    None => true,
                    Some(b) => (p.len(), p) < (b.len(), b.as_slice()),
                };
                if better {
                    best = Some(p.to_vec());
                }
            });
            if let Some(b) = best {
                return Ok(b);
            }
            len += 2;
        }
        Err(Error::Witness(format!("no maximal daimon-free path of {t} within {WITNESS_SEARCH_LEN} actions")))
    }

    /// Least proper first action.
    fn first_action(&self, t: &FuncType) -> Result<CAct> {
        let v = self.vis(t, 1)?;
        v.children(PathSet::ROOT)
            .filter(|&c| v.is_member(c) && !v.act(c).is_daimon())
            .map(|c| v.act(c))
            .min()
            .ok_or_else(|| Error::Witness(format!("{t} has no proper first action")))
    }

    /// Least `κ⁺κ⁻` with `κ⁺κ⁻✠` visitable.
    fn question(&self, r: &FuncType) -> Result<[CAct; 2]> {
        let v = self.vis(r, 3)?;
        let mut best: Option<[CAct; 2]> = None;
        for c in v.children(PathSet::ROOT) {
            if v.act(c).is_daimon() {
                continue;
            }
            for m in v.children(c) {
                let ok = v.children(m).any(|k| v.act(k).is_daimon() && v.is_member(k));
                let pair = [v.act(c), v.act(m)];
                if ok && best.is_none_or(|b| pair < b) {
                    best = Some(pair);
                }
            }
        }
        best.ok_or_else(|| Error::Witness(format!("{r} has no two-step path")))
    }

    /// A path `q` of `Q = C2[Q1 ⊸⁺ Q2]`, split where the result's question is inserted.
    fn argument_path(&self, c2: &[Step], q1: &FuncType, q2: &FuncType) -> Result<(Vec<CAct>, Vec<CAct>)> {
        match c2.first() {
            None => self.arrow_argument(q1, q2),
            Some(Step::LimpR(q0)) => {
                // Q itself is an arrow Q0 ⊸⁺ C[Q1 ⊸⁺ Q2]
                let inner = Context(c2[1..].to_vec()).plug(F::limp(q1.clone(), q2.clone()));
                self.arrow_argument(q0, &inner)
            }
            Some(Step::PlusL(_)) | Some(Step::PlusR(_)) => {
                let name = if matches!(c2[0], Step::PlusL(_)) { P1 } else { P2 };
                let (b, a) = self.argument_path(&c2[1..], q1, q2)?;
                let mut before = vec![act(Kind::Pos, &[], name, 1)?, act(Kind::Neg, &[1], VAL, 1)?];
                before.extend(place(&b, &[1, 1])?);
                Ok((before, place(&a, &[1, 1])?))
            }
            Some(Step::TensorL(q0)) | Some(Step::TensorR(q0)) => {
                let (h, o) = if matches!(c2[0], Step::TensorL(_)) { (1, 2) } else { (2, 1) };
                let (b, a) = self.argument_path(&c2[1..], q1, q2)?;
                let t0 = self.max_free(q0)?;
                let mut before = vec![act(Kind::Pos, &[], PR, 2)?, act(Kind::Neg, &[o], VAL, 1)?];
                before.extend(place(&t0, &[o, 1])?);
                before.push(act(Kind::Neg, &[h], VAL, 1)?);
                before.extend(place(&b, &[h, 1])?);
                Ok((before, place(&a, &[h, 1])?))
            }
        }
    }

    /// `κ▽ κ̄• κ̄▲ | t̄₁ t₂` in `Q1 ⊸⁺ Q2`.
    fn arrow_argument(&self, q1: &FuncType, q2: &FuncType) -> Result<(Vec<CAct>, Vec<CAct>)> {
        let before = vec![
            act(Kind::Pos, &[], VAL, 1)?,
            act(Kind::Neg, &[1], PR, 2)?,
            act(Kind::Pos, &[1, 1], VAL, 1)?,
        ];
        let t1 = [self.first_action(q1)?];
        let t2 = self.max_free(q2)?;
        let mut after = flipped(&place(&t1, &[1, 1, 1])?);
        after.extend(place(&t2, &[1, 2])?);
        Ok((before, after))
    }

    /// The ✠-ended maximal path of `C2[Q1 ⊸⁺ Q2] ⊸⁺ R`.
    fn core_path(&self, d: &Decomposition) -> Result<Vec<CAct>> {
        let (qb, qa) = self.argument_path(&d.c2.0, &d.q1, &d.q2)?;
        let [kp, km] = self.question(&d.r)?;
        let mut s = vec![
            act(Kind::Pos, &[], VAL, 1)?,
            act(Kind::Neg, &[1], PR, 2)?,
            act(Kind::Pos, &[1, 1], VAL, 1)?,
        ];
        s.extend(flipped(&place(&qb, &[1, 1, 1])?));
        s.extend(place(&[kp, km], &[1, 2])?);
        s.extend(flipped(&place(&qa, &[1, 1, 1])?));
        s.push(CAct::DAIMON);
        Ok(s)
    }

    /// Carry a maximal ✠-ended path of `C'[X]` to `C[X]`, one context step at a time.
    fn lift(&self, c1: &Context, inner: Vec<CAct>) -> Result<Vec<CAct>> {
        let mut s = inner;
        for step in c1.0.iter().rev() {
            s = match step {
                Step::PlusL(_) | Step::PlusR(_) => {
                    let name = if matches!(step, Step::PlusL(_)) { P1 } else { P2 };
                    let mut out = vec![act(Kind::Pos, &[], name, 1)?, act(Kind::Neg, &[1], VAL, 1)?];
                    out.extend(place(&s, &[1, 1])?);
                    out
                }
                Step::TensorL(q) | Step::TensorR(q) => {
                    let (h, o) = if matches!(step, Step::TensorL(_)) { (1, 2) } else { (2, 1) };
                    let t = self.max_free(q)?;
                    let mut out = vec![act(Kind::Pos, &[], PR, 2)?, act(Kind::Neg, &[o], VAL, 1)?];
                    out.extend(place(&t, &[o, 1])?);
                    out.push(act(Kind::Neg, &[h], VAL, 1)?);
                    out.extend(place(&s, &[h, 1])?);
                    out
                }
                Step::LimpR(q) => {
                    let alpha = self.first_action(q)?;
                    let mut out = vec![
                        act(Kind::Pos, &[], VAL, 1)?,
                        act(Kind::Neg, &[1], PR, 2)?,
                        act(Kind::Pos, &[1, 1], VAL, 1)?,
                        flip(place(&[alpha], &[1, 1, 1])?[0]),
                    ];
                    out.extend(place(&s, &[1, 2])?);
                    out
                }
            };
        }
        Ok(s)
    }
}

fn has_member_below(v: &PathSet, n: u32) -> bool {
    v.children(n).any(|c| v.is_member(c) || has_member_below(v, c))
}

/// Proper positive actions `κ⁺` with `sκ⁺` visitable, for `s✠` a member of `v`.
fn extensions(v: &PathSet, s: &[CAct]) -> Vec<CAct> {
    let Some(pre) = s.strip_suffix(&[CAct::DAIMON]) else { return vec![] };
    let Some(n) = v.find(pre) else { return vec![] };
    v.children(n).filter(|&c| v.act(c).kind == Kind::Pos && v.is_member(c)).map(|c| v.act(c)).collect()
}

/// `d ∈ B` for a regular `B`, read off `V_B`: every visitable way for the opponent to continue a
/// path of `d` finds an answer in `d`. Exact when `v` holds all paths two actions longer than
/// those of `d`.
pub fn member_by_paths(d: &CTree, v: &PathSet, positive: bool) -> bool {
    let mut ok = true;
    let all = d.paths(!positive, usize::MAX);
    for u in &all {
        if u.last().is_some_and(|a| a.is_daimon()) {
            continue;
        }
        let Some(node) = v.find(u) else { continue };
        if !v.is_member(node) {
            continue;
        }
        for c in v.children(node) {
            let a = v.act(c);
            if a.kind != Kind::Neg {
                continue;
            }
            let reachable = v.children(c).any(|k| v.act(k).is_daimon() && v.is_member(k));
            if !reachable {
                continue;
            }
            let mut ext = u.clone();
            ext.push(a);
            let answered = all.iter().any(|w| w.len() > ext.len() && w.starts_with(&ext));
            if !answered {
                ok = false;
            }
        }
    }
    ok
}

/// Build and validate the witness of impurity for a type that the criterion declares impure.
pub fn impurity_witness(p: &FuncType) -> Result<ImpurityWitness> {
    impurity_witness_at(p, WITNESS_LEVEL)
}

pub fn impurity_witness_at(p: &FuncType, level: usize) -> Result<ImpurityWitness> {
    let Criterion::Impure(d) = impurity_criterion(p) else {
        return Err(Error::Witness(format!("{p} is pure")));
    };
    let b = Builder { level };
    let core = b.core_path(&d)?;
    let s = b.lift(&d.c1, core)?;
    validate(p, &d, s, level)
}

fn validate(p: &FuncType, d: &Decomposition, s: Vec<CAct>, level: usize) -> Result<ImpurityWitness> {
    let fail = |why: &str| Err(Error::Witness(format!("witness for {p}: {why}")));
    let beh = p.compile()?;
    let len = s.len() + 2;
    let v = visitable_set(&beh, level, len)?;
    if !v.contains(&s) {
        return fail("path is not visitable");
    }
    if !s.last().is_some_and(|a| a.is_daimon()) {
        return fail("path does not end with a daimon");
    }
    if !extensions(&v, &s).is_empty() {
        return fail("path is extensible");
    }
    let seq = to_seq(&s);
    if is_well_bracketed(&seq) {
        return fail("path is well-bracketed");
    }
    let sig = beh.signature();
    let n = completion(&crate::paths::dual(&seq)?, &sig)?;
    let skel = skeleton(&seq)?;
    let st = CTree::from_design(&skel)?;
    let (pd, is_skel) = if member_by_paths(&st, &v, true) {
        (skel, true)
    } else {
        (completion(&seq, &sig)?, false)
    };
    let pt = CTree::from_design(&pd)?;
    let nt = CTree::from_design(&n)?;
    let run = CTree::interact(&pt, &nt);
    if !run.converged() || run.path != s {
        return fail("interaction of the witness designs does not follow the path");
    }
    Ok(ImpurityWitness { p: pd, n, s: seq, decomposition: d.clone(), p_is_skeleton: is_skel })
}

// ---------------------------------------------------------------------------
// Reports

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FunctionalReport {
    pub ty: String,
    pub regular: CheckReport,
    pub quasi_pure: CheckReport,
    pub pure: CheckReport,
    pub criterion: Criterion,
    /// The criterion and the bounded purity check give the same answer.
    pub agrees: bool,
}

pub fn check_functional(p: &FuncType, level: usize, max_len: usize) -> Result<FunctionalReport> {
    let b = p.compile()?;
    let regular = check_regular(&b, level, max_len)?;
    let quasi_pure = check_quasi_pure(&b, level, max_len)?;
    let pure = check_pure(&b, level, max_len)?;
    let criterion = impurity_criterion(p);
    let agrees = matches!(criterion, Criterion::Pure) == pure.holds();
    Ok(FunctionalReport { ty: p.to_string(), regular, quasi_pure, pure, criterion, agrees })
}

/// All types of depth at most `depth` over the given leaves, by increasing depth.
pub fn corpus(leaves: &[FuncType], depth: usize) -> Vec<FuncType> {
    let mut level: Vec<FuncType> = leaves.to_vec();
    for _ in 1..depth {
        let mut next = leaves.to_vec();
        for a in &level {
            for b in &level {
                next.push(F::plus(a.clone(), b.clone()));
                next.push(F::tensor(a.clone(), b.clone()));
                next.push(F::limp(a.clone(), b.clone()));
            }
        }
        level = next;
    }
    level
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(s: &str) -> FuncType {
        parse_func_type(s).unwrap()
    }

    #[test]
    fn parsing() {
        assert_eq!(t("(Bool -o Bool) -o Bool").to_string(), "((Bool -o Bool) -o Bool)");
        assert_eq!(t("Bool -o Bool -o Bool"), F::limp(F::bool(), F::limp(F::bool(), F::bool())));
        assert_eq!(t("1"), F::name("u"));
        assert!(parse_func_type("Bool -o").is_err());
        assert!(parse_func_type("C_val").is_err());
    }

    #[test]
    fn criterion_examples() {
        match impurity_criterion(&t("(Bool -o Bool) -o Bool")) {
            Criterion::Impure(d) => {
                assert_eq!(d.c1, Context::hole());
                assert_eq!(d.c2, Context::hole());
                assert_eq!((d.q1, d.q2, d.r), (F::bool(), F::bool(), F::bool()));
            }
            Criterion::Pure => panic!("expected impure"),
        }
        assert_eq!(impurity_criterion(&t("Bool -o Bool")), Criterion::Pure);
        assert_eq!(impurity_criterion(&t("(Bool -o Bool) -o C_u")), Criterion::Pure);
        let p = t("Bool (*) ((C_u -o C_u) -o Bool)");
        match impurity_criterion(&p) {
            Criterion::Impure(d) => assert_eq!(d.rebuild(), p),
            Criterion::Pure => panic!("expected impure"),
        }
    }

    #[test]
    fn example_witness_has_eleven_actions() {
        let w = impurity_witness(&t("(1 -o 1) -o Bool")).unwrap();
        assert_eq!(w.s.len(), 11);
        assert!(w.p_is_skeleton);
        assert_eq!(w.p.action_count(), 11);
    }

    #[test]
    fn witnesses_validate() {
        for s in ["(Bool -o Bool) -o Bool", "Bool (*) ((C_u -o C_u) -o Bool)", "C_u -o ((Bool -o C_u) -o Bool)", "((Bool (+) C_u) -o Bool) -o (Bool (*) Bool)"] {
            let w = impurity_witness(&t(s)).unwrap();
            assert!(w.s.daimon_ended());
            assert!(!is_well_bracketed(&w.s));
        }
        assert!(impurity_witness(&t("Bool -o Bool")).is_err());
    }

    #[test]
    fn functional_reports() {
        let r = check_functional(&t("Bool -o Bool"), 3, 14).unwrap();
        assert!(r.regular.holds() && r.quasi_pure.holds() && r.pure.holds() && r.agrees);
        let r = check_functional(&t("(Bool -o Bool) -o Bool"), 3, 16).unwrap();
        assert!(r.regular.holds() && r.quasi_pure.holds() && !r.pure.holds() && r.agrees);
        let r = check_functional(&t("Nat -o Bool"), 2, 14).unwrap();
        assert!(r.pure.holds());
    }

    #[test]
    fn corpus_size() {
        let c = corpus(&[F::name("u"), F::bool()], 3);
        assert_eq!(c.len(), 590);
        assert!(c.iter().all(|x| x.depth() <= 3));
    }
}
