//! Located actions, views, paths and the designs built from them.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::hash::Hash;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::syntax::{Branch, Design, Name, Polarity, Signature, Var, X0};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Kind {
    Daimon,
    Pos,
    Neg,
}

impl Kind {
    pub fn positive(self) -> bool {
        self != Kind::Neg
    }
}

/// What the path algorithms need to know about an action.
pub trait Act: Clone + Eq + Hash + fmt::Debug {
    fn kind(&self) -> Kind;
    /// `other`'s address is one of the variables bound by `self`.
    fn binds(&self, other: &Self) -> bool;
    fn same_addr(&self, other: &Self) -> bool;
    fn flipped(&self) -> Self;
    fn daimon() -> Self;
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Action {
    Daimon,
    Pos { addr: Var, name: Name, bound: Vec<Var> },
    Neg { addr: Var, name: Name, bound: Vec<Var> },
}

impl Action {
    pub fn pos(addr: &str, name: &str, bound: &[&str]) -> Action {
        Action::Pos { addr: addr.into(), name: name.into(), bound: bound.iter().map(|b| b.to_string()).collect() }
    }

    pub fn neg(addr: &str, name: &str, bound: &[&str]) -> Action {
        Action::Neg { addr: addr.into(), name: name.into(), bound: bound.iter().map(|b| b.to_string()).collect() }
    }

    /// Action at `addr` with the standard loci `addr.1 .. addr.k` as bound variables.
    pub fn located(kind: Kind, addr: &str, name: &str, arity: usize) -> Action {
        let bound = (1..=arity).map(|i| format!("{addr}.{i}")).collect();
        match kind {
            Kind::Pos => Action::Pos { addr: addr.into(), name: name.into(), bound },
            Kind::Neg => Action::Neg { addr: addr.into(), name: name.into(), bound },
            Kind::Daimon => Action::Daimon,
        }
    }

    pub fn addr(&self) -> Option<&str> {
        match self {
            Action::Daimon => None,
            Action::Pos { addr, .. } | Action::Neg { addr, .. } => Some(addr),
        }
    }

    pub fn name(&self) -> Option<&str> {
        match self {
            Action::Daimon => None,
            Action::Pos { name, .. } | Action::Neg { name, .. } => Some(name),
        }
    }

    pub fn bound(&self) -> &[Var] {
        match self {
            Action::Daimon => &[],
            Action::Pos { bound, .. } | Action::Neg { bound, .. } => bound,
        }
    }

    pub fn is_proper(&self) -> bool {
        !matches!(self, Action::Daimon)
    }

    fn well_formed(&self) -> bool {
        match self {
            Action::Daimon => true,
            Action::Pos { addr, bound, .. } | Action::Neg { addr, bound, .. } => {
                let mut seen = HashSet::new();
                seen.insert(addr);
                bound.iter().all(|b| seen.insert(b))
            }
        }
    }
}

impl Act for Action {
    fn kind(&self) -> Kind {
        match self {
            Action::Daimon => Kind::Daimon,
            Action::Pos { .. } => Kind::Pos,
            Action::Neg { .. } => Kind::Neg,
        }
    }

    fn binds(&self, other: &Self) -> bool {
        match other.addr() {
            Some(a) => self.bound().iter().any(|b| b == a),
            None => false,
        }
    }

    fn same_addr(&self, other: &Self) -> bool {
        match (self.addr(), other.addr()) {
            (Some(a), Some(b)) => a == b,
            _ => false,
        }
    }

    fn flipped(&self) -> Self {
        match self {
            Action::Daimon => Action::Daimon,
            Action::Pos { addr, name, bound } => Action::Neg { addr: addr.clone(), name: name.clone(), bound: bound.clone() },
            Action::Neg { addr, name, bound } => Action::Pos { addr: addr.clone(), name: name.clone(), bound: bound.clone() },
        }
    }

    fn daimon() -> Self {
        Action::Daimon
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::Daimon => write!(f, "#"),
            Action::Pos { addr, name, bound } => write!(f, "{addr}|{name}<{}>", bound.join(",")),
            Action::Neg { addr, name, bound } => write!(f, "{name}_{addr}({})", bound.join(",")),
        }
    }
}

/// A finite sequence of located actions. Paths are sequences satisfying [`is_path`].
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Seq(pub Vec<Action>);

pub type Path = Seq;

impl Seq {
    pub fn new() -> Self {
        Seq(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn daimon_ended(&self) -> bool {
        matches!(self.0.last(), Some(Action::Daimon))
    }

    pub fn polarity(&self) -> Option<Polarity> {
        self.0.first().map(|a| if a.kind().positive() { Polarity::Positive } else { Polarity::Negative })
    }

    pub fn justifiers(&self) -> Vec<Option<usize>> {
        justifiers(&self.0)
    }

    pub fn pick(&self, idx: &[usize]) -> Seq {
        Seq(idx.iter().map(|&i| self.0[i].clone()).collect())
    }
}

impl fmt::Display for Seq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "()");
        }
        let parts: Vec<String> = self.0.iter().map(|a| a.to_string()).collect();
        write!(f, "{}", parts.join(" "))
    }
}

// ---------------------------------------------------------------------------
// Generic sequence machinery

pub fn justifier_in<A: Act>(prefix: &[A], a: &A) -> Option<usize> {
    if a.kind() == Kind::Daimon {
        return None;
    }
    let pos = a.kind().positive();
    prefix.iter().rposition(|b| b.kind() != Kind::Daimon && b.kind().positive() != pos && b.binds(a))
}

pub fn justifiers<A: Act>(s: &[A]) -> Vec<Option<usize>> {
    (0..s.len()).map(|i| justifier_in(&s[..i], &s[i])).collect()
}

/// Walk the view of `s[..end]`, last action first.
fn view_walk<A: Act>(s: &[A], just: &[Option<usize>], end: usize, mut f: impl FnMut(usize) -> bool) {
    let mut k = end;
    while k > 0 {
        let i = k - 1;
        if !f(i) {
            return;
        }
        k = match s[i].kind() {
            Kind::Neg => match just[i] {
                Some(j) => j + 1,
                None => 0,
            },
            _ => i,
        };
    }
}

/// Walk the anti-view of `s[..end]`, last action first.
fn antiview_walk<A: Act>(s: &[A], just: &[Option<usize>], end: usize, mut f: impl FnMut(usize) -> bool) {
    let mut k = end;
    while k > 0 {
        let i = k - 1;
        if !f(i) {
            return;
        }
        k = match s[i].kind() {
            Kind::Pos => match just[i] {
                Some(j) => j + 1,
                None => 0,
            },
            _ => i,
        };
    }
}

pub fn view_indices<A: Act>(s: &[A]) -> Vec<usize> {
    let just = justifiers(s);
    let mut out = Vec::new();
    view_walk(s, &just, s.len(), |i| {
        out.push(i);
        true
    });
    out.reverse();
    out
}

pub fn antiview_indices<A: Act>(s: &[A]) -> Vec<usize> {
    let just = justifiers(s);
    let mut out = Vec::new();
    antiview_walk(s, &just, s.len(), |i| {
        out.push(i);
        true
    });
    out.reverse();
    out
}

pub fn in_view<A: Act>(s: &[A], just: &[Option<usize>], end: usize, target: usize) -> bool {
    let mut found = false;
    view_walk(s, just, end, |i| {
        found = i == target;
        !found && i > target
    });
    found
}

pub fn in_antiview<A: Act>(s: &[A], just: &[Option<usize>], end: usize, target: usize) -> bool {
    let mut found = false;
    antiview_walk(s, just, end, |i| {
        found = i == target;
        !found && i > target
    });
    found
}

/// Alternation, daimon only last, and linearity of addresses.
pub fn aj_ok<A: Act>(s: &[A]) -> bool {
    for (i, a) in s.iter().enumerate() {
        if a.kind() == Kind::Daimon && i + 1 != s.len() {
            return false;
        }
        if i > 0 && s[i - 1].kind().positive() == a.kind().positive() {
            return false;
        }
        if a.kind() != Kind::Daimon && s[..i].iter().any(|b| b.same_addr(a)) {
            return false;
        }
    }
    true
}

pub fn path_ok<A: Act>(s: &[A]) -> bool {
    if !aj_ok(s) {
        return false;
    }
    if let Some(l) = s.last() {
        if !l.kind().positive() {
            return false;
        }
    }
    let just = justifiers(s);
    (0..s.len()).all(|i| match (s[i].kind(), just[i]) {
        (Kind::Pos, Some(j)) => in_view(s, &just, i, j),
        (Kind::Neg, Some(j)) => in_antiview(s, &just, i, j),
        _ => true,
    })
}

pub fn dual_of<A: Act>(s: &[A]) -> Vec<A> {
    match s.last() {
        Some(l) if l.kind() == Kind::Daimon => s[..s.len() - 1].iter().map(Act::flipped).collect(),
        _ => {
            let mut out: Vec<A> = s.iter().map(Act::flipped).collect();
            out.push(A::daimon());
            out
        }
    }
}

pub fn trivial_view_indices<A: Act>(s: &[A]) -> Vec<usize> {
    let just = justifiers(s);
    let mut out = Vec::new();
    let mut end = s.len();
    if end > 0 && s[end - 1].kind() == Kind::Daimon {
        out.push(end - 1);
        end -= 1;
    }
    let mut k = end.checked_sub(1);
    while let Some(i) = k {
        out.push(i);
        k = just[i];
    }
    out.reverse();
    out
}

pub fn hereditarily_justified(just: &[Option<usize>], i: usize, by: usize) -> bool {
    let mut k = Some(i);
    while let Some(c) = k {
        if c == by {
            return true;
        }
        if c < by {
            return false;
        }
        k = just[c];
    }
    false
}

pub fn well_bracketed_ok<A: Act>(s: &[A]) -> bool {
    let just = justifiers(s);
    (0..s.len()).all(|i| match just[i] {
        Some(j) => (j + 1..i).all(|k| hereditarily_justified(&just, k, j)),
        None => true,
    })
}

/// Merge two sequences so that each is recovered by restriction; every result is an aj-sequence.
pub fn merges<A: Act>(s: &[A], t: &[A], out: &mut Vec<Vec<A>>) {
    let sset: HashSet<&A> = s.iter().collect();
    let tset: HashSet<&A> = t.iter().collect();
    let mut u = Vec::new();
    merge_rec(s, t, 0, 0, &sset, &tset, &mut u, out);
}

#[allow(clippy::too_many_arguments)]
fn merge_rec<A: Act>(
    s: &[A],
    t: &[A],
    i: usize,
    j: usize,
    sset: &HashSet<&A>,
    tset: &HashSet<&A>,
    u: &mut Vec<A>,
    out: &mut Vec<Vec<A>>,
) {
    if i == s.len() && j == t.len() {
        out.push(u.clone());
        return;
    }
    let try_push = |a: &A, ni: usize, nj: usize, u: &mut Vec<A>, out: &mut Vec<Vec<A>>| {
        u.push(a.clone());
        if aj_ok(u) {
            merge_rec(s, t, ni, nj, sset, tset, u, out);
        }
        u.pop();
    };
    if i < s.len() && j < t.len() && s[i] == t[j] {
        try_push(&s[i], i + 1, j + 1, u, out);
    }
    if i < s.len() && !tset.contains(&s[i]) {
        try_push(&s[i], i + 1, j, u, out);
    }
    if j < t.len() && !sset.contains(&t[j]) {
        try_push(&t[j], i, j + 1, u, out);
    }
}

pub fn shuffle_of<A: Act + Ord>(s: &[A], t: &[A]) -> Result<Vec<Vec<A>>> {
    let pol = |x: &[A]| x.first().map(|a| a.kind().positive());
    let mut raw = Vec::new();
    match (pol(s), pol(t)) {
        (None, _) | (_, None) | (Some(false), Some(false)) => {
            if pol(s) == Some(true) || pol(t) == Some(true) {
                return Err(Error::Unsupported("shuffle of paths of different polarities".into()));
            }
            merges(s, t, &mut raw);
        }
        (Some(true), Some(true)) => {
            if s[0] != t[0] {
                return Err(Error::Unsupported("positive shuffle needs equal first actions".into()));
            }
            let mut inner = Vec::new();
            merges(&s[1..], &t[1..], &mut inner);
            for u in inner {
                let mut v = vec![s[0].clone()];
                v.extend(u);
                raw.push(v);
            }
        }
        _ => return Err(Error::Unsupported("shuffle of paths of different polarities".into())),
    }
    let mut res: Vec<Vec<A>> = raw.into_iter().filter(|u| path_ok(u)).collect();
    res.sort();
    res.dedup();
    Ok(res)
}

// ---------------------------------------------------------------------------
// Public operations on string-located sequences

pub fn is_aj_seq(s: &Seq) -> bool {
    s.0.iter().all(Action::well_formed) && aj_ok(&s.0)
}

pub fn is_path(s: &Seq) -> bool {
    s.0.iter().all(Action::well_formed) && path_ok(&s.0)
}

pub fn dual(s: &Seq) -> Result<Seq> {
    if s.0.iter().take(s.len().saturating_sub(1)).any(|a| *a == Action::Daimon) {
        return Err(Error::NotPath("daimon before the last position".into()));
    }
    Ok(Seq(dual_of(&s.0)))
}

pub fn view_of(s: &Seq) -> Seq {
    s.pick(&view_indices(&s.0))
}

pub fn anti_view_of(s: &Seq) -> Seq {
    s.pick(&antiview_indices(&s.0))
}

pub fn trivial_view_of(s: &Seq) -> Seq {
    s.pick(&trivial_view_indices(&s.0))
}

pub fn is_well_bracketed(s: &Seq) -> bool {
    well_bracketed_ok(&s.0)
}

pub fn shuffle(s: &Seq, t: &Seq) -> Result<Vec<Seq>> {
    Ok(shuffle_of(&s.0, &t.0)?.into_iter().map(Seq).collect())
}

pub fn anti_shuffle(s: &Seq, t: &Seq) -> Result<Vec<Seq>> {
    let ds = dual(s)?;
    let dt = dual(t)?;
    let mut out: Vec<Seq> = shuffle(&ds, &dt)?.iter().map(|u| dual(u)).collect::<Result<_>>()?;
    out.sort();
    Ok(out)
}

/// Rename loci so that every action at address `v` binds `v.1 .. v.k`.
pub fn canonicalize(s: &Seq) -> Seq {
    let mut map: HashMap<Var, Var> = HashMap::new();
    let mut out = Vec::with_capacity(s.len());
    for a in &s.0 {
        match a {
            Action::Daimon => out.push(Action::Daimon),
            Action::Pos { addr, name, bound } | Action::Neg { addr, name, bound } => {
                let na = map.get(addr).cloned().unwrap_or_else(|| addr.clone());
                let nb: Vec<Var> = (1..=bound.len()).map(|i| format!("{na}.{i}")).collect();
                for (b, c) in bound.iter().zip(&nb) {
                    map.insert(b.clone(), c.clone());
                }
                out.push(if matches!(a, Action::Pos { .. }) {
                    Action::Pos { addr: na, name: name.clone(), bound: nb }
                } else {
                    Action::Neg { addr: na, name: name.clone(), bound: nb }
                });
            }
        }
    }
    Seq(out)
}

// ---------------------------------------------------------------------------
// Located forests

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LNode {
    pub action: Action,
    pub children: Vec<LNode>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocatedForest {
    pub roots: Vec<LNode>,
}

pub fn locate(d: &Design) -> Result<LocatedForest> {
    if !d.is_cut_free() {
        return Err(Error::HasCuts);
    }
    let mut roots = Vec::new();
    match d {
        Design::Neg(_) => loc_neg(d, X0, &HashMap::new(), &mut roots),
        _ => {
            if let Some(n) = loc_pos(d, &HashMap::new()) {
                roots.push(n);
            }
        }
    }
    Ok(LocatedForest { roots })
}

fn loc_pos(d: &Design, env: &HashMap<Var, Var>) -> Option<LNode> {
    match d {
        Design::Omega => None,
        Design::Daimon => Some(LNode { action: Action::Daimon, children: vec![] }),
        Design::App { head, name, args } => {
            let addr = env.get(head).cloned().unwrap_or_else(|| head.clone());
            let action = Action::located(Kind::Pos, &addr, name, args.len());
            let mut children = Vec::new();
            for (i, a) in args.iter().enumerate() {
                loc_neg(a, &format!("{addr}.{}", i + 1), env, &mut children);
            }
            Some(LNode { action, children })
        }
        Design::Cut { .. } | Design::Neg(_) => None,
    }
}

fn loc_neg(d: &Design, addr: &str, env: &HashMap<Var, Var>, out: &mut Vec<LNode>) {
    if let Design::Neg(bs) = d {
        for (name, b) in bs {
            if b.body == Design::Omega {
                continue;
            }
            let action = Action::located(Kind::Neg, addr, name, b.vars.len());
            let mut inner = env.clone();
            for (i, v) in b.vars.iter().enumerate() {
                inner.insert(v.clone(), format!("{addr}.{}", i + 1));
            }
            let children = loc_pos(&b.body, &inner).into_iter().collect();
            out.push(LNode { action, children });
        }
    }
}

/// Rebuild a design from a forest whose bound variables are the ones written in the actions.
pub fn unlocate(f: &LocatedForest, polarity: Polarity) -> Design {
    match polarity {
        Polarity::Negative => unloc_sum(&f.roots),
        Polarity::Positive => f.roots.first().map(unloc_pos).unwrap_or(Design::Omega),
    }
}

fn unloc_pos(n: &LNode) -> Design {
    match &n.action {
        Action::Daimon => Design::Daimon,
        Action::Pos { addr, name, bound } => {
            let args = bound
                .iter()
                .map(|b| {
                    let kids: Vec<LNode> =
                        n.children.iter().filter(|c| c.action.addr() == Some(b.as_str())).cloned().collect();
                    unloc_sum(&kids)
                })
                .collect();
            Design::App { head: addr.clone(), name: name.clone(), args }
        }
        Action::Neg { .. } => Design::Omega,
    }
}

fn unloc_sum(kids: &[LNode]) -> Design {
    let mut bs = BTreeMap::new();
    for k in kids {
        if let Action::Neg { name, bound, .. } = &k.action {
            let body = k.children.first().map(unloc_pos).unwrap_or(Design::Omega);
            bs.insert(name.clone(), Branch { vars: bound.clone(), body });
        }
    }
    Design::Neg(bs)
}

impl LocatedForest {
    /// The node reached by following `view` from a root.
    pub fn find(&self, view: &[Action]) -> Option<&LNode> {
        let (first, rest) = view.split_first()?;
        let mut node = self.roots.iter().find(|r| r.action == *first)?;
        for a in rest {
            node = node.children.iter().find(|c| c.action == *a)?;
        }
        Some(node)
    }

    pub fn has_branch(&self, view: &[Action]) -> bool {
        view.is_empty() || self.find(view).is_some()
    }

    /// All root-to-node branches.
    pub fn views(&self) -> Vec<Seq> {
        let mut out = Vec::new();
        fn go(n: &LNode, cur: &mut Vec<Action>, out: &mut Vec<Seq>) {
            cur.push(n.action.clone());
            out.push(Seq(cur.clone()));
            for c in &n.children {
                go(c, cur, out);
            }
            cur.pop();
        }
        for r in &self.roots {
            go(r, &mut Vec::new(), &mut out);
        }
        out
    }

    pub fn size(&self) -> usize {
        fn count(n: &LNode) -> usize {
            1 + n.children.iter().map(count).sum::<usize>()
        }
        self.roots.iter().map(count).sum()
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        fn go(n: &LNode, depth: usize, out: &mut String) {
            out.push_str(&"  ".repeat(depth));
            out.push_str(&n.action.to_string());
            out.push('\n');
            for c in &n.children {
                go(c, depth + 1, out);
            }
        }
        for r in &self.roots {
            go(r, 0, &mut out);
        }
        out
    }

    /// DOT graph read bottom-up: roots at the bottom, children above.
    pub fn render_dot(&self) -> String {
        let mut out = String::from("digraph design {\n  rankdir=BT;\n  node [shape=plaintext];\n");
        let mut id = 0;
        fn go(n: &LNode, parent: Option<usize>, id: &mut usize, out: &mut String) {
            let me = *id;
            *id += 1;
            let label = n.action.to_string().replace('"', "\\\"");
            out.push_str(&format!("  n{me} [label=\"{label}\"];\n"));
            if let Some(p) = parent {
                out.push_str(&format!("  n{p} -> n{me} [arrowhead=none];\n"));
            }
            for c in &n.children {
                go(c, Some(me), id, out);
            }
        }
        for r in &self.roots {
            go(r, None, &mut id, &mut out);
        }
        out.push_str("}\n");
        out
    }
}

// ---------------------------------------------------------------------------
// Paths of a design

pub fn is_path_of(s: &Seq, d: &Design) -> Result<bool> {
    let f = locate(d)?;
    Ok(path_of_forest(&canonicalize(s), &f))
}

pub(crate) fn path_of_forest(s: &Seq, f: &LocatedForest) -> bool {
    if !is_path(s) {
        return false;
    }
    let just = s.justifiers();
    let mut view: Vec<usize> = Vec::new();
    for i in 0..s.len() {
        view.clear();
        view_walk(&s.0, &just, i + 1, |k| {
            view.push(k);
            true
        });
        view.reverse();
        let v: Vec<Action> = view.iter().map(|&k| s.0[k].clone()).collect();
        if !f.has_branch(&v) {
            return false;
        }
    }
    true
}

/// Paths of a cut-free design up to `max_len` actions, found by a guided search over its forest.
pub fn paths_of(d: &Design, max_len: usize) -> Result<Vec<Seq>> {
    let f = locate(d)?;
    let mut out = Vec::new();
    let negative = d.is_negative();
    let mut st = Walk { f: &f, max_len, nodes: Vec::new(), acts: Vec::new(), just: Vec::new() };
    if negative {
        out.push(Seq::new());
        st.extend(&mut out);
    } else if let Some(root) = f.roots.first() {
        if max_len >= 1 {
            st.push(root);
            out.push(Seq(st.acts.clone()));
            st.extend(&mut out);
        }
    }
    out.sort();
    Ok(out)
}

struct Walk<'a> {
    f: &'a LocatedForest,
    max_len: usize,
    nodes: Vec<&'a LNode>,
    acts: Vec<Action>,
    just: Vec<Option<usize>>,
}

impl<'a> Walk<'a> {
    fn push(&mut self, n: &'a LNode) {
        let j = justifier_in(&self.acts, &n.action);
        self.nodes.push(n);
        self.acts.push(n.action.clone());
        self.just.push(j);
    }

    fn pop(&mut self) {
        self.nodes.pop();
        self.acts.pop();
        self.just.pop();
    }

    fn legal_neg(&self, n: &LNode) -> bool {
        if self.acts.iter().any(|a| a.same_addr(&n.action)) {
            return false;
        }
        match justifier_in(&self.acts, &n.action) {
            Some(j) => in_antiview(&self.acts, &self.just, self.acts.len(), j),
            None => true,
        }
    }

    fn extend(&mut self, out: &mut Vec<Seq>) {
        if self.acts.len() + 2 > self.max_len || matches!(self.acts.last(), Some(Action::Daimon)) {
            return;
        }
        let mut opts: Vec<&'a LNode> = Vec::new();
        if self.acts.is_empty() {
            opts.extend(self.f.roots.iter());
        } else {
            for (k, n) in self.nodes.iter().enumerate() {
                if self.acts[k].kind() == Kind::Pos {
                    opts.extend(n.children.iter());
                }
            }
            // further initial negatives of a non-atomic negative design
            opts.extend(self.f.roots.iter().filter(|r| r.action.kind() == Kind::Neg));
        }
        for c in opts {
            if !self.legal_neg(c) {
                continue;
            }
            let Some(p) = c.children.first() else { continue };
            self.push(c);
            if p.action == Action::Daimon || !self.acts.iter().any(|a| a.same_addr(&p.action)) {
                self.push(p);
                out.push(Seq(self.acts.clone()));
                self.extend(out);
                self.pop();
            }
            self.pop();
        }
    }
}

// ---------------------------------------------------------------------------
// Designs built from paths

/// ⌈s⌉: the ⪯-greatest design having `s` as a path.
pub fn completion(s: &Seq, sig: &Signature) -> Result<Design> {
    completion_with(s, sig, None)
}

/// Completion of a possibly empty path, with the polarity given for ε.
pub fn completion_with(s: &Seq, sig: &Signature, empty: Option<Polarity>) -> Result<Design> {
    if !is_path(s) {
        return Err(Error::NotPath(s.to_string()));
    }
    let tree = PathTree::new(s);
    match s.0.first() {
        None => Ok(match empty.unwrap_or(Polarity::Negative) {
            Polarity::Positive => Design::Daimon,
            Polarity::Negative => tree.sum(X0, None, sig, true),
        }),
        Some(Action::Neg { addr, .. }) => Ok(tree.sum(addr, Some(0), sig, true)),
        Some(_) => Ok(tree.pos(0, sig, true)),
    }
}

/// The design whose views are exactly those of the prefixes of `s`; Ω everywhere else.
pub fn skeleton(s: &Seq) -> Result<Design> {
    if !is_path(s) {
        return Err(Error::NotPath(s.to_string()));
    }
    let tree = PathTree::new(s);
    let sig = Signature::new();
    match s.0.first() {
        None => Ok(Design::empty_neg()),
        Some(Action::Neg { addr, .. }) => Ok(tree.sum(addr, Some(0), &sig, false)),
        Some(_) => Ok(tree.pos(0, &sig, false)),
    }
}

struct PathTree<'a> {
    s: &'a Seq,
    at: HashMap<&'a str, usize>,
}

impl<'a> PathTree<'a> {
    fn new(s: &'a Seq) -> Self {
        let mut at = HashMap::new();
        for (i, a) in s.0.iter().enumerate() {
            if let Some(x) = a.addr() {
                at.insert(x, i);
            }
        }
        PathTree { s, at }
    }

    fn pos(&self, i: usize, sig: &Signature, pad: bool) -> Design {
        match &self.s.0[i] {
            Action::Daimon => Design::Daimon,
            Action::Pos { addr, name, bound } => Design::App {
                head: addr.clone(),
                name: name.clone(),
                args: bound.iter().map(|b| self.sum(b, self.at.get(b.as_str()).copied(), sig, pad)).collect(),
            },
            Action::Neg { .. } => Design::Omega,
        }
    }

    fn sum(&self, addr: &str, taken: Option<usize>, sig: &Signature, pad: bool) -> Design {
        let mut bs = BTreeMap::new();
        if pad {
            for (n, k) in sig.names() {
                let vars = (1..=k).map(|i| format!("{addr}.{i}")).collect();
                bs.insert(n.to_string(), Branch { vars, body: Design::Daimon });
            }
        }
        if let Some(i) = taken {
            if let Action::Neg { name, bound, .. } = &self.s.0[i] {
                let body = if i + 1 < self.s.len() { self.pos(i + 1, sig, pad) } else { Design::Omega };
                bs.insert(name.clone(), Branch { vars: bound.clone(), body });
            }
        }
        Design::Neg(bs)
    }
}

/// Design whose located forest is the union of the given views.
pub fn design_of_views(views: &[Seq], polarity: Polarity) -> Design {
    let mut roots: Vec<LNode> = Vec::new();
    for v in views {
        let mut level = &mut roots;
        for a in &v.0 {
            let idx = match level.iter().position(|n| n.action == *a) {
                Some(i) => i,
                None => {
                    level.push(LNode { action: a.clone(), children: vec![] });
                    level.len() - 1
                }
            };
            level = &mut level[idx].children;
        }
    }
    unlocate(&LocatedForest { roots }, polarity)
}

// ---------------------------------------------------------------------------
// Text and JSON forms

pub fn parse_action(tok: &str) -> Result<Action> {
    let bad = || Error::Parse(format!("bad action '{tok}'"));
    if tok == "#" {
        return Ok(Action::Daimon);
    }
    let split = |inner: &str| -> Vec<String> {
        inner.split(',').map(|v| v.trim().to_string()).filter(|v| !v.is_empty()).collect()
    };
    if let Some(bar) = tok.find('|') {
        let addr = &tok[..bar];
        let rest = &tok[bar + 1..];
        let lt = rest.find('<').ok_or_else(bad)?;
        if !rest.ends_with('>') {
            return Err(bad());
        }
        let name = &rest[..lt];
        let bound = split(&rest[lt + 1..rest.len() - 1]);
        if addr.is_empty() || name.is_empty() {
            return Err(bad());
        }
        return Ok(Action::Pos { addr: addr.into(), name: name.into(), bound });
    }
    let us = tok.find('_').ok_or_else(bad)?;
    let lp = tok.find('(').ok_or_else(bad)?;
    if lp < us || !tok.ends_with(')') {
        return Err(bad());
    }
    let name = &tok[..us];
    let addr = &tok[us + 1..lp];
    if addr.is_empty() || name.is_empty() {
        return Err(bad());
    }
    Ok(Action::Neg { addr: addr.into(), name: name.into(), bound: split(&tok[lp + 1..tok.len() - 1]) })
}

/// Space-separated actions; `()` or an empty string is the empty sequence.
pub fn parse_seq(text: &str) -> Result<Seq> {
    let t = text.trim();
    if t.is_empty() || t == "()" {
        return Ok(Seq::new());
    }
    // commas inside brackets may be followed by spaces; rejoin them first
    let mut toks: Vec<String> = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    for c in t.chars() {
        match c {
            '<' | '(' => depth += 1,
            '>' | ')' => depth -= 1,
            _ => {}
        }
        if c.is_whitespace() && depth == 0 {
            if !cur.is_empty() {
                toks.push(std::mem::take(&mut cur));
            }
        } else if !c.is_whitespace() {
            cur.push(c);
        }
    }
    if !cur.is_empty() {
        toks.push(cur);
    }
    Ok(Seq(toks.iter().map(|s| parse_action(s)).collect::<Result<_>>()?))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct JsonAction {
    pub kind: Kind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub addr: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default)]
    pub bound: Vec<String>,
    pub justifier: Option<usize>,
}

pub fn seq_to_json(s: &Seq) -> serde_json::Value {
    let just = s.justifiers();
    let items: Vec<JsonAction> = s
        .0
        .iter()
        .zip(just)
        .map(|(a, j)| JsonAction {
            kind: a.kind(),
            addr: a.addr().map(str::to_string),
            name: a.name().map(str::to_string),
            bound: a.bound().to_vec(),
            justifier: j,
        })
        .collect();
    serde_json::to_value(items).unwrap_or(serde_json::Value::Null)
}

pub fn seq_from_json(v: &serde_json::Value) -> Result<Seq> {
    let items: Vec<JsonAction> =
        serde_json::from_value(v.clone()).map_err(|e| Error::Parse(format!("path json: {e}")))?;
    let mut out = Vec::new();
    for it in items {
        let mk = |it: &JsonAction| -> Result<(String, String)> {
            Ok((
                it.addr.clone().ok_or_else(|| Error::Parse("missing addr".into()))?,
                it.name.clone().ok_or_else(|| Error::Parse("missing name".into()))?,
            ))
        };
        out.push(match it.kind {
            Kind::Daimon => Action::Daimon,
            Kind::Pos => {
                let (addr, name) = mk(&it)?;
                Action::Pos { addr, name, bound: it.bound.clone() }
            }
            Kind::Neg => {
                let (addr, name) = mk(&it)?;
                Action::Neg { addr, name, bound: it.bound.clone() }
            }
        });
    }
    let s = Seq(out);
    let declared: Vec<Option<usize>> = v
        .as_array()
        .map(|a| a.iter().map(|x| x.get("justifier").and_then(|j| j.as_u64()).map(|j| j as usize)).collect())
        .unwrap_or_default();
    if declared != s.justifiers() {
        return Err(Error::Parse("justifier indices do not match the addresses".into()));
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_design_infer;

    fn d(s: &str) -> Design {
        parse_design_infer(s, &mut Signature::new()).unwrap()
    }

    fn q(s: &str) -> Seq {
        parse_seq(s).unwrap()
    }

    const EX: &str = "a(x1,x2).(x2 | b<a(x3,x4).# + c(y1).(y1|d<>), c(y2).(x1|d<>)>)";

    #[test]
    fn duals() {
        assert_eq!(dual(&q("#")).unwrap(), Seq::new());
        assert_eq!(dual(&q("x0|b<>")).unwrap(), q("b_x0() #"));
        let s = q("x0|a<x0.1> b_x0.1() #");
        assert_eq!(dual(&dual(&s).unwrap()).unwrap(), s);
    }

    #[test]
    fn locate_example_tree() {
        let f = locate(&d(EX)).unwrap();
        assert_eq!(f.roots.len(), 1);
        let root = &f.roots[0];
        assert_eq!(root.action, Action::neg("x0", "a", &["x0.1", "x0.2"]));
        assert_eq!(root.children.len(), 1);
        let b = &root.children[0];
        assert_eq!(b.action, Action::pos("x0.2", "b", &["x0.2.1", "x0.2.2"]));
        assert_eq!(b.children.len(), 3);
        assert_eq!(locate(&Design::Daimon).unwrap().roots[0].action, Action::Daimon);
        assert_eq!(locate(&d("a(x).# + b(y).#")).unwrap().roots.len(), 2);
    }

    #[test]
    fn example_path_and_view() {
        let design = d(EX);
        // the path climbing through c at z1, then jumping to c at z2
        let red = q("a_x0(x0.1,x0.2) x0.2|b<x0.2.1,x0.2.2> c_x0.2.1(x0.2.1.1) x0.2.1.1|d<> c_x0.2.2(x0.2.2.1) x0.1|d<>");
        assert!(is_path(&red));
        assert!(is_path_of(&red, &design).unwrap());
        let v = view_of(&red);
        assert_eq!(v, q("a_x0(x0.1,x0.2) x0.2|b<x0.2.1,x0.2.2> c_x0.2.2(x0.2.2.1) x0.1|d<>"));
        let ps = paths_of(&design, 12).unwrap();
        assert!(ps.contains(&red));
        for p in &ps {
            assert!(is_path_of(p, &design).unwrap());
        }
    }

    #[test]
    fn views_are_paths() {
        let design = d(EX);
        let f = locate(&design).unwrap();
        for v in f.views() {
            if v.0.last().map(|a| a.kind().positive()).unwrap_or(true) {
                assert!(is_path_of(&v, &design).unwrap(), "{v}");
            }
        }
    }

    #[test]
    fn alternation_violation() {
        assert!(!is_path(&q("x0|a<x0.1> x0.1|b<>")));
        assert!(!is_aj_seq(&q("# x0|a<>")));
    }

    #[test]
    fn initial_negative_view() {
        let s = q("a_x0(x0.1) x0.1|b<x0.1.1> c_y()");
        assert_eq!(view_of(&s), q("c_y()"));
    }

    #[test]
    fn trivial_views() {
        assert_eq!(trivial_view_of(&Seq::new()), Seq::new());
        let s = q("a_x0(x0.1,x0.2) x0.2|b<x0.2.1,x0.2.2> c_x0.2.1(x0.2.1.1) x0.2.1.1|d<> c_x0.2.2(x0.2.2.1) x0.1|d<>");
        assert_eq!(trivial_view_of(&s), q("a_x0(x0.1,x0.2) x0.1|d<>"));
        let mut t = s.clone();
        t.0.pop();
        t.0.push(Action::Daimon);
        assert_eq!(trivial_view_of(&t), q("a_x0(x0.1,x0.2) x0.2|b<x0.2.1,x0.2.2> c_x0.2.2(x0.2.2.1) #"));
    }

    #[test]
    fn small_shuffle() {
        let s = q("a_x() y|p<>");
        let t = q("b_z() w|q<>");
        let r = shuffle(&s, &t).unwrap();
        assert_eq!(r.len(), 2);
        assert_eq!(shuffle(&s, &Seq::new()).unwrap(), vec![s.clone()]);
        assert!(shuffle(&q("x0|a<>"), &q("x0|b<>")).is_err());
    }

    #[test]
    fn completion_example() {
        let mut sig = Signature::new();
        for (n, k) in [("a", 2), ("b", 1), ("c", 0), ("d", 1), ("e", 0)] {
            sig.declare(n, k).unwrap();
        }
        let s = q("x0|a<x0.1,x0.2> b_x0.1(x0.1.1) x0.1.1|e<> c_x0.2() #");
        let c = completion(&s, &sig).unwrap();
        let Design::App { args, .. } = &c else { panic!() };
        let Design::Neg(first) = &args[0] else { panic!() };
        assert_eq!(first.len(), sig.len());
        assert_eq!(first["b"].body, Design::app("x0.1.1", "e", vec![]));
        assert!(first.iter().filter(|(n, _)| *n != "b").all(|(_, b)| b.body == Design::Daimon));
        let Design::Neg(second) = &args[1] else { panic!() };
        assert!(second.values().all(|b| b.body == Design::Daimon));
        assert!(is_path_of(&s, &c).unwrap());
        assert_eq!(completion(&q("#"), &sig).unwrap(), Design::Daimon);
    }

    #[test]
    fn brackets() {
        assert!(is_well_bracketed(&q("#")));
        let s = q("a_x0(x0.1,x0.2) x0.2|b<x0.2.1,x0.2.2> c_x0.2.1(x0.2.1.1) x0.2.1.1|d<> c_x0.2.2(x0.2.2.1) x0.1|d<>");
        assert!(is_well_bracketed(&s));
        let t = q("a_x0(x0.1,x0.2) x0.2|b<x0.2.1,x0.2.2> c_x0.2.1(x0.2.1.1,x0.2.1.2) x0.2.1.1|d<> c_x0.2.2(x0.2.2.1,x0.2.2.2) x0.2.1.2|d<>");
        assert!(is_aj_seq(&t));
        assert!(!is_well_bracketed(&t));
    }

    #[test]
    fn json_roundtrip() {
        let s = q("x0|a<x0.1> b_x0.1() #");
        assert_eq!(seq_from_json(&seq_to_json(&s)).unwrap(), s);
    }
}
