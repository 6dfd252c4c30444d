//! Packed actions, prefix trees of paths and located design trees.
//!
//! Everything here lives under the root address `x0`, with bound variables named by loci,
//! so an action is a few machine words and paths can be shared in tries.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Mutex, OnceLock};

use crate::error::{Error, Result};
use crate::paths::{in_antiview, in_view, justifier_in, Act, Action, Kind, LNode, LocatedForest, Seq};
use crate::syntax::{Design, Polarity, RESERVED, X0};

// ---------------------------------------------------------------------------
// Names

fn names() -> &'static Mutex<(Vec<String>, HashMap<String, u16>)> {
    static T: OnceLock<Mutex<(Vec<String>, HashMap<String, u16>)>> = OnceLock::new();
    T.get_or_init(|| {
        let v: Vec<String> = RESERVED.iter().map(|(n, _)| n.to_string()).collect();
        let m = v.iter().enumerate().map(|(i, n)| (n.clone(), i as u16)).collect();
        Mutex::new((v, m))
    })
}

/// Process-wide id of a name.
pub fn name_id(name: &str) -> u16 {
    let mut t = names().lock().unwrap();
    if let Some(&i) = t.1.get(name) {
        return i;
    }
    let i = t.0.len() as u16;
    t.0.push(name.to_string());
    t.1.insert(name.to_string(), i);
    i
}

pub fn name_of(id: u16) -> String {
    names().lock().unwrap().0[id as usize].clone()
}

// ---------------------------------------------------------------------------
// Loci

/// A locus `x0.d1.d2...`, stored as 4-bit digits with `d1` in the low bits.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Locus(u128);

impl Locus {
    pub const ROOT: Locus = Locus(0);
    pub const MAX_DEPTH: usize = 32;
    pub const MAX_DIGIT: usize = 15;

    pub fn depth(self) -> usize {
        (128 - self.0.leading_zeros() as usize).div_ceil(4)
    }

    pub fn child(self, i: usize) -> Option<Locus> {
        let d = self.depth();
        if i == 0 || i > Self::MAX_DIGIT || d >= Self::MAX_DEPTH {
            return None;
        }
        Some(Locus(self.0 | (i as u128) << (4 * d)))
    }

    pub fn parent(self) -> Option<Locus> {
        let d = self.depth();
        (d > 0).then(|| Locus(self.0 & !(0xF << (4 * (d - 1)))))
    }

    pub fn last(self) -> usize {
        match self.depth() {
            0 => 0,
            d => (self.0 >> (4 * (d - 1))) as usize & 0xF,
        }
    }

    /// The same locus seen from `x0.i`: `x0.a.b` becomes `x0.i.a.b`.
    pub fn under(self, i: usize) -> Option<Locus> {
        if i == 0 || i > Self::MAX_DIGIT || self.depth() >= Self::MAX_DEPTH {
            return None;
        }
        Some(Locus(self.0 << 4 | i as u128))
    }

    pub fn parse(s: &str) -> Result<Locus> {
        let mut parts = s.split('.');
        if parts.next() != Some(X0) {
            return Err(Error::Unsupported(format!("address {s} is not below x0")));
        }
        let mut l = Locus::ROOT;
        for p in parts {
            let i: usize = p.parse().map_err(|_| Error::Parse(format!("bad locus {s}")))?;
            l = l.child(i).ok_or_else(|| Error::Unsupported(format!("locus {s} out of range")))?;
        }
        Ok(l)
    }
}

impl fmt::Display for Locus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{X0}")?;
        let mut v = self.0;
        while v != 0 {
            write!(f, ".{}", v & 0xF)?;
            v >>= 4;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Packed actions

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CAct {
    pub kind: Kind,
    pub addr: Locus,
    pub name: u16,
    pub arity: u8,
}

impl CAct {
    pub const DAIMON: CAct = CAct { kind: Kind::Daimon, addr: Locus::ROOT, name: 0, arity: 0 };

    pub fn pos(addr: Locus, name: &str, arity: usize) -> CAct {
        CAct { kind: Kind::Pos, addr, name: name_id(name), arity: arity as u8 }
    }

    pub fn neg(addr: Locus, name: &str, arity: usize) -> CAct {
        CAct { kind: Kind::Neg, addr, name: name_id(name), arity: arity as u8 }
    }

    pub fn is_daimon(&self) -> bool {
        self.kind == Kind::Daimon
    }

    /// Bound loci `addr.1 .. addr.k`.
    pub fn bound(&self) -> impl Iterator<Item = Locus> + '_ {
        (1..=self.arity as usize).filter_map(|i| self.addr.child(i))
    }

    pub fn reloc(&self, i: usize) -> Option<CAct> {
        if self.is_daimon() {
            return Some(*self);
        }
        Some(CAct { addr: self.addr.under(i)?, ..*self })
    }

    pub fn to_action(&self) -> Action {
        match self.kind {
            Kind::Daimon => Action::Daimon,
            k => Action::located(k, &self.addr.to_string(), &name_of(self.name), self.arity as usize),
        }
    }

    pub fn from_action(a: &Action) -> Result<CAct> {
        let (Some(addr), Some(name)) = (a.addr(), a.name()) else { return Ok(CAct::DAIMON) };
        let l = Locus::parse(addr)?;
        if a.bound().len() > Locus::MAX_DIGIT {
            return Err(Error::Unsupported(format!("arity of {name} is too large")));
        }
        for (i, b) in a.bound().iter().enumerate() {
            if *b != format!("{addr}.{}", i + 1) {
                return Err(Error::Unsupported(format!("action {a} is not located")));
            }
        }
        let kind = if a.kind() == Kind::Pos { Kind::Pos } else { Kind::Neg };
        Ok(CAct { kind, addr: l, name: name_id(name), arity: a.bound().len() as u8 })
    }
}

impl Act for CAct {
    fn kind(&self) -> Kind {
        self.kind
    }

    fn binds(&self, other: &Self) -> bool {
        !self.is_daimon()
            && !other.is_daimon()
            && other.addr.parent() == Some(self.addr)
            && other.addr.last() <= self.arity as usize
    }

    fn same_addr(&self, other: &Self) -> bool {
        !self.is_daimon() && !other.is_daimon() && self.addr == other.addr
    }

    fn flipped(&self) -> Self {
        let kind = match self.kind {
            Kind::Pos => Kind::Neg,
            Kind::Neg => Kind::Pos,
            Kind::Daimon => Kind::Daimon,
        };
        CAct { kind, ..*self }
    }

    fn daimon() -> Self {
        CAct::DAIMON
    }
}

impl fmt::Display for CAct {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_action())
    }
}

pub fn to_seq(p: &[CAct]) -> Seq {
    Seq(p.iter().map(CAct::to_action).collect())
}

pub fn from_seq(s: &Seq) -> Result<Vec<CAct>> {
    s.0.iter().map(CAct::from_action).collect()
}

/// Justifier of `a` if appending it to `u` keeps a prefix of a path: alternation, linearity
/// and P/O-visibility. `None` means the action cannot be appended.
pub fn can_append<A: Act>(u: &[A], just: &[Option<usize>], a: &A) -> Option<Option<usize>> {
    if let Some(l) = u.last() {
        if l.kind() == Kind::Daimon || l.kind().positive() == a.kind().positive() {
            return None;
        }
    }
    if a.kind() == Kind::Daimon {
        return Some(None);
    }
    if u.iter().any(|b| b.same_addr(a)) {
        return None;
    }
    let j = justifier_in(u, a);
    if let Some(j) = j {
        let ok = match a.kind() {
            Kind::Pos => in_view(u, just, u.len(), j),
            _ => in_antiview(u, just, u.len(), j),
        };
        if !ok {
            return None;
        }
    }
    Some(j)
}

// ---------------------------------------------------------------------------
// Sets of paths as tries

const NIL: u32 = u32::MAX;

#[derive(Clone, Copy, Debug)]
struct TNode {
    act: CAct,
    first: u32,
    next: u32,
    member: bool,
}

/// A set of sequences sharing prefixes; `member` marks the sequences that belong to the set.
#[derive(Clone, Debug)]
pub struct PathSet {
    nodes: Vec<TNode>,
}

impl Default for PathSet {
    fn default() -> Self {
        Self::new()
    }
}

impl PathSet {
    pub const ROOT: u32 = 0;

    pub fn new() -> Self {
        PathSet { nodes: vec![TNode { act: CAct::DAIMON, first: NIL, next: NIL, member: false }] }
    }

    pub fn act(&self, n: u32) -> CAct {
        self.nodes[n as usize].act
    }

    pub fn is_member(&self, n: u32) -> bool {
        self.nodes[n as usize].member
    }

    pub fn set_member(&mut self, n: u32) {
        self.nodes[n as usize].member = true;
    }

    pub fn children(&self, n: u32) -> Children<'_> {
        Children { set: self, cur: self.nodes[n as usize].first }
    }

    pub fn child(&self, n: u32, a: &CAct) -> Option<u32> {
        self.children(n).find(|&c| self.nodes[c as usize].act == *a)
    }

    pub fn add_child(&mut self, n: u32, a: CAct) -> u32 {
        if let Some(c) = self.child(n, &a) {
            return c;
        }
        let id = self.nodes.len() as u32;
        let first = self.nodes[n as usize].first;
        self.nodes.push(TNode { act: a, first: NIL, next: first, member: false });
        self.nodes[n as usize].first = id;
        id
    }

    pub fn find(&self, p: &[CAct]) -> Option<u32> {
        let mut n = Self::ROOT;
        for a in p {
            n = self.child(n, a)?;
        }
        Some(n)
    }

    pub fn contains(&self, p: &[CAct]) -> bool {
        self.find(p).is_some_and(|n| self.is_member(n))
    }

    pub fn insert(&mut self, p: &[CAct]) {
        let mut n = Self::ROOT;
        for a in p {
            n = self.add_child(n, *a);
        }
        self.set_member(n);
    }

    pub fn len(&self) -> usize {
        self.nodes.iter().filter(|n| n.member).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Members in lexicographic order.
    pub fn paths(&self) -> Vec<Vec<CAct>> {
        let mut out = Vec::new();
        let mut cur = Vec::new();
        self.collect(Self::ROOT, &mut cur, &mut out);
        out.sort();
        out
    }

    fn collect(&self, n: u32, cur: &mut Vec<CAct>, out: &mut Vec<Vec<CAct>>) {
        if self.is_member(n) {
            out.push(cur.clone());
        }
        for c in self.children(n) {
            cur.push(self.act(c));
            self.collect(c, cur, out);
            cur.pop();
        }
    }

    /// Visit every node with the sequence leading to it.
    pub fn for_each_node(&self, mut f: impl FnMut(u32, &[CAct])) {
        let mut cur = Vec::new();
        self.walk_nodes(Self::ROOT, &mut cur, &mut f);
    }

    fn walk_nodes(&self, n: u32, cur: &mut Vec<CAct>, f: &mut impl FnMut(u32, &[CAct])) {
        f(n, cur);
        for c in self.children(n) {
            cur.push(self.act(c));
            self.walk_nodes(c, cur, f);
            cur.pop();
        }
    }

    /// Copy the members of `src`, relocated below `x0.i` when `reloc` is given, under node `at`.
    /// Sequences that would exceed `max_len` actions below `at` are dropped.
    pub fn graft(&mut self, at: u32, src: &PathSet, reloc: Option<usize>, max_len: usize) -> Result<()> {
        let mut stack = vec![(Self::ROOT, at, 0usize)];
        while let Some((s, t, d)) = stack.pop() {
            if src.is_member(s) {
                self.set_member(t);
            }
            if d == max_len {
                continue;
            }
            for c in src.children(s) {
                let a = src.act(c);
                let a = match reloc {
                    Some(i) => a.reloc(i).ok_or_else(|| Error::Unsupported("paths too deep".into()))?,
                    None => a,
                };
                let tc = self.add_child(t, a);
                stack.push((c, tc, d + 1));
            }
        }
        Ok(())
    }

    /// The duals of the members, keeping those of at most `max_len` actions.
    pub fn dual(&self, max_len: usize) -> PathSet {
        let mut out = PathSet::new();
        let mut stack = vec![(Self::ROOT, Self::ROOT, 0usize)];
        while let Some((s, t, d)) = stack.pop() {
            if self.children(s).any(|c| self.act(c).is_daimon() && self.is_member(c)) {
                out.set_member(t);
            }
            if self.is_member(s) && d < max_len && (s == Self::ROOT || !self.act(s).is_daimon()) {
                let k = out.add_child(t, CAct::DAIMON);
                out.set_member(k);
            }
            if d == max_len {
                continue;
            }
            for c in self.children(s) {
                let a = self.act(c);
                if !a.is_daimon() {
                    let tc = out.add_child(t, a.flipped());
                    stack.push((c, tc, d + 1));
                }
            }
        }
        out.pruned()
    }

    /// The same set without nodes that lead to no member.
    pub fn pruned(&self) -> PathSet {
        let n = self.nodes.len();
        let mut live = vec![false; n];
        // children always have larger ids than their parents
        for i in (0..n).rev() {
            if self.nodes[i].member {
                live[i] = true;
            }
            if live[i] {
                continue;
            }
            live[i] = self.children(i as u32).any(|c| live[c as usize]);
        }
        let mut out = PathSet::new();
        out.nodes[0].member = self.nodes[0].member;
        let mut stack = vec![(Self::ROOT, Self::ROOT)];
        while let Some((s, t)) = stack.pop() {
            for c in self.children(s) {
                if live[c as usize] {
                    let tc = out.add_child(t, self.act(c));
                    if self.is_member(c) {
                        out.set_member(tc);
                    }
                    stack.push((c, tc));
                }
            }
        }
        out
    }

    pub fn max_len(&self) -> usize {
        let mut m = 0;
        self.for_each_node(|n, p| {
            if self.is_member(n) {
                m = m.max(p.len());
            }
        });
        m
    }
}

impl PartialEq for PathSet {
    fn eq(&self, other: &Self) -> bool {
        self.paths() == other.paths()
    }
}

pub struct Children<'a> {
    set: &'a PathSet,
    cur: u32,
}

impl Iterator for Children<'_> {
    type Item = u32;
    fn next(&mut self) -> Option<u32> {
        if self.cur == NIL {
            return None;
        }
        let c = self.cur;
        self.cur = self.set.nodes[c as usize].next;
        Some(c)
    }
}

// ---------------------------------------------------------------------------
// Shuffles of two tries

pub enum Flow {
    Continue,
    Stop,
}

/// Depth-first search over merges of a member of `a` with a member of `b`.
///
/// Actions of `a` (resp. `b`) are relocated below `x0.i` when `ra` (resp. `rb`) is set. A step
/// takes the next action of one side, or of both when they agree. The callback sees every
/// positive-ended (or empty) merge that is a prefix of a path, with the member flag of each side.
pub struct Shuffler<'a> {
    pub a: &'a PathSet,
    pub b: &'a PathSet,
    pub ra: Option<usize>,
    pub rb: Option<usize>,
    pub max_len: usize,
    /// First action shared by both sides, as in the shuffle of positive paths.
    pub shared_first: bool,
    u: Vec<CAct>,
    just: Vec<Option<usize>>,
    stopped: bool,
}

impl<'a> Shuffler<'a> {
    pub fn new(a: &'a PathSet, b: &'a PathSet, max_len: usize) -> Self {
        Shuffler { a, b, ra: None, rb: None, max_len, shared_first: false, u: vec![], just: vec![], stopped: false }
    }

    /// Start from the given prefix, which both tries see as already played.
    pub fn with_prefix(mut self, prefix: &[CAct]) -> Self {
        for a in prefix {
            let j = justifier_in(&self.u, a);
            self.u.push(*a);
            self.just.push(j);
        }
        self
    }

    pub fn run(&mut self, f: &mut impl FnMut(&[CAct], bool, bool) -> Flow) {
        let (na, nb) = (PathSet::ROOT, PathSet::ROOT);
        if self.u.last().is_none_or(|l| l.kind().positive()) {
            if let Flow::Stop = f(&self.u, self.a.is_member(na), self.b.is_member(nb)) {
                return;
            }
        }
        self.go(na, nb, f);
    }

    fn map(r: Option<usize>, a: CAct) -> Option<CAct> {
        match r {
            Some(i) => a.reloc(i),
            None => Some(a),
        }
    }

    fn go(&mut self, na: u32, nb: u32, f: &mut impl FnMut(&[CAct], bool, bool) -> Flow) {
        if self.stopped || self.u.len() >= self.max_len {
            return;
        }
        let first = self.shared_first && self.u.is_empty();
        let mut moves: Vec<(CAct, u32, u32)> = Vec::new();
        for c in self.a.children(na) {
            let Some(x) = Self::map(self.ra, self.a.act(c)) else { continue };
            let shared = self.b.children(nb).find(|&d| Self::map(self.rb, self.b.act(d)) == Some(x));
            if let Some(d) = shared {
                moves.push((x, c, d));
            }
            if !first {
                moves.push((x, c, nb));
            }
        }
        if !first {
            for d in self.b.children(nb) {
                let Some(x) = Self::map(self.rb, self.b.act(d)) else { continue };
                moves.push((x, na, d));
            }
        }
        for (x, ma, mb) in moves {
            let Some(j) = can_append(&self.u, &self.just, &x) else { continue };
            self.u.push(x);
            self.just.push(j);
            if x.kind.positive() {
                if let Flow::Stop = f(&self.u, self.a.is_member(ma), self.b.is_member(mb)) {
                    self.stopped = true;
                }
            }
            self.go(ma, mb, f);
            self.u.pop();
            self.just.pop();
            if self.stopped {
                return;
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Located design trees

#[derive(Clone, Debug)]
pub struct CNode {
    pub act: CAct,
    pub parent: Option<u32>,
    pub children: Vec<u32>,
}

/// A cut-free atomic design as a tree of packed actions.
#[derive(Clone, Debug, Default)]
pub struct CTree {
    pub nodes: Vec<CNode>,
    pub roots: Vec<u32>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Pos,
    Neg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Hole {
    /// The node has no positive continuation.
    Response(u32),
    /// The sum below `parent` (or at the root) has no branch for `act`.
    Branch { parent: Option<u32>, act: CAct },
    /// A positive tree without a root action.
    Empty,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum End {
    /// ✠ reached, played by the given side.
    Daimon(Side),
    Stuck(Side, Hole),
}

#[derive(Clone, Debug)]
pub struct Run {
    /// The interaction seen from the positive side, ending with ✠ when one was played.
    pub path: Vec<CAct>,
    pub pos_nodes: Vec<u32>,
    pub neg_nodes: Vec<u32>,
    pub end: End,
}

impl Run {
    pub fn converged(&self) -> bool {
        matches!(self.end, End::Daimon(_))
    }
}

impl CTree {
    pub fn from_design(d: &Design) -> Result<CTree> {
        Self::from_forest(&crate::paths::locate(d)?)
    }

    pub fn from_forest(f: &LocatedForest) -> Result<CTree> {
        let mut t = CTree::default();
        for r in &f.roots {
            t.copy_node(r, None)?;
        }
        Ok(t)
    }

    fn copy_node(&mut self, n: &LNode, parent: Option<u32>) -> Result<()> {
        let id = self.add(parent, CAct::from_action(&n.action)?);
        for c in &n.children {
            self.copy_node(c, Some(id))?;
        }
        Ok(())
    }

    pub fn add(&mut self, parent: Option<u32>, act: CAct) -> u32 {
        let id = self.nodes.len() as u32;
        self.nodes.push(CNode { act, parent, children: vec![] });
        match parent {
            Some(p) => self.nodes[p as usize].children.push(id),
            None => self.roots.push(id),
        }
        id
    }

    /// Remove the most recently added node.
    pub fn pop(&mut self) {
        let n = self.nodes.pop().expect("empty tree");
        match n.parent {
            Some(p) => {
                self.nodes[p as usize].children.pop();
            }
            None => {
                self.roots.pop();
            }
        }
    }

    pub fn act(&self, n: u32) -> CAct {
        self.nodes[n as usize].act
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Actions from the root down to `n`.
    pub fn view(&self, n: u32) -> Vec<CAct> {
        let mut out = vec![];
        let mut k = Some(n);
        while let Some(i) = k {
            out.push(self.act(i));
            k = self.nodes[i as usize].parent;
        }
        out.reverse();
        out
    }

    fn to_lnode(&self, n: u32, keep: &dyn Fn(u32) -> bool) -> LNode {
        LNode {
            action: self.act(n).to_action(),
            children: self.nodes[n as usize].children.iter().filter(|&&c| keep(c)).map(|&c| self.to_lnode(c, keep)).collect(),
        }
    }

    pub fn to_forest(&self) -> LocatedForest {
        self.forest_of(&|_| true)
    }

    /// The forest restricted to the nodes accepted by `keep` (closed under parents by the caller).
    pub fn forest_of(&self, keep: &dyn Fn(u32) -> bool) -> LocatedForest {
        LocatedForest { roots: self.roots.iter().filter(|&&r| keep(r)).map(|&r| self.to_lnode(r, keep)).collect() }
    }

    pub fn to_design(&self, polarity: Polarity) -> Design {
        crate::paths::unlocate(&self.to_forest(), polarity)
    }

    fn response(&self, n: Option<u32>) -> Option<u32> {
        match n {
            None => self.roots.first().copied(),
            Some(n) => self.nodes[n as usize].children.first().copied(),
        }
    }

    fn branch(&self, parent: Option<u32>, a: &CAct) -> Option<u32> {
        let kids = match parent {
            None => &self.roots,
            Some(p) => &self.nodes[p as usize].children,
        };
        kids.iter().copied().find(|&c| self.act(c) == *a)
    }

    /// Run the interaction between a positive tree `p` and a negative tree `n`.
    pub fn interact(p: &CTree, n: &CTree) -> Run {
        let mut path: Vec<CAct> = vec![];
        let mut just: Vec<Option<usize>> = vec![];
        let mut nodes = [Vec::<u32>::new(), Vec::<u32>::new()];
        let trees = [p, n];
        let sides = [Side::Pos, Side::Neg];
        let mut m = 0usize;
        loop {
            let me = trees[m];
            let at = if path.is_empty() { None } else { Some(nodes[m][path.len() - 1]) };
            let Some(r) = me.response(at) else {
                let hole = match at {
                    Some(a) => Hole::Response(a),
                    None => Hole::Empty,
                };
                return Run { path, pos_nodes: nodes[0].clone(), neg_nodes: nodes[1].clone(), end: End::Stuck(sides[m], hole) };
            };
            let a = me.act(r);
            let played = if m == 0 { a } else { a.flipped() };
            if a.is_daimon() {
                path.push(CAct::DAIMON);
                nodes[m].push(r);
                let [pn, nn] = nodes;
                return Run { path, pos_nodes: pn, neg_nodes: nn, end: End::Daimon(sides[m]) };
            }
            let j = justifier_in(&path, &played);
            path.push(played);
            just.push(j);
            nodes[m].push(r);
            let o = 1 - m;
            let parent = j.map(|j| nodes[o][j]);
            let want = a.flipped();
            match trees[o].branch(parent, &want) {
                Some(c) => nodes[o].push(c),
                None => {
                    let [pn, nn] = nodes;
                    return Run {
                        path,
                        pos_nodes: pn,
                        neg_nodes: nn,
                        end: End::Stuck(sides[o], Hole::Branch { parent, act: want }),
                    };
                }
            }
            m = o;
        }
    }

    /// Paths of the design up to `max_len` actions, including ε for a negative design.
    pub fn paths(&self, negative: bool, max_len: usize) -> Vec<Vec<CAct>> {
        let mut out = Vec::new();
        let mut w = TreeWalk { t: self, max_len, nodes: vec![], acts: vec![], just: vec![] };
        if negative {
            out.push(vec![]);
            w.extend(&mut out);
        } else if let Some(&r) = self.roots.first() {
            if max_len >= 1 {
                w.push(r);
                out.push(w.acts.clone());
                w.extend(&mut out);
            }
        }
        out
    }

    /// Every root-to-node sequence that ends with a positive action.
    pub fn positive_views(&self) -> Vec<Vec<CAct>> {
        (0..self.nodes.len() as u32).filter(|&n| self.act(n).kind.positive()).map(|n| self.view(n)).collect()
    }
}

struct TreeWalk<'a> {
    t: &'a CTree,
    max_len: usize,
    nodes: Vec<u32>,
    acts: Vec<CAct>,
    just: Vec<Option<usize>>,
}

impl TreeWalk<'_> {
    fn push(&mut self, n: u32) {
        let a = self.t.act(n);
        let j = justifier_in(&self.acts, &a);
        self.nodes.push(n);
        self.acts.push(a);
        self.just.push(j);
    }

    fn pop(&mut self) {
        self.nodes.pop();
        self.acts.pop();
        self.just.pop();
    }

    fn extend(&mut self, out: &mut Vec<Vec<CAct>>) {
        if self.acts.len() + 2 > self.max_len || self.acts.last().is_some_and(CAct::is_daimon) {
            return;
        }
        let mut opts: Vec<u32> = Vec::new();
        for (k, &n) in self.nodes.iter().enumerate() {
            if self.acts[k].kind == Kind::Pos {
                opts.extend(self.t.nodes[n as usize].children.iter());
            }
        }
        opts.extend(self.t.roots.iter().filter(|&&r| self.t.act(r).kind == Kind::Neg));
        for c in opts {
            let a = self.t.act(c);
            if can_append(&self.acts, &self.just, &a).is_none() {
                continue;
            }
            let Some(&p) = self.t.nodes[c as usize].children.first() else { continue };
            self.push(c);
            if can_append(&self.acts, &self.just, &self.t.act(p)).is_some() {
                self.push(p);
                out.push(self.acts.clone());
                self.extend(out);
                self.pop();
            }
            self.pop();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::paths::{parse_seq, path_ok, paths_of};
    use crate::syntax::{parse_design_infer, Signature};

    #[test]
    fn loci() {
        let l = Locus::parse("x0.1.12.3").unwrap();
        assert_eq!(l.to_string(), "x0.1.12.3");
        assert_eq!(l.depth(), 3);
        assert_eq!(l.last(), 3);
        assert_eq!(l.parent().unwrap().to_string(), "x0.1.12");
        assert_eq!(l.under(2).unwrap().to_string(), "x0.2.1.12.3");
        assert_eq!(Locus::ROOT.child(4).unwrap().to_string(), "x0.4");
        assert!(Locus::parse("y.1").is_err());
    }

    #[test]
    fn packed_actions_roundtrip() {
        let s = parse_seq("x0|a<x0.1,x0.2> b_x0.1() #").unwrap();
        let c = from_seq(&s).unwrap();
        assert_eq!(to_seq(&c), s);
        assert!(c[0].binds(&c[1]));
        assert!(path_ok(&c));
    }

    #[test]
    fn trie_dual() {
        let mut v = PathSet::new();
        let s = from_seq(&parse_seq("x0|b<>").unwrap()).unwrap();
        v.insert(&s);
        v.insert(&[CAct::DAIMON]);
        let d = v.dual(4);
        let got: Vec<String> = d.paths().iter().map(|p| to_seq(p).to_string()).collect();
        assert_eq!(got, vec!["()".to_string(), "b_x0() #".to_string()]);
        assert_eq!(d.dual(4), v);
    }

    #[test]
    fn tree_paths_agree() {
        let d = parse_design_infer("x0|a< b(y).(y|c< d().# >) + e().# >", &mut Signature::new()).unwrap();
        let t = CTree::from_design(&d).unwrap();
        let mut a: Vec<Seq> = t.paths(false, 10).iter().map(|p| to_seq(p)).collect();
        a.sort();
        assert_eq!(a, paths_of(&d, 10).unwrap());
    }

    #[test]
    fn tree_interaction() {
        let mut sig = Signature::new();
        let p = parse_design_infer("x0|a< b(y).(y|c<>) >", &mut sig).unwrap();
        let n = parse_design_infer("a(z).(z|b< c().# >)", &mut sig).unwrap();
        let r = CTree::interact(&CTree::from_design(&p).unwrap(), &CTree::from_design(&n).unwrap());
        assert_eq!(r.end, End::Daimon(Side::Neg));
        assert_eq!(to_seq(&r.path).to_string(), "x0|a<x0.1> b_x0.1(x0.1.1) x0.1.1|c<> #");
    }
}
