//! Cut reduction, normal forms, orthogonality and the two orderings on designs.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::syntax::{classify, free_vars, render_design, subst, Design, Fresh, Polarity, Var, X0};

pub const DEFAULT_FUEL: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Converged,
    DivergedOmega,
    FuelExhausted,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalizeOutcome {
    pub result: Design,
    pub status: Status,
    pub steps: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Step {
    Reduced(Design),
    NoHeadCut,
}

/// One reduction of the head cut.
pub fn step(p: &Design) -> Step {
    match p {
        Design::Cut { head, name, args } => match head.as_ref() {
            Design::Neg(bs) => match bs.get(name) {
                Some(b) if b.vars.len() == args.len() => Step::Reduced(beta(&b.vars, &b.body, args)),
                _ => Step::Reduced(Design::Omega),
            },
            _ => Step::NoHeadCut,
        },
        _ => Step::NoHeadCut,
    }
}

fn beta(vars: &[Var], body: &Design, args: &[Design]) -> Design {
    let fv = free_vars(body);
    let sigma: HashMap<Var, Design> =
        vars.iter().cloned().zip(args.iter().cloned()).filter(|(v, _)| fv.contains(v)).collect();
    if sigma.is_empty() {
        return body.clone();
    }
    let mut refs: Vec<&Design> = vec![body];
    refs.extend(args.iter());
    let mut fresh = Fresh::avoiding(&refs);
    let image_fv: HashSet<Var> = sigma.values().flat_map(free_vars).collect();
    subst(body, &sigma, &image_fv, &mut fresh)
}

pub fn normalize(d: &Design, fuel: usize) -> NormalizeOutcome {
    run(d, fuel, None)
}

/// Normalize and record the redex of every step in design syntax.
pub fn normalize_traced(d: &Design, fuel: usize) -> (NormalizeOutcome, Vec<String>) {
    let mut trace = Vec::new();
    let out = run(d, fuel, Some(&mut trace));
    (out, trace)
}

fn run(d: &Design, fuel: usize, trace: Option<&mut Vec<String>>) -> NormalizeOutcome {
    let mut m = Machine { fuel, steps: 0, exhausted: false, trace };
    let result = m.norm(d);
    let status = if m.exhausted {
        Status::FuelExhausted
    } else if result == Design::Omega {
        Status::DivergedOmega
    } else {
        Status::Converged
    };
    NormalizeOutcome { result, status, steps: m.steps }
}

struct Machine<'a> {
    fuel: usize,
    steps: usize,
    exhausted: bool,
    trace: Option<&'a mut Vec<String>>,
}

impl Machine<'_> {
    fn norm(&mut self, d: &Design) -> Design {
        match d {
            Design::Neg(bs) => {
                let mut out = BTreeMap::new();
                for (n, b) in bs {
                    let body = self.norm(&b.body);
                    if body != Design::Omega {
                        out.insert(n.clone(), crate::syntax::Branch { vars: b.vars.clone(), body });
                    }
                }
                Design::Neg(out)
            }
            _ => {
                let mut cur = d.clone();
                loop {
                    match cur {
                        Design::Cut { .. } => {
                            if self.fuel == 0 {
                                self.exhausted = true;
                                return cur;
                            }
                            if let Some(t) = self.trace.as_deref_mut() {
                                t.push(render_design(&cur));
                            }
                            self.fuel -= 1;
                            self.steps += 1;
                            cur = match step(&cur) {
                                Step::Reduced(next) => next,
                                Step::NoHeadCut => Design::Omega,
                            };
                        }
                        Design::App { head, name, args } => {
                            let args = args.iter().map(|a| self.norm(a)).collect();
                            return Design::App { head, name, args };
                        }
                        other => return other,
                    }
                }
            }
        }
    }
}

/// p ⊥ n: the closed design p[n/x0] normalizes to ✠.
pub fn is_orthogonal(p: &Design, n: &Design) -> Result<bool> {
    check_atomic(p, Polarity::Positive)?;
    check_atomic(n, Polarity::Negative)?;
    let closed = plug(p, n);
    Ok(normalize(&closed, DEFAULT_FUEL).result == Design::Daimon)
}

pub(crate) fn plug(p: &Design, n: &Design) -> Design {
    let mut sigma = HashMap::new();
    sigma.insert(X0.to_string(), n.clone());
    let mut fresh = Fresh::avoiding(&[p, n]);
    subst(p, &sigma, &HashSet::new(), &mut fresh)
}

pub(crate) fn check_atomic(d: &Design, pol: Polarity) -> Result<()> {
    let c = classify(d);
    if c.polarity != pol {
        return Err(Error::Polarity { expected: if pol == Polarity::Positive { "positive" } else { "negative" } });
    }
    if !c.atomic {
        return Err(Error::NotAtomic);
    }
    Ok(())
}

/// d1 ⊑ d2: d2 is d1 with some Ω replaced by positive designs.
pub fn stable_leq(d1: &Design, d2: &Design) -> bool {
    leq(d1, d2, false, &mut Vec::new())
}

/// d1 ⪯ d2: additionally, positive subdesigns of d1 may become ✠.
pub fn obs_leq(d1: &Design, d2: &Design) -> bool {
    leq(d1, d2, true, &mut Vec::new())
}

fn same_var(env: &[(Var, Var)], a: &str, b: &str) -> bool {
    let l = env.iter().rev().find(|(x, _)| x == a).map(|(_, y)| y.as_str());
    let r = env.iter().rev().find(|(_, y)| y == b).map(|(x, _)| x.as_str());
    match (l, r) {
        (Some(y), Some(x)) => y == b && x == a,
        (None, None) => a == b,
        _ => false,
    }
}

fn leq(d1: &Design, d2: &Design, obs: bool, env: &mut Vec<(Var, Var)>) -> bool {
    if d1.is_positive() && d2.is_positive() {
        if *d1 == Design::Omega || obs && *d2 == Design::Daimon {
            return true;
        }
    }
    match (d1, d2) {
        (Design::Daimon, Design::Daimon) | (Design::Omega, Design::Omega) => true,
        (Design::App { head: h1, name: n1, args: a1 }, Design::App { head: h2, name: n2, args: a2 }) => {
            same_var(env, h1, h2)
                && n1 == n2
                && a1.len() == a2.len()
                && a1.iter().zip(a2).all(|(x, y)| leq(x, y, obs, env))
        }
        (Design::Cut { head: h1, name: n1, args: a1 }, Design::Cut { head: h2, name: n2, args: a2 }) => {
            n1 == n2
                && leq(h1, h2, obs, env)
                && a1.len() == a2.len()
                && a1.iter().zip(a2).all(|(x, y)| leq(x, y, obs, env))
        }
        (Design::Neg(b1), Design::Neg(b2)) => {
            let names: std::collections::BTreeSet<&String> = b1.keys().chain(b2.keys()).collect();
            names.into_iter().all(|n| match (b1.get(n), b2.get(n)) {
                (None, _) => true,
                (Some(x), None) => x.body == Design::Omega,
                (Some(x), Some(y)) => {
                    if x.vars.len() != y.vars.len() {
                        return false;
                    }
                    let k = env.len();
                    env.extend(x.vars.iter().cloned().zip(y.vars.iter().cloned()));
                    let ok = leq(&x.body, &y.body, obs, env);
                    env.truncate(k);
                    ok
                }
            })
        }
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{alpha_eq, parse_design_infer, Signature};

    fn p(s: &str) -> Design {
        parse_design_infer(s, &mut Signature::new()).unwrap()
    }

    #[test]
    fn steps() {
        assert_eq!(step(&p("[b().#]|b<>")), Step::Reduced(Design::Daimon));
        match step(&p("[a(x).(x|d<>)]|a< d().# >")) {
            Step::Reduced(d) => assert!(alpha_eq(&d, &p("[d().#]|d<>"))),
            _ => panic!(),
        }
        assert_eq!(step(&p("[b().#]|a<>")), Step::Reduced(Design::Omega));
        assert_eq!(step(&p("x0|a<>")), Step::NoHeadCut);
    }

    #[test]
    fn normal_forms() {
        let o = normalize(&Design::Daimon, DEFAULT_FUEL);
        assert_eq!((o.result, o.status), (Design::Daimon, Status::Converged));
        let o = normalize(&p("[b().#]|b<>"), DEFAULT_FUEL);
        assert_eq!((o.result, o.status, o.steps), (Design::Daimon, Status::Converged, 1));
        let o = normalize(&p("[b().(_)]|b<>"), DEFAULT_FUEL);
        assert_eq!((o.result, o.status), (Design::Omega, Status::DivergedOmega));
        let o = normalize(&p("b().([c().#]|c<>)"), DEFAULT_FUEL);
        assert_eq!(o.result, p("b().#"));
    }

    #[test]
    fn fuel_runs_out() {
        let o = normalize(&p("[a(x).([b().#]|b<>)]|a<{}>"), 1);
        assert_eq!(o.status, Status::FuelExhausted);
    }

    #[test]
    fn orthogonality() {
        assert!(is_orthogonal(&Design::Daimon, &p("a().(_)")).unwrap());
        assert!(is_orthogonal(&p("x0|b<>"), &p("b().#")).unwrap());
        assert!(!is_orthogonal(&p("x0|b<>"), &p("c().#")).unwrap());
        assert!(is_orthogonal(&p("y|b<>"), &p("b().#")).is_err());
    }

    #[test]
    fn orderings() {
        assert!(stable_leq(&Design::Omega, &Design::Daimon));
        assert!(stable_leq(&p("a(x).(_)"), &p("a(x).(x|b<>)")));
        assert!(!stable_leq(&Design::Daimon, &p("x0|b<>")));
        assert!(obs_leq(&p("x0|b<>"), &Design::Daimon));
        assert!(obs_leq(&Design::Omega, &p("x0|b<>")));
        assert!(!obs_leq(&Design::Daimon, &p("x0|b<>")));
        assert!(stable_leq(&p("a(x).(x|b<>)"), &p("a(y).(y|b<>) + c().#")));
        assert!(!stable_leq(&p("a(x).(x|b<>)"), &p("a(y).(x|b<>)")));
    }
}
