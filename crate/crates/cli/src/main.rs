use std::io::{IsTerminal, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use ludics::behaviours::{self, parse_behaviour, BehaviourExpr, CheckReport};
use ludics::datatypes::{self, DataPattern, Env, Seed, Tree};
use ludics::functional::{self, parse_func_type, Criterion};
use ludics::multidesign::{self, parse_multi, MultiDesign};
use ludics::paths::{self, locate, seq_to_json, Seq};
use ludics::reduction::{self, Status};
use ludics::syntax::{parse_any, parse_design_infer, render_design, Design, Signature};

#[derive(Parser)]
#[command(name = "ludics", version, about = "Designs, interaction, paths and behaviours")]
struct Cli {
    #[command(flatten)]
    opts: Opts,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct Opts {
    /// Unfolding level for fixed points
    #[arg(long, global = true, default_value_t = 3)]
    level: usize,
    /// Longest path explored
    #[arg(long = "max-len", global = true, default_value_t = 16)]
    max_len: usize,
    /// Reduction steps before giving up
    #[arg(long, global = true, default_value_t = reduction::DEFAULT_FUEL)]
    fuel: usize,
    /// Seed for generated inputs
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true)]
    json: bool,
    /// Write a DOT graph here
    #[arg(long, global = true)]
    dot: Option<PathBuf>,
    #[arg(long, global = true)]
    trace: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Normalize a design
    Normalize { file: PathBuf },
    /// Decide orthogonality of an atomic pair
    Ortho { pos: PathBuf, neg: PathBuf },
    /// Interaction path of an atomic pair
    Interact { left: PathBuf, right: PathBuf },
    /// Interaction sequence of two multi-designs
    Minteract {
        left: PathBuf,
        right: PathBuf,
        /// Keep only the actions of these elements (`pos` for the positive one)
        #[arg(long, value_delimiter = ',')]
        restrict: Vec<String>,
    },
    /// Paths of a design
    Paths { file: PathBuf },
    /// Located action tree of a design
    Tree { file: PathBuf },
    /// Checks on a behaviour expression
    Behaviour {
        expr: String,
        check: BehaviourCheck,
        /// Design file for `member`
        design: Option<PathBuf>,
    },
    /// Checks on a data pattern, given as a file, a pattern or a standard name
    Data {
        pattern: String,
        check: DataCheck,
        /// Start of the fixed point iteration
        #[arg(long, value_enum, default_value_t = From::Basis)]
        from: From,
    },
    /// Encode a value as a design
    Encode {
        kind: EncodeKind,
        /// `true`/`false`, a number, comma-separated constants, or a tree like `a[leaf,a[]]`
        value: String,
    },
    /// Regularity, purity and the impurity criterion of a functional type
    Func {
        ty: String,
        #[arg(long)]
        witness: bool,
    },
    /// Run the acceptance suite
    Selftest,
}

#[derive(Clone, Copy, ValueEnum)]
enum BehaviourCheck {
    Incarnation,
    Visitable,
    Regular,
    Pure,
    QuasiPure,
    Member,
}

#[derive(Clone, Copy, ValueEnum)]
enum DataCheck {
    Incarnation,
    Visitable,
    Regular,
    Pure,
    QuasiPure,
    Steady,
    Basis,
    Monotone,
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum From {
    Basis,
    Daimon,
}

#[derive(Clone, Copy, ValueEnum)]
enum EncodeKind {
    Bool,
    Nat,
    List,
    Tree,
}

/// 0 success, 1 a property fails, 2 bad input.
struct Outcome {
    ok: bool,
    verdict: String,
    lines: Vec<String>,
    data: Value,
    dot: Option<String>,
}

impl Outcome {
    fn new(ok: bool, verdict: impl Into<String>) -> Self {
        Outcome { ok, verdict: verdict.into(), lines: vec![], data: Value::Null, dot: None }
    }

    fn line(mut self, l: impl Into<String>) -> Self {
        self.lines.push(l.into());
        self
    }

    fn data(mut self, v: Value) -> Self {
        self.data = v;
        self
    }
}

type Res<T> = Result<T, String>;

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn read(path: &Path) -> Res<String> {
    std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn load(path: &Path) -> Res<(Signature, Design)> {
    let text = read(path)?;
    parse_any(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn load_multi(path: &Path) -> Res<MultiDesign> {
    parse_multi(&read(path)?, &mut Signature::new()).map_err(|e| format!("{}: {e}", path.display()))
}

fn seq_text(s: &Seq) -> String {
    if s.is_empty() {
        "ε".into()
    } else {
        s.to_string()
    }
}

fn report_json(r: &CheckReport) -> Value {
    json!({
        "verdict": format!("{:?}", r.verdict),
        "witness": r.witness.as_ref().map(seq_text),
        "level": r.level,
        "max_len": r.max_len,
        "detail": r.detail,
    })
}

fn check_outcome(name: &str, r: CheckReport) -> Outcome {
    let mut o = Outcome::new(r.holds(), format!("{:?}", r.verdict)).line(format!("{name}: {}", r.detail));
    if let Some(w) = &r.witness {
        o = o.line(format!("witness: {}", seq_text(w)));
    }
    o.data(report_json(&r))
}

fn run(cmd: &Cmd, o: &Opts) -> Res<Outcome> {
    match cmd {
        Cmd::Normalize { file } => {
            let (_, d) = load(file)?;
            let (out, trace) = reduction::normalize_traced(&d, o.fuel);
            let ok = out.status != Status::FuelExhausted;
            let mut r = Outcome::new(ok, format!("{:?}", out.status))
                .line(format!("normal form: {}", render_design(&out.result)))
                .line(format!("steps: {}", out.steps));
            if o.trace {
                r.lines.extend(trace.iter().map(|t| format!("redex: {t}")));
            }
            Ok(r.data(json!({ "normal_form": render_design(&out.result), "steps": out.steps, "trace": trace })))
        }
        Cmd::Ortho { pos, neg } => {
            let (_, p) = load(pos)?;
            let (_, n) = load(neg)?;
            let yes = reduction::is_orthogonal(&p, &n).map_err(err)?;
            Ok(Outcome::new(yes, if yes { "Orthogonal" } else { "NotOrthogonal" }).data(json!({ "orthogonal": yes })))
        }
        Cmd::Interact { left, right } => {
            let (_, d) = load(left)?;
            let (_, e) = load(right)?;
            let path = multidesign::interaction_path(&d, &e).map_err(err)?;
            let mut r = match &path {
                Some(s) => Outcome::new(true, "Converges").line(format!("path: {}", seq_text(s))),
                None => Outcome::new(false, "Diverges"),
            };
            if let Some(s) = &path {
                let skel = paths::skeleton(s).map_err(err)?;
                r.dot = Some(locate(&skel).map_err(err)?.render_dot());
            }
            Ok(r.data(json!({ "path": path.as_ref().map(seq_to_json) })))
        }
        Cmd::Minteract { left, right, restrict } => {
            let d = load_multi(left)?;
            let e = load_multi(right)?;
            let run = multidesign::interaction_run(&d, &e, o.fuel).map_err(err)?;
            let mut seq = run.seq.clone();
            if !restrict.is_empty() {
                let sub = MultiDesign {
                    negatives: d.negatives.iter().filter(|(x, _)| restrict.contains(x)).map(|(x, n)| (x.clone(), n.clone())).collect(),
                    positive: d.positive.clone().filter(|_| restrict.iter().any(|r| r == "pos")),
                };
                seq = multidesign::restrict(&seq, &d, &sub).map_err(err)?;
            }
            Ok(Outcome::new(run.converged(), format!("{:?}", run.ending))
                .line(format!("sequence: {}", seq_text(&seq)))
                .line(format!("steps: {}", run.steps))
                .data(json!({ "sequence": seq_to_json(&seq), "ending": format!("{:?}", run.ending) })))
        }
        Cmd::Paths { file } => {
            let (_, d) = load(file)?;
            let ps = paths::paths_of(&d, o.max_len).map_err(err)?;
            let mut r = Outcome::new(true, format!("{} paths", ps.len()));
            r.lines.extend(ps.iter().map(seq_text));
            Ok(r.data(Value::Array(ps.iter().map(seq_to_json).collect())))
        }
        Cmd::Tree { file } => {
            let (_, d) = load(file)?;
            let f = locate(&d).map_err(err)?;
            let mut r = Outcome::new(true, format!("{} actions", f.size()));
            r.lines.extend(f.render_text().lines().map(str::to_string));
            r.dot = Some(f.render_dot());
            Ok(r.data(json!({ "tree": f.render_text() })))
        }
        Cmd::Behaviour { expr, check, design } => {
            let b = parse_behaviour(expr).map_err(err)?;
            behaviour_check(&b, *check, design.as_deref(), o)
        }
        Cmd::Data { pattern, check, from } => data_check(pattern, *check, *from, o),
        Cmd::Encode { kind, value } => {
            let d = encode(*kind, value)?;
            let text = render_design(&d);
            let mut r = Outcome::new(true, "Encoded").line(text.clone());
            r.dot = Some(locate(&d).map_err(err)?.render_dot());
            Ok(r.data(json!({ "design": text })))
        }
        Cmd::Func { ty, witness } => func(ty, *witness, o),
        Cmd::Selftest => {
            let results = ludics::acceptance::run_all(o.seed);
            let ok = results.iter().all(|r| r.passed);
            let passed = results.iter().filter(|r| r.passed).count();
            let mut r = Outcome::new(ok, format!("{passed}/{} criteria pass", results.len()));
            r.lines.extend(results.iter().map(|c| {
                format!("[{}] {:>2}. {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.id, c.name, c.detail)
            }));
            if o.trace {
                for c in &results {
                    eprintln!("criterion {}: {:.2}s", c.id, c.seconds);
                }
            }
            let rows: Vec<Value> = results
                .iter()
                .map(|c| json!({ "id": c.id, "name": c.name, "passed": c.passed, "detail": c.detail }))
                .collect();
            Ok(r.data(Value::Array(rows)))
        }
    }
}

fn behaviour_check(b: &BehaviourExpr, check: BehaviourCheck, design: Option<&Path>, o: &Opts) -> Res<Outcome> {
    let (level, len) = (o.level, o.max_len);
    Ok(match check {
        BehaviourCheck::Incarnation => {
            let inc = behaviours::incarnation(b, level).map_err(err)?;
            let texts: Vec<String> = inc.designs.iter().map(render_design).collect();
            let mut r = Outcome::new(true, format!("{} designs", texts.len()));
            r.lines.extend(texts.iter().cloned());
            r.data(json!(texts))
        }
        BehaviourCheck::Visitable => {
            let ps = behaviours::visitable_paths(b, level, len).map_err(err)?;
            let mut r = Outcome::new(true, format!("{} visitable paths", ps.len()));
            r.lines.extend(ps.iter().map(seq_text));
            r.data(Value::Array(ps.iter().map(seq_to_json).collect()))
        }
        BehaviourCheck::Regular => check_outcome("regular", behaviours::check_regular(b, level, len).map_err(err)?),
        BehaviourCheck::Pure => check_outcome("pure", behaviours::check_pure(b, level, len).map_err(err)?),
        BehaviourCheck::QuasiPure => {
            check_outcome("quasi-pure", behaviours::check_quasi_pure(b, level, len).map_err(err)?)
        }
        BehaviourCheck::Member => {
            let path = design.ok_or("member needs a design file")?;
            let (_, d) = load(path)?;
            let yes = if d.is_positive() == b.is_positive() {
                behaviours::member(&d, b, level).map_err(err)?
            } else {
                behaviours::ortho_member(&d, b, level).map_err(err)?
            };
            let side = if d.is_positive() == b.is_positive() { "B" } else { "the orthogonal of B" };
            Outcome::new(yes, if yes { "Member" } else { "NotMember" })
                .line(format!("checked against {side}"))
                .data(json!({ "member": yes }))
        }
    })
}

fn load_pattern(text: &str) -> Res<DataPattern> {
    let p = Path::new(text);
    let src = if p.is_file() { read(p)? } else { text.to_string() };
    let src = src.trim();
    let src = src.strip_prefix('{').and_then(|s| s.strip_suffix('}')).unwrap_or(src).trim();
    if let Some(named) = datatypes::named_pattern(src) {
        return Ok(named);
    }
    datatypes::parse_closed_pattern(src).map_err(err)
}

fn data_check(pattern: &str, check: DataCheck, from: From, o: &Opts) -> Res<Outcome> {
    let pat = load_pattern(pattern)?;
    let seed = if from == From::Basis { Seed::Basis } else { Seed::Daimon };
    let beh = || datatypes::interpret_seeded(&pat, &Env::new(), Some(o.level), seed).map_err(err);
    let (level, len) = (o.level, o.max_len);
    let with_pattern = |r: Outcome| r.line(format!("pattern: {pat}"));
    Ok(match check {
        DataCheck::Incarnation => with_pattern(behaviour_check(&beh()?, BehaviourCheck::Incarnation, None, o)?),
        DataCheck::Visitable => with_pattern(behaviour_check(&beh()?, BehaviourCheck::Visitable, None, o)?),
        DataCheck::Regular => with_pattern(check_outcome("regular", behaviours::check_regular(&beh()?, level, len).map_err(err)?)),
        DataCheck::Pure => with_pattern(check_outcome("pure", behaviours::check_pure(&beh()?, level, len).map_err(err)?)),
        DataCheck::QuasiPure => {
            with_pattern(check_outcome("quasi-pure", behaviours::check_quasi_pure(&beh()?, level, len).map_err(err)?))
        }
        DataCheck::Steady => {
            let s = datatypes::steadiness(&pat);
            let ok = s == datatypes::Steadiness::Steady;
            with_pattern(Outcome::new(ok, format!("{s:?}")).data(json!({ "steadiness": format!("{s:?}") })))
        }
        DataCheck::Basis => {
            let b = datatypes::basis(&pat).map_err(err)?;
            with_pattern(Outcome::new(true, "Basis").line(format!("basis: {b}")).data(json!({ "basis": b.to_string() })))
        }
        DataCheck::Monotone => {
            let r = datatypes::kleene_monotone_report(&pat, &Env::new(), level, len).map_err(err)?;
            let mut out = Outcome::new(r.holds, if r.holds { "Holds" } else { "FailsWithWitness" })
                .line(format!("incarnation sizes: {:?}", r.incarnation_sizes))
                .line(format!("visitable path counts: {:?}", r.visitable_sizes));
            if let Some(v) = &r.first_violation {
                out = out.line(format!("violation: {v}"));
            }
            with_pattern(out.data(serde_json::to_value(&r).map_err(err)?))
        }
    })
}

fn parse_tree(text: &str) -> Res<Tree> {
    fn go(s: &str) -> Res<(Tree, &str)> {
        let s = s.trim_start();
        if let Some(rest) = s.strip_prefix("leaf") {
            return Ok((Tree::Leaf, rest));
        }
        let end = s.find('[').ok_or_else(|| format!("expected 'leaf' or NAME[...] at '{s}'"))?;
        let name = s[..end].trim();
        if name.is_empty() || !name.chars().all(|c| c.is_alphanumeric() || c == '_') {
            return Err(format!("bad node label '{name}'"));
        }
        let label = parse_design_infer(&format!("x0|{name}<>"), &mut Signature::new()).map_err(err)?;
        let mut rest = &s[end + 1..];
        let mut kids = vec![];
        loop {
            let r = rest.trim_start();
            if let Some(r) = r.strip_prefix(']') {
                return Ok((Tree::Node(label, kids), r));
            }
            let (k, r) = go(r)?;
            kids.push(k);
            let r = r.trim_start();
            rest = r.strip_prefix(',').unwrap_or(r);
        }
    }
    let (t, rest) = go(text)?;
    if !rest.trim().is_empty() {
        return Err(format!("trailing input '{rest}'"));
    }
    Ok(t)
}

fn encode(kind: EncodeKind, value: &str) -> Res<Design> {
    Ok(match kind {
        EncodeKind::Bool => datatypes::encode_bool(value.parse::<bool>().map_err(|_| format!("not a boolean: {value}"))?),
        EncodeKind::Nat => datatypes::encode_nat(value.parse::<usize>().map_err(|_| format!("not a number: {value}"))?),
        EncodeKind::List => {
            let elems = value
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|a| parse_design_infer(&format!("x0|{a}<>"), &mut Signature::new()).map_err(err))
                .collect::<Res<Vec<_>>>()?;
            datatypes::encode_list(&elems)
        }
        EncodeKind::Tree => datatypes::encode_tree(&parse_tree(value)?),
    })
}

fn func(ty: &str, witness: bool, o: &Opts) -> Res<Outcome> {
    let t = parse_func_type(ty).map_err(err)?;
    let r = functional::check_functional(&t, o.level, o.max_len).map_err(err)?;
    let criterion = match &r.criterion {
        Criterion::Pure => "pure".to_string(),
        Criterion::Impure(d) => format!("impure ({d})"),
    };
    let mut out = Outcome::new(r.pure.holds() && r.agrees, format!("{:?}", r.pure.verdict))
        .line(format!("type: {}", r.ty))
        .line(format!("regular: {:?}", r.regular.verdict))
        .line(format!("quasi-pure: {:?}", r.quasi_pure.verdict))
        .line(format!("pure: {:?}", r.pure.verdict))
        .line(format!("criterion: {criterion}"))
        .line(format!("criterion agrees: {}", r.agrees));
    let mut wjson = Value::Null;
    if witness {
        if let Criterion::Impure(_) = &r.criterion {
            let w = functional::impurity_witness_at(&t, o.level).map_err(err)?;
            out = out
                .line(format!("witness path ({} actions): {}", w.s.len(), seq_text(&w.s)))
                .line(format!("witness p ({} actions): {}", w.p.action_count(), render_design(&w.p)))
                .line(format!("witness n: {}", render_design(&w.n)));
            out.dot = Some(locate(&w.p).map_err(err)?.render_dot());
            wjson = json!({
                "path": seq_to_json(&w.s),
                "p": render_design(&w.p),
                "n": render_design(&w.n),
                "p_actions": w.p.action_count(),
            });
        }
    }
    Ok(out.data(json!({
        "type": r.ty,
        "regular": report_json(&r.regular),
        "quasi_pure": report_json(&r.quasi_pure),
        "pure": report_json(&r.pure),
        "criterion": criterion,
        "agrees": r.agrees,
        "witness": wjson,
    })))
}

fn color_on() -> bool {
    match std::env::var("LUDICS_COLOR").as_deref() {
        Ok("1") => true,
        Ok("0") => false,
        _ => std::io::stdout().is_terminal(),
    }
}

fn paint(text: &str, ok: bool) -> String {
    if color_on() {
        format!("\x1b[{}m{text}\x1b[0m", if ok { 32 } else { 31 })
    } else {
        text.to_string()
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let o = &cli.opts;
    let command = std::iter::once("ludics".to_string())
        .chain(std::env::args().skip(1).map(|a| if a.contains(' ') { format!("'{a}'") } else { a }))
        .collect::<Vec<_>>()
        .join(" ");
    let start = Instant::now();
    let out = match run(&cli.cmd, o) {
        Ok(out) => out,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if let (Some(path), Some(dot)) = (&o.dot, &out.dot) {
        if let Err(e) = std::fs::write(path, dot) {
            eprintln!("error: {}: {e}", path.display());
            return ExitCode::from(2);
        }
    }
    let bounds = json!({ "level": o.level, "max_len": o.max_len, "fuel": o.fuel, "seed": o.seed });
    let text = if o.json {
        let v = json!({ "command": command, "bounds": bounds, "verdict": out.verdict, "ok": out.ok, "result": out.data });
        serde_json::to_string_pretty(&v).expect("report serializes") + "\n"
    } else {
        let mut t = format!("$ {command}\n");
        t += &format!("bounds: level={} max-len={} fuel={} seed={}\n", o.level, o.max_len, o.fuel, o.seed);
        t += &format!("verdict: {}\n", paint(&out.verdict, out.ok));
        for l in &out.lines {
            t += l;
            t.push('\n');
        }
        t
    };
    // A closed pipe (`| head`) is not an error.
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
    if o.trace {
        eprintln!("time: {:.3}s", start.elapsed().as_secs_f64());
    }
    ExitCode::from(if out.ok { 0 } else { 1 })
}
