use std::collections::HashMap;
use std::fmt;

use super::*;
use cqc_core::vernacular::run_script;
use cqc_core::{Classification, Context, Item, Term};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Debug, PartialEq, Eq)]
enum Fo {
    V(String),
    F(String, Vec<Fo>),
}

impl fmt::Display for Fo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Fo::V(x) => write!(f, "{x}"),
            Fo::F(c, args) if args.is_empty() => write!(f, "{c}"),
            Fo::F(c, args) => {
                write!(f, "({c}")?;
                for a in args {
                    write!(f, " {a}")?;
                }
                write!(f, ")")
            }
        }
    }
}

fn app(c: &str, args: Vec<Fo>) -> Fo {
    Fo::F(c.into(), args)
}

fn subst(t: &Fo, s: &HashMap<String, Fo>) -> Fo {
    match t {
        Fo::V(x) => s.get(x).map_or_else(|| t.clone(), |u| subst(u, s)),
        Fo::F(c, args) => Fo::F(c.clone(), args.iter().map(|a| subst(a, s)).collect()),
    }
}

fn occurs(x: &str, t: &Fo) -> bool {
    match t {
        Fo::V(y) => x == y,
        Fo::F(_, args) => args.iter().any(|a| occurs(x, a)),
    }
}

/// Robinson unification; `flex` decides which variables may be bound.
fn robinson(eqs: &[(Fo, Fo)], flex: &dyn Fn(&str) -> bool) -> Option<HashMap<String, Fo>> {
    let mut s: HashMap<String, Fo> = HashMap::new();
    let mut todo: Vec<(Fo, Fo)> = eqs.to_vec();
    while let Some((a, b)) = todo.pop() {
        let (a, b) = (subst(&a, &s), subst(&b, &s));
        match (&a, &b) {
            _ if a == b => {}
            (Fo::V(x), t) | (t, Fo::V(x)) if flex(x) => {
                if occurs(x, t) {
                    return None;
                }
                s.insert(x.clone(), t.clone());
            }
            (Fo::F(c, xs), Fo::F(d, ys)) if c == d && xs.len() == ys.len() => {
                todo.extend(xs.iter().cloned().zip(ys.iter().cloned()));
            }
            _ => return None,
        }
    }
    Some(s)
}

fn vars(t: &Fo, out: &mut Vec<String>) {
    match t {
        Fo::V(x) => out.push(x.clone()),
        Fo::F(_, args) => args.iter().for_each(|a| vars(a, out)),
    }
}

fn random_term(rng: &mut ChaCha8Rng, leaves: &[Fo], depth: usize) -> Fo {
    if depth == 0 || rng.gen_bool(0.4) {
        return leaves.choose(rng).unwrap().clone();
    }
    if rng.gen_bool(0.5) {
        app("f", vec![random_term(rng, leaves, depth - 1)])
    } else {
        app("g", vec![random_term(rng, leaves, depth - 1), random_term(rng, leaves, depth - 1)])
    }
}

/// Replaces random subterms by leaves, so that the pair is often unifiable.
fn perturb(rng: &mut ChaCha8Rng, t: &Fo, leaves: &[Fo]) -> Fo {
    if rng.gen_bool(0.25) {
        return leaves.choose(rng).unwrap().clone();
    }
    match t {
        Fo::F(c, args) => Fo::F(c.clone(), args.iter().map(|a| perturb(rng, a, leaves)).collect()),
        v => v.clone(),
    }
}

struct Problem {
    /// Prefix after the constants, with `true` for existentials.
    prefix: Vec<(String, bool)>,
    eqs: Vec<(Fo, Fo)>,
}

fn random_problem(rng: &mut ChaCha8Rng) -> Problem {
    let n = rng.gen_range(2..=5);
    let mut prefix = Vec::new();
    let (mut ne, mut nu) = (0, 0);
    for _ in 0..n {
        if rng.gen_bool(0.65) {
            ne += 1;
            prefix.push((format!("X{ne}"), true));
        } else {
            nu += 1;
            prefix.push((format!("y{nu}"), false));
        }
    }
    let mut leaves: Vec<Fo> = vec![app("a", vec![]), app("b", vec![])];
    leaves.extend(prefix.iter().map(|(x, _)| Fo::V(x.clone())));
    let eqs = (0..rng.gen_range(1..=3))
        .map(|_| {
            let s = random_term(rng, &leaves, 3);
            let t = if rng.gen_bool(0.7) { perturb(rng, &s, &leaves) } else { random_term(rng, &leaves, 3) };
            (s, t)
        })
        .collect();
    Problem { prefix, eqs }
}

fn oracle(p: &Problem) -> bool {
    let exist: HashMap<&str, usize> =
        p.prefix.iter().enumerate().filter(|(_, (_, e))| *e).map(|(i, (x, _))| (x.as_str(), i)).collect();
    let pos: HashMap<&str, usize> = p.prefix.iter().enumerate().map(|(i, (x, _))| (x.as_str(), i)).collect();
    let Some(s) = robinson(&p.eqs, &|x| exist.contains_key(x)) else { return false };
    s.iter().all(|(x, t)| {
        let mut vs = Vec::new();
        vars(&subst(t, &s), &mut vs);
        vs.iter().all(|v| exist.contains_key(v.as_str()) || pos[v.as_str()] < pos[x.as_str()])
    })
}

fn to_context(p: &Problem) -> Context {
    let mut items = vec![fa("T", "Prop"), fa("a", "T"), fa("b", "T"), fa("f", "T -> T"), fa("g", "T -> T -> T")];
    for (x, e) in &p.prefix {
        items.push(if *e { ex(x, "T") } else { fa(x, "T") });
    }
    for (s, u) in &p.eqs {
        items.push(Item::Constraint(t(&s.to_string()), t(&u.to_string())));
    }
    Context::from_items(items)
}

fn resolve(term: &Term, defs: &HashMap<String, Term>) -> Term {
    let mut term = term.clone();
    loop {
        let next = term.free_vars().iter().find_map(|x| defs.get(x.as_str()).map(|v| (x.clone(), v.clone())));
        match next {
            Some((x, v)) => term = term.subst(&x, &v),
            None => return term,
        }
    }
}

pub fn first_order_solver_agrees_with_robinson(cases: usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut agree, mut solvable) = (0, 0);
    for case in 0..cases {
        let p = random_problem(&mut rng);
        let ctx = to_context(&p);
        let expected = oracle(&p);
        let solved = cqc_core::unify::solve_first_order(&ctx, Default::default());
        let ours = match &solved {
            Ok((c, _)) => c.constraints().is_empty() && cqc_core::context::classify(c, Default::default()) != Classification::Failure,
            Err(_) => false,
        };
        assert_eq!(ours, expected, "case {case}: {ctx}\nresult: {:?}", solved.map(|c| c.0.to_string()));
        if ours {
            let c = solved.unwrap().0;
            let defs: HashMap<String, Term> = c
                .items
                .iter()
                .filter_map(|it| match it {
                    Item::Def { name, body, .. } => Some((name.as_str().to_string(), body.clone())),
                    _ => None,
                })
                .collect();
            for (s, u) in &p.eqs {
                let (s, u) = (resolve(&t(&s.to_string()), &defs), resolve(&t(&u.to_string()), &defs));
                assert_eq!(s, u, "case {case}: {ctx}\n{c}");
            }
            solvable += 1;
        }
        agree += 1;
    }
    assert_eq!(agree, cases);
    assert!(solvable * 5 > cases && solvable * 5 < cases * 4, "{solvable} solvable");
}

const SIGNATURE: &str = "
Parameter T:Prop.
Parameter a:T.
Parameter b:T.
Parameter f:T -> T.
Parameter R:T -> T -> Prop.
Parameter Q:T -> Prop.
Axiom q1:(Q a).
Axiom r1:(x:T)(R x (f x)).
Axiom tr:(x:T)(y:T)(z:T)(R x y) -> (R y z) -> (R x z).
Axiom qr:(x:T)(y:T)(R x y) -> (Q x) -> (Q y).
Axiom sy:(x:T)(y:T)(R x y) -> (R y x).
Axiom qf:(x:T)(Q x) -> (Q (f x)).
";

/// `name`, its term variables, premises and conclusion.
fn axioms() -> Vec<(&'static str, Vec<&'static str>, Vec<Fo>, Fo)> {
    let v = |x: &str| Fo::V(x.into());
    vec![
        ("r1", vec!["x"], vec![], app("R", vec![v("x"), app("f", vec![v("x")])])),
        (
            "tr",
            vec!["x", "y", "z"],
            vec![app("R", vec![v("x"), v("y")]), app("R", vec![v("y"), v("z")])],
            app("R", vec![v("x"), v("z")]),
        ),
        ("qr", vec!["x", "y"], vec![app("R", vec![v("x"), v("y")]), app("Q", vec![v("x")])], app("Q", vec![v("y")])),
        ("sy", vec!["x", "y"], vec![app("R", vec![v("x"), v("y")])], app("R", vec![v("y"), v("x")])),
        ("qf", vec!["x"], vec![app("Q", vec![v("x")])], app("Q", vec![app("f", vec![v("x")])])),
    ]
}

#[derive(Clone, Debug)]
enum Proof {
    Hyp(String),
    Ax { name: String, targs: Vec<Fo>, prems: Vec<Proof> },
}

impl Proof {
    fn term(&self) -> String {
        match self {
            Proof::Hyp(h) => h.clone(),
            Proof::Ax { name, targs, prems } => {
                let mut s = format!("({name}");
                for a in targs {
                    s += &format!(" {a}");
                }
                for p in prems {
                    s += &format!(" {}", p.term());
                }
                s + ")"
            }
        }
    }

    fn tactics(&self, ax: &[(&str, Vec<&str>, Vec<Fo>, Fo)], out: &mut Vec<String>) {
        match self {
            Proof::Hyp(h) => out.push(format!("Apply {h}.")),
            Proof::Ax { name, targs, prems } => {
                out.push(format!("Apply {name}."));
                if let Some((_, tvars, _, concl)) = ax.iter().find(|a| a.0 == name) {
                    for (x, a) in tvars.iter().zip(targs) {
                        if !occurs(x, concl) {
                            out.push(format!("Apply {a}."));
                        }
                    }
                }
                for p in prems {
                    p.tactics(ax, out);
                }
            }
        }
    }
}

fn matches(pat: &Fo, fact: &Fo, s: &mut HashMap<String, Fo>) -> bool {
    match (pat, fact) {
        (Fo::V(x), t) => match s.get(x) {
            Some(u) => u == t,
            None => {
                s.insert(x.clone(), t.clone());
                true
            }
        },
        (Fo::F(c, xs), Fo::F(d, ys)) => c == d && xs.len() == ys.len() && xs.iter().zip(ys).all(|(p, f)| matches(p, f, s)),
        _ => false,
    }
}

struct Case {
    statement: String,
    proof: String,
    tactics: Vec<String>,
}

fn random_case(rng: &mut ChaCha8Rng) -> Case {
    let ax = axioms();
    let k = rng.gen_range(0..=2);
    let xs: Vec<String> = (1..=k).map(|i| format!("x{i}")).collect();
    let mut leaves = vec![app("a", vec![]), app("b", vec![])];
    leaves.extend(xs.iter().map(|x| app(x, vec![])));
    let small = |rng: &mut ChaCha8Rng| {
        let l = leaves.choose(rng).unwrap().clone();
        if rng.gen_bool(0.3) { app("f", vec![l]) } else { l }
    };
    let mut hyps = Vec::new();
    let mut pool: Vec<(Proof, Fo)> = vec![(Proof::Ax { name: "q1".into(), targs: vec![], prems: vec![] }, app("Q", vec![app("a", vec![])]))];
    for i in 1..=rng.gen_range(0..=2) {
        let prop = if rng.gen_bool(0.5) { app("Q", vec![small(rng)]) } else { app("R", vec![small(rng), small(rng)]) };
        let h = format!("H{i}");
        hyps.push((h.clone(), prop.clone()));
        pool.push((Proof::Hyp(h), prop));
    }
    let mut last = pool.len() - 1;
    for _ in 0..rng.gen_range(1..=4) {
        for _attempt in 0..20 {
            let (name, tvars, prems, concl) = ax.choose(rng).unwrap();
            let mut s = HashMap::new();
            let mut proofs = Vec::new();
            let ok = prems.iter().all(|p| {
                let (pf, fact) = pool.choose(rng).unwrap().clone();
                proofs.push(pf);
                matches(p, &fact, &mut s)
            });
            if !ok {
                continue;
            }
            let targs: Vec<Fo> = tvars.iter().map(|x| s.entry(x.to_string()).or_insert_with(|| small(rng)).clone()).collect();
            let fact = subst(concl, &s);
            pool.push((Proof::Ax { name: name.to_string(), targs, prems: proofs }, fact));
            last = pool.len() - 1;
            break;
        }
    }
    let (pf, goal) = pool[last].clone();
    let mut statement = String::new();
    let mut proof = String::new();
    let mut tactics = Vec::new();
    for x in &xs {
        statement += &format!("({x}:T)");
        proof += &format!("[{x}:T]");
        tactics.push(format!("Intro {x}."));
    }
    for (h, p) in &hyps {
        statement += &format!("({h}:{p})");
        proof += &format!("[{h}:{p}]");
        tactics.push(format!("Intro {h}."));
    }
    statement += &goal.to_string();
    proof += &pf.term();
    pf.tactics(&ax, &mut tactics);
    Case { statement, proof, tactics }
}

pub fn random_proofs_recheck_in_kernel(cases: usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for case in 0..cases {
        let c = random_case(&mut rng);
        let by_term = format!("{SIGNATURE}Theorem thm.\nStatement {}.\nProof {}.\n", c.statement, c.proof);
        let by_tactics = format!("{SIGNATURE}Theorem thm.\nStatement {}.\n{}\n", c.statement, c.tactics.join("\n"));
        for script in [by_term, by_tactics] {
            let run = run_script(&script, Default::default());
            assert!(run.ok(), "case {case}:\n{}", run.transcript);
            let ctx = &run.interpreter.state().engine().context;
            assert!(run.interpreter.state().proofs().is_empty(), "case {case}: not saved\n{}", run.transcript);
            let k = kernel_of(ctx).unwrap_or_else(|e| panic!("case {case}: {e}\n{ctx}"));
            let (body, _) = definition(ctx, "thm").unwrap();
            k.check(body, &t(&c.statement)).unwrap_or_else(|e| panic!("case {case}: {e}"));
            assert!(k.convertible(body, &t(&c.proof)).unwrap(), "case {case}: {body} vs {}", c.proof);
        }
    }
}
