use super::*;
use cqc_core::context::physical_close;
use cqc_core::tactics::{ProofKind, ProofState};
use cqc_core::{Config, EngineState, Item, Quantifier};

fn manual() -> Config {
    Config { auto_solve: false, ..checked() }
}

fn gamma(config: Config) -> EngineState {
    let mut e = EngineState::new(config);
    for (q, x, ty) in [(Quantifier::Forall, "A", "Prop"), (Quantifier::Exists, "X", "Prop"), (Quantifier::Exists, "y", "X -> A")] {
        let len = e.context.len();
        e.move_index(len).unwrap();
        e.load(&t(ty)).unwrap();
        e.declare(q, &x.into()).unwrap();
    }
    e
}

pub fn postponed_constraint_then_solved() {
    let mut e = gamma(manual());
    e.instantiate_named(&"y".into(), &t("[x:X]x")).unwrap();
    let cs = e.context.constraints();
    assert_eq!(cs.len(), 1, "{}", e.context);
    assert!(same(cs[0].1, "X -> X") && same(cs[0].2, "X -> A"), "{}", e.context);
    e.solve().unwrap();
    assert!(e.context.constraints().is_empty(), "{}", e.context);
    let x = definition(&e.context, "X").expect("X solved");
    assert!(same(x.0, "A"));
    let y = definition(&e.context, "y").expect("y defined");
    assert!(same(y.0, "[x:A]x") && same(y.1, "A -> A"), "{}", e.context);
}

pub fn auto_solve_on_instantiation() {
    let mut e = gamma(checked());
    e.instantiate_named(&"y".into(), &t("[x:X]x")).unwrap();
    assert!(e.context.constraints().is_empty(), "{}", e.context);
    assert!(same(definition(&e.context, "X").unwrap().0, "A"));
}

pub fn a_priori_ill_typed_constraint_is_rejected() {
    let mut e = gamma(manual());
    e.instantiate_named(&"X".into(), &t("A -> A")).unwrap();
    assert!(e.instantiate_named(&"y".into(), &t("[x:A]x")).is_err());
}

const DELTA: [(&str, &str); 8] = [
    ("T", "Prop"),
    ("R", "T -> T -> Prop"),
    ("Eq", "T -> T -> Prop"),
    ("Antisym", "(x:T)(y:T)(R x y) -> (R y x) -> (Eq x y)"),
    ("a", "T"),
    ("b", "T"),
    ("ax1", "(R a b)"),
    ("ax2", "(R b a)"),
];

fn delta() -> Vec<Item> {
    DELTA.iter().map(|(x, ty)| fa(x, ty)).collect()
}

pub fn apply_as_substitution() {
    let mut e = EngineState::new(checked());
    for (x, ty) in DELTA.iter().copied().chain([("h1", "T"), ("h2", "T"), ("h3", "(R h1 h2)"), ("h4", "(R h2 h1)")]) {
        let q = if x.starts_with('h') { Quantifier::Exists } else { Quantifier::Forall };
        e.load(&t(ty)).unwrap();
        e.declare(q, &x.into()).unwrap();
    }
    e.load(&t("(Eq a b)")).unwrap();
    e.declare(Quantifier::Exists, &"x".into()).unwrap();
    e.instantiate_named(&"x".into(), &t("(Antisym h1 h2 h3 h4)")).unwrap();
    let residual: Vec<Item> = e.context.items.iter().filter(|i| !matches!(i, Item::Def { .. })).cloned().collect();
    let mut expected = delta();
    expected.extend([ex("h3", "(R a b)"), ex("h4", "(R b a)")]);
    assert!(items_alpha_eq(&residual, &expected), "{}", show(&residual));
    assert!(same(definition(&e.context, "h1").unwrap().0, "a"));
    assert!(same(definition(&e.context, "h2").unwrap().0, "b"));
}

pub fn apply_tactic_leaves_two_goals() {
    let mut ps = ProofState::new(checked());
    for (x, ty) in DELTA {
        ps.declare(Quantifier::Forall, &x.into(), &t(ty), false).unwrap();
    }
    ps.begin_proof(ProofKind::Goal, Some(&"x".into()), Some(&t("(Eq a b)"))).unwrap();
    ps.apply(&t("Antisym")).unwrap();
    let goals = ps.goals();
    assert_eq!(goals.len(), 2);
    assert!(same(&goals[0].statement, "(R a b)") && same(&goals[1].statement, "(R b a)"));
    let ctx = ps.context();
    let exist: Vec<Item> = ctx.items.iter().filter(|i| i.is_existential()).cloned().collect();
    let names: Vec<&str> = goals.iter().map(|g| g.name.as_str()).collect();
    let expected = vec![ex(names[0], "(R a b)"), ex(names[1], "(R b a)")];
    assert!(items_alpha_eq(&exist, &expected), "{}", show(&exist));
    assert!(ctx.constraints().is_empty());
}

/// The development of `I` with explicit sections, one engine step at a time.
fn section_steps() -> Vec<Vec<Item>> {
    let mut e = EngineState::new(checked());
    let mut states = vec![e.context.items.clone()];
    let i = "I".into();
    e.open_section(&i).unwrap();
    states.push(e.context.items.clone());
    e.load(&t("Prop")).unwrap();
    e.declare(Quantifier::Forall, &"P".into()).unwrap();
    states.push(e.context.items.clone());
    e.load(&t("P")).unwrap();
    e.declare(Quantifier::Forall, &"x".into()).unwrap();
    states.push(e.context.items.clone());
    e.load(&t("x")).unwrap();
    e.insert_definition(&i).unwrap();
    states.push(e.context.items.clone());
    e.close_section(&i).unwrap();
    states.push(e.context.items.clone());
    states
}

pub fn explicit_section_sequence() {
    let expected = vec![
        vec![],
        vec![begin()],
        vec![begin(), fa("P", "Prop")],
        vec![begin(), fa("P", "Prop"), fa("x", "P")],
        vec![begin(), fa("P", "Prop"), fa("x", "P"), df("I", "x", "P")],
        vec![begin(), fa("P", "Prop"), fa("x", "P"), df("I", "x", "P"), end()],
    ];
    let got = section_steps();
    assert_eq!(got.len(), expected.len());
    for (g, x) in got.iter().zip(&expected) {
        assert!(items_alpha_eq(g, x), "{} vs {}", show(g), show(x));
    }
    let ctx = cqc_core::Context::from_items(got.last().unwrap().clone());
    let (body, ty) = cqc_core::context::discharge_view(&ctx, ctx.len(), &"I".into()).unwrap();
    assert!(same(&body.unwrap(), "[P:Prop][x:P]x") && same(&ty, "(P:Prop)(P -> P)"));
    assert!(ctx.scope_at(ctx.len()).lookup(&"P".into()).is_none());
}

pub fn implicit_section_sequence() {
    let expected = vec![
        vec![],
        vec![fa("P", "Prop")],
        vec![fa("P", "Prop"), fa("x", "P")],
        vec![fa("P", "Prop"), fa("x", "P"), df("I", "x", "P")],
        vec![df("I", "[P:Prop][x:P]x", "(P:Prop)(P -> P)")],
    ];
    let steps = section_steps();
    let mut got: Vec<Vec<Item>> = steps[2..5]
        .iter()
        .map(|s| s.iter().filter(|i| !matches!(i, Item::Begin(_))).cloned().collect())
        .collect();
    got.insert(0, steps[0].clone());
    let closed = physical_close(&cqc_core::Context::from_items(steps[5].clone()), &"I".into()).unwrap();
    got.push(closed.items);
    for (g, x) in got.iter().zip(&expected) {
        assert!(items_alpha_eq(g, x), "{} vs {}", show(g), show(x));
    }
}

pub fn intro_states_and_physical_close() {
    let mut ps = ProofState::new(checked());
    let h = "h".into();
    ps.begin_proof(ProofKind::Goal, Some(&h), Some(&t("(P:Prop)(P -> P)"))).unwrap();
    let s0 = vec![begin(), ex("h", "(P:Prop)(P -> P)"), end()];
    assert!(items_alpha_eq(&ps.context().items, &s0), "{}", show(&ps.context().items));
    ps.intro(None).unwrap();
    let s1 = vec![begin(), fa("P", "Prop"), ex("h", "P -> P"), end()];
    assert!(items_alpha_eq(&ps.context().items, &s1), "{}", show(&ps.context().items));
    ps.intro(Some(&"x".into())).unwrap();
    let s2 = vec![begin(), fa("P", "Prop"), fa("x", "P"), ex("h", "P"), end()];
    assert!(items_alpha_eq(&ps.context().items, &s2), "{}", show(&ps.context().items));
    ps.apply(&t("x")).unwrap();
    let s3 = vec![begin(), fa("P", "Prop"), fa("x", "P"), df("h", "x", "P"), end()];
    assert!(items_alpha_eq(&ps.context().items, &s3), "{}", show(&ps.context().items));
    let closed = physical_close(ps.context(), &ps.proofs()[0].label).unwrap();
    assert!(items_alpha_eq(&closed.items, &[df("h", "[P:Prop][x:P]x", "(P:Prop)(P -> P)")]), "{}", show(&closed.items));
    ps.save(None).unwrap();
    assert!(items_alpha_eq(&ps.context().items, &[df("h", "[P:Prop][x:P]x", "(P:Prop)(P -> P)")]));
}
