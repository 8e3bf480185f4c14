use super::*;
use cqc_core::context::normalize_context;
use cqc_core::db::Db;
use cqc_core::reduction::{convertible, normalize};
use cqc_core::term::alpha_eq;
use cqc_core::vernacular::parse_term;
use cqc_core::{Context, Item, Name, Sort, Term};
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

const NAMES: [&str; 5] = ["x", "y", "z", "P", "Q"];

pub fn name() -> impl Strategy<Value = Name> {
    prop::sample::select(&NAMES[..]).prop_map(Name::new)
}

pub fn raw_term() -> impl Strategy<Value = Term> {
    let leaf = prop_oneof![
        name().prop_map(Term::Var),
        Just(Term::Sort(Sort::Prop)),
        Just(Term::Sort(Sort::Type)),
    ];
    leaf.prop_recursive(5, 40, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(f, a)| Term::app(f, a)),
            (name(), inner.clone(), inner.clone()).prop_map(|(x, a, b)| Term::lambda(x, a, b)),
            (name(), inner.clone(), inner).prop_map(|(x, a, b)| Term::product(x, a, b)),
        ]
    })
}

/// Renames every binder to a fresh name, avoiding capture.
pub fn rename_binders(t: &Term, n: &mut u32) -> Term {
    match t {
        Term::Sort(_) | Term::Var(_) => t.clone(),
        Term::App(f, a) => Term::app(rename_binders(f, n), rename_binders(a, n)),
        Term::Lambda(x, a, b) | Term::Product(x, a, b) => {
            *n += 1;
            let y = Name::new(format!("w{n}"));
            let b = rename_binders(&b.subst(x, &Term::Var(y.clone())), n);
            let a = rename_binders(a, n);
            if matches!(t, Term::Lambda(..)) {
                Term::lambda(y, a, b)
            } else {
                Term::product(y, a, b)
            }
        }
    }
}

pub fn signature() -> Context {
    Context::from_items(vec![
        fa("T", "Prop"),
        fa("a", "T"),
        fa("b", "T"),
        fa("f", "T -> T"),
        fa("R", "T -> T -> Prop"),
        df("g", "[v:T](f (f v))", "T -> T"),
    ])
}

/// Well-typed terms of type `T` over the signature, with redexes.
pub fn obj(depth: u32) -> BoxedStrategy<String> {
    let leaf = prop::sample::select(vec!["a".to_string(), "b".to_string()]).boxed();
    if depth == 0 {
        return leaf;
    }
    let sub = obj(depth - 1);
    prop_oneof![
        leaf,
        sub.clone().prop_map(|t| format!("(f {t})")),
        sub.clone().prop_map(|t| format!("(g {t})")),
        sub.clone().prop_map(|t| format!("(([v:T](f v)) {t})")),
        (sub.clone(), sub).prop_map(|(t, u)| format!("(([v:T][w:T](g w)) {t} {u})")),
    ]
    .boxed()
}

/// Propositions over the signature.
pub fn prop_() -> impl Strategy<Value = String> {
    let o = || obj(2);
    prop_oneof![
        (o(), o()).prop_map(|(t, u)| format!("(R {t} {u})")),
        (o(), o()).prop_map(|(t, u)| format!("(x:T)(R x {t}) -> (R {u} x)")),
        o().prop_map(|t| format!("(([v:T](R v v)) {t})")),
        o().prop_map(|t| format!("((g:T -> T)(R (g {t}) a)) -> (R a a)")),
    ]
}

pub fn alpha_laws(t: &Term, u: &Term) -> Result<(), TestCaseError> {
    let r = rename_binders(t, &mut 0);
    let r2 = rename_binders(&r, &mut 100);
    prop_assert!(alpha_eq(t, t));
    prop_assert!(alpha_eq(t, &r) && alpha_eq(&r, t));
    prop_assert!(alpha_eq(&r, &r2) && alpha_eq(t, &r2));
    prop_assert_eq!(alpha_eq(t, u), alpha_eq(u, t));
    prop_assert_eq!(alpha_eq(t, u), Db::from_term(t) == Db::from_term(u));
    prop_assert_eq!(t.free_vars(), r.free_vars());
    Ok(())
}

pub fn substitution_laws(t: &Term, x: &Name, u: &Term) -> Result<(), TestCaseError> {
    prop_assert!(alpha_eq(&t.subst(x, &Term::Var(x.clone())), t));
    let s = t.subst(x, u);
    if !t.occurs_free(x) {
        prop_assert!(alpha_eq(&s, t));
    }
    for y in s.free_vars() {
        prop_assert!((t.occurs_free(&y) && y != *x) || u.occurs_free(&y));
    }
    Ok(())
}

pub fn print_then_parse(t: &Term) -> Result<(), TestCaseError> {
    let back = parse_term(&t.to_string()).unwrap();
    prop_assert!(alpha_eq(&back, t), "{} reparsed as {}", t, back);
    Ok(())
}

pub fn normalization_is_idempotent(p: &str, o: &str) -> Result<(), TestCaseError> {
    let ctx = signature();
    let scope = ctx.scope_at(ctx.len());
    for (s, ty) in [(p, "Prop"), (o, "T")] {
        let term = t(s);
        let n1 = normalize(&scope, &term, &t(ty), Default::default()).unwrap();
        let n2 = normalize(&scope, &n1, &t(ty), Default::default()).unwrap();
        prop_assert!(alpha_eq(&n1, &n2), "{} then {}", n1, n2);
        prop_assert!(convertible(&scope, &term, &n1, Default::default()).unwrap());
        prop_assert!(!n1.occurs_free(&"g".into()));
    }
    Ok(())
}

pub fn context_normalization_is_idempotent(p: &str, o: &str) -> Result<(), TestCaseError> {
    let mut ctx = signature();
    ctx.items.push(Item::forall("h", t(p)));
    ctx.items.push(Item::exists("X", t("T")));
    ctx.items.push(Item::Constraint(t(&format!("(f {o})")), t("(f X)")));
    ctx.items.push(Item::def("c", t(o), t("T")));
    ctx.index = ctx.len();
    let n1 = normalize_context(&ctx, Default::default()).unwrap();
    let n2 = normalize_context(&n1, Default::default()).unwrap();
    prop_assert!(items_alpha_eq(&n1.items, &n2.items), "{}\n{}", n1, n2);
    prop_assert_eq!(n1.index, n1.len());
    Ok(())
}
