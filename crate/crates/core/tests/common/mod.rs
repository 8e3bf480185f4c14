#![allow(dead_code)]

pub mod laws;
pub mod random;
pub mod scenarios;

use cqc_core::kernel::Kernel;
use cqc_core::term::alpha_eq;
use cqc_core::vernacular::parse_term;
use cqc_core::{Config, Context, Item, Quantifier, Term};

pub fn corpus(name: &str) -> String {
    std::fs::read_to_string(format!("{}/corpus/{name}", env!("CARGO_MANIFEST_DIR"))).unwrap()
}

pub const CORPUS: [&str; 8] = [
    "section_theorem.v",
    "section_explicit.v",
    "example1_check.v",
    "example2_check.v",
    "example1_tactics.v",
    "example2_tactics.v",
    "tarski1.v",
    "tarski2.v",
];

pub fn checked() -> Config {
    Config { check_invariants: true, ..Config::default() }
}

pub fn t(s: &str) -> Term {
    parse_term(s).unwrap()
}

/// Every script in the corpus directory, including ones that only parse.
pub fn all_scripts() -> Vec<(String, String)> {
    let dir = format!("{}/corpus", env!("CARGO_MANIFEST_DIR"));
    let mut v: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "v"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read_to_string(&p).unwrap()))
        .collect();
    v.sort();
    v
}

/// Physically closes the closed top-level sections, then replays the
/// result into a fresh kernel.
pub fn kernel_of(ctx: &Context) -> Result<Kernel, String> {
    let mut ctx = ctx.clone();
    while let Some(b) = ctx.items.iter().position(|i| matches!(i, Item::Begin(_))) {
        ctx = cqc_core::context::physical_close_at(&ctx, b).map_err(|e| e.to_string())?;
    }
    let mut k = Kernel::new();
    for it in &ctx.items {
        match it {
            Item::Decl { q: Quantifier::Forall, name, ty } => k.add_axiom(name, ty)?,
            Item::Def { name, body, ty } => k.add_definition(name, body, ty)?,
            other => return Err(format!("unexpected item {other}")),
        }
    }
    Ok(k)
}

pub fn definition<'a>(ctx: &'a Context, x: &str) -> Option<(&'a Term, &'a Term)> {
    ctx.items.iter().find_map(|it| match it {
        Item::Def { name, body, ty } if name.as_str() == x => Some((body, ty)),
        _ => None,
    })
}

pub fn same(a: &Term, b: &str) -> bool {
    alpha_eq(a, &t(b))
}

/// Item-wise equality with terms compared up to bound names. Section labels
/// are ignored.
pub fn items_alpha_eq(a: &[Item], b: &[Item]) -> bool {
    a.len() == b.len()
        && a.iter().zip(b).all(|(x, y)| match (x, y) {
            (Item::Decl { q, name, ty }, Item::Decl { q: q2, name: n2, ty: t2 }) => q == q2 && name == n2 && alpha_eq(ty, t2),
            (Item::Def { name, body, ty }, Item::Def { name: n2, body: b2, ty: t2 }) => {
                name == n2 && alpha_eq(body, b2) && alpha_eq(ty, t2)
            }
            (Item::Constraint(l, r), Item::Constraint(l2, r2)) => alpha_eq(l, l2) && alpha_eq(r, r2),
            (Item::Begin(_), Item::Begin(_)) | (Item::End(_), Item::End(_)) => true,
            _ => false,
        })
}

pub fn show(items: &[Item]) -> String {
    let v: Vec<String> = items.iter().map(|i| i.to_string()).collect();
    format!("[{}]", v.join("; "))
}

pub fn fa(x: &str, ty: &str) -> Item {
    Item::forall(x, t(ty))
}

pub fn ex(x: &str, ty: &str) -> Item {
    Item::exists(x, t(ty))
}

pub fn df(x: &str, body: &str, ty: &str) -> Item {
    Item::def(x, t(body), t(ty))
}

pub fn begin() -> Item {
    Item::Begin("_".into())
}

pub fn end() -> Item {
    Item::End("_".into())
}
