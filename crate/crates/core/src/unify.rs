//! First-order unification on constraint items: rigid-rigid decomposition,
//! trivial and pattern instantiation, and a fixpoint driver.

use std::collections::HashSet;

use crate::context::{self, Context, EntryKind, Item, Scope};
use crate::db::Db;
use crate::error::Result;
use crate::reduction::{self, Budget, Fuel};
use crate::term::{Name, Sort, Term};
use crate::typing;

/// Result of simplifying one constraint.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    /// The constraint is equivalent to these items (possibly none).
    Decomposed(Vec<Item>),
    /// A side has an existential head; nothing can be decomposed.
    Postponed,
    /// Different rigid heads: the constraint has no solution.
    Clash,
}

/// A renaming of a goal variable caused by hoisting.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rename {
    pub from: Name,
    pub to: Name,
}

enum Head {
    Sort(Sort),
    Rigid(Name),
    Flex,
    Pi,
    Lam,
}

fn head(scope: &Scope, t: &Db) -> Head {
    match t.spine().0 {
        Db::Sort(s) => Head::Sort(*s),
        Db::Free(x) if scope.is_existential(x) => Head::Flex,
        Db::Free(x) => Head::Rigid(x.clone()),
        Db::Pi(..) => Head::Pi,
        Db::Lam(..) => Head::Lam,
        Db::Bound(_) | Db::App(..) => Head::Flex,
    }
}

/// Simplifies the constraint `a = b` as seen in `scope`.
pub(crate) fn simplify_db(scope: &Scope, a: &Db, b: &Db, fuel: Fuel) -> Result<Outcome> {
    let mut budget = Budget::new(fuel);
    let wa = reduction::whnf_db(scope, a, &mut budget, true)?;
    let wb = reduction::whnf_db(scope, b, &mut budget, true)?;
    if reduction::convertible_db(scope, &wa, &wb, &mut Budget::new(fuel))? {
        return Ok(Outcome::Decomposed(Vec::new()));
    }
    let eq = |x: &Db, y: &Db| Item::Constraint(x.to_term(), y.to_term());
    Ok(match (head(scope, &wa), head(scope, &wb)) {
        (Head::Lam, _) | (_, Head::Lam) => {
            let (dom, hint) = match (&wa, &wb) {
                (Db::Lam(h, d, _), _) | (_, Db::Lam(h, d, _)) => ((**d).clone(), h.clone()),
                _ => unreachable!(),
            };
            let z = binder_name(scope, &hint, &[&wa, &wb]);
            let zv = Db::free(&z);
            let body = |t: &Db| match t {
                Db::Lam(_, _, s) => s.open(&zv),
                _ => Db::app(t.clone(), zv.clone()),
            };
            mini_section(z, dom, eq(&body(&wa), &body(&wb)))
        }
        (Head::Flex, _) | (_, Head::Flex) => Outcome::Postponed,
        (Head::Sort(s), Head::Sort(t)) => {
            if s == t {
                Outcome::Decomposed(Vec::new())
            } else {
                Outcome::Clash
            }
        }
        (Head::Pi, Head::Pi) => {
            let (Db::Pi(h, da, ca), Db::Pi(_, db_, cb)) = (&wa, &wb) else { unreachable!() };
            let mut items = vec![eq(da, db_)];
            if !ca.uses_bound(0) && !cb.uses_bound(0) {
                let dummy = Db::Sort(Sort::Prop);
                items.push(eq(&ca.open(&dummy), &cb.open(&dummy)));
                Outcome::Decomposed(items)
            } else {
                let z = binder_name(scope, h, &[&wa, &wb]);
                let zv = Db::free(&z);
                match mini_section(z, (**da).clone(), eq(&ca.open(&zv), &cb.open(&zv))) {
                    Outcome::Decomposed(more) => {
                        items.extend(more);
                        Outcome::Decomposed(items)
                    }
                    other => other,
                }
            }
        }
        (Head::Rigid(x), Head::Rigid(y)) => {
            let (_, xs) = wa.spine();
            let (_, ys) = wb.spine();
            if x == y && xs.len() == ys.len() {
                Outcome::Decomposed(xs.iter().zip(ys.iter()).map(|(s, t)| eq(s, t)).collect())
            } else {
                Outcome::Clash
            }
        }
        _ => Outcome::Clash,
    })
}

fn mini_section(z: Name, dom: Db, constraint: Item) -> Outcome {
    let label = Name::internal();
    Outcome::Decomposed(vec![
        Item::Begin(label.clone()),
        Item::forall(z, dom.to_term()),
        constraint,
        Item::End(label),
    ])
}

fn binder_name(scope: &Scope, hint: &Name, avoid: &[&Db]) -> Name {
    let base = if hint.is_anonymous() || hint.is_internal() { "z" } else { hint.base() };
    let taken = |n: &Name| scope.lookup(n).is_some() || avoid.iter().any(|t| t.has_free(n));
    let first = Name::new(base);
    if !taken(&first) {
        return first;
    }
    (1..).map(|k| Name::with_suffix(base, k)).find(|n| !taken(n)).expect("unbounded")
}

/// Simplifies the constraint item at `pos`.
pub fn simplify(ctx: &Context, pos: usize, fuel: Fuel) -> Result<Outcome> {
    match ctx.items.get(pos) {
        Some(Item::Constraint(a, b)) => {
            let scope = ctx.scope_at(pos).with_fuel(fuel);
            simplify_db(&scope, &Db::from_term(a), &Db::from_term(b), fuel)
        }
        _ => Err(crate::error::Error::OutOfBounds),
    }
}

/// Instantiates the existential variable `x` by `t`, where `t` is read at
/// position `p`. The definition is placed at the declaration of `x`,
/// abstracted over the locals of closed sections `x` is exported from.
/// Later existentials `t` needs are hoisted when `hoist` is set.
/// Returns `None` when the instantiation is not admissible.
pub fn solve_var(
    ctx: &Context,
    p: usize,
    x: &Name,
    t: &Term,
    hoist: bool,
    fuel: Fuel,
) -> Result<Option<(Context, Vec<Rename>)>> {
    let Some(xi) = ctx.items[..p.min(ctx.items.len())].iter().rposition(|it| it.is_existential_named(x)) else {
        return Ok(None);
    };
    let scope_p = ctx.scope_at(p).with_fuel(fuel);
    if !scope_p.is_existential(x) {
        return Ok(None);
    }
    let t_db = reduction::nf_db(&scope_p, &Db::from_term(t), &mut Budget::new(fuel), true)
        .unwrap_or_else(|_| Db::from_term(t));
    if t_db.has_free(x) {
        return Ok(None);
    }
    let (q, locals) = home(ctx, xi, p);

    // Names of t that are not visible at q.
    let mut offending: Vec<Name> = Vec::new();
    for y in t_db.free_names() {
        match scope_p.lookup(&y) {
            Some(e) if e.origin < q => {}
            Some(e) if matches!(e.kind, EntryKind::Existential) => offending.push(y),
            _ => return Ok(None),
        }
    }
    let mut ctx = ctx.clone();
    let mut renames = Vec::new();
    let (mut p, mut xi, mut q) = (p, xi, q);
    let mut t_db = t_db;
    if !offending.is_empty() {
        if !hoist {
            return Ok(None);
        }
        for y in offending {
            let ty = scope_p.lookup(&y).expect("visible").ty.clone();
            let scope_q = ctx.scope_at(q);
            if ty.free_names().iter().any(|n| scope_q.lookup(n).is_none()) {
                return Ok(None);
            }
            let y2 = ctx.fresh_numbered(y.base());
            let hoisted = [Item::Begin(y2.clone()), Item::exists(y2.clone(), ty.to_term()), Item::End(y2.clone())];
            for (k, it) in hoisted.into_iter().enumerate() {
                ctx.insert(q + k, it);
            }
            p += 3;
            q += 3;
            match solve_var(&ctx, p, &y, &Term::Var(y2.clone()), false, fuel)? {
                Some((c, _)) => {
                    p += c.items.len() - ctx.items.len();
                    ctx = c;
                    xi = ctx.existential_index(x).expect("x is still open");
                }
                None => return Ok(None),
            }
            t_db = t_db.subst_free(&y, &Db::free(&y2));
            renames.push(Rename { from: y, to: y2 });
        }
    }
    let _ = p;
    let applied = Db::apps(t_db, locals.iter().map(Db::free));
    let scope_x = ctx.scope_at(xi).with_fuel(fuel);
    let x_in = reduction::nf_db(&EmptyDefs(&scope_x), &applied, &mut Budget::new(fuel), false)?;
    match instantiate_at(&ctx, xi, &x_in.to_term(), fuel)? {
        Some(c) => Ok(Some((c, renames))),
        None => Ok(None),
    }
}

/// Beta-only normalization view of a scope.
struct EmptyDefs<'a>(&'a Scope);

impl reduction::Signature for EmptyDefs<'_> {
    fn definition(&self, _: &Name) -> Option<Db> {
        None
    }
    fn type_of(&self, x: &Name) -> Option<Db> {
        reduction::Signature::type_of(self.0, x)
    }
}

/// Replaces `∃x:T` at `xi` by `U = T; x := v : T` where `U` is the type of `v`.
pub(crate) fn instantiate_at(ctx: &Context, xi: usize, v: &Term, fuel: Fuel) -> Result<Option<Context>> {
    let (name, ty) = match &ctx.items[xi] {
        Item::Decl { name, ty, .. } => (name.clone(), ty.clone()),
        _ => return Ok(None),
    };
    let u = match typing::infer(ctx, xi, v, fuel) {
        Ok(u) => u,
        Err(crate::error::Error::FuelExhausted) => return Err(crate::error::Error::FuelExhausted),
        Err(_) => return Ok(None),
    };
    let mut out = ctx.clone();
    out.items[xi] = Item::Constraint(u, ty.clone());
    out.insert(xi + 1, Item::Def { name, body: v.clone(), ty });
    Ok(Some(out))
}

/// The position at which an instantiation of the existential at `xi`, read
/// at `p`, has to be placed, and the section locals to apply it to.
fn home(ctx: &Context, xi: usize, p: usize) -> (usize, Vec<Name>) {
    let secs = ctx.enclosing_sections(xi);
    let Some(k) = secs.iter().position(|&(_, end)| matches!(end, Some(e) if e < p)) else {
        return (xi, Vec::new());
    };
    let q = secs[k].0;
    let begins: Vec<usize> = secs.iter().map(|&(b, _)| b).collect();
    let mut stack: Vec<usize> = Vec::new();
    let mut locals = Vec::new();
    for (j, it) in ctx.items.iter().enumerate().take(xi) {
        match it {
            Item::Begin(_) => stack.push(j),
            Item::End(_) => {
                stack.pop();
            }
            Item::Decl { q: context::Quantifier::Forall, name, .. }
                if j > q && stack.len() <= begins.len() && stack[..] == begins[..stack.len()] =>
            {
                locals.push(name.clone())
            }
            _ => {}
        }
    }
    (q, locals)
}

/// `(x c1 .. cn)` with `x` existential and the `ci` distinct universals
/// declared after `x`.
fn as_pattern(scope: &Scope, t: &Db) -> Option<(Name, Vec<Name>)> {
    let (h, args) = t.spine();
    let x = h.as_free()?;
    let xe = scope.lookup(x)?;
    if !matches!(xe.kind, EntryKind::Existential) {
        return None;
    }
    let mut seen = HashSet::new();
    let mut cs = Vec::new();
    for a in args {
        let c = a.as_free()?;
        let ce = scope.lookup(c)?;
        if !matches!(ce.kind, EntryKind::Universal) || ce.origin <= xe.origin || !seen.insert(c.clone()) {
            return None;
        }
        cs.push(c.clone());
    }
    Some((x.clone(), cs))
}

/// Tries to solve the constraint at `pos` by instantiating the head of one
/// side. The constraint is removed on success.
pub fn solve_constraint(ctx: &Context, pos: usize, hoist: bool, fuel: Fuel) -> Result<Option<(Context, Vec<Rename>)>> {
    let (a, b) = match ctx.items.get(pos) {
        Some(Item::Constraint(a, b)) => (a.clone(), b.clone()),
        _ => return Ok(None),
    };
    let scope = ctx.scope_at(pos).with_fuel(fuel);
    let mut budget = Budget::new(fuel);
    let (da, db_) = (Db::from_term(&a), Db::from_term(&b));
    let wa = reduction::whnf_db(&scope, &da, &mut budget, true)?;
    let wb = reduction::whnf_db(&scope, &db_, &mut budget, true)?;
    let mut without = ctx.clone();
    without.remove(pos);
    for (lhs, rhs) in [(&wa, &wb), (&wb, &wa)] {
        let Some((x, cs)) = as_pattern(&scope, lhs) else { continue };
        let binders: Vec<(Name, Db)> =
            cs.iter().map(|c| (c.clone(), scope.lookup(c).expect("pattern arg").ty.clone())).collect();
        if rhs.has_free(&x) {
            continue;
        }
        let sol = Db::lams_over(&binders, rhs.clone()).to_term();
        if let Some(r) = solve_var(&without, pos, &x, &sol, hoist, fuel)? {
            return Ok(Some(r));
        }
    }
    Ok(None)
}

/// Simplifies and solves constraints until nothing changes.
pub fn solve_first_order(ctx: &Context, fuel: Fuel) -> Result<(Context, Vec<Rename>)> {
    let mut ctx = context::normalize_context(ctx, fuel)?;
    let mut renames: Vec<Rename> = Vec::new();
    let mut rounds = 0;
    'outer: while rounds < 10_000 {
        rounds += 1;
        let positions: Vec<usize> = ctx.constraints().iter().map(|(i, _, _)| *i).collect();
        for &p in &positions {
            match simplify(&ctx, p, fuel)? {
                Outcome::Clash => break 'outer,
                Outcome::Decomposed(items) => {
                    ctx.remove(p);
                    for (k, it) in items.into_iter().enumerate() {
                        ctx.insert(p + k, it);
                    }
                    ctx = context::normalize_context(&ctx, fuel)?;
                    continue 'outer;
                }
                Outcome::Postponed => {}
            }
        }
        for hoist in [false, true] {
            for &p in &positions {
                if let Some((c, rs)) = solve_constraint(&ctx, p, hoist, fuel)? {
                    ctx = context::normalize_context(&c, fuel)?;
                    renames.extend(rs);
                    continue 'outer;
                }
            }
        }
        break;
    }
    Ok((remove_empty_mini_sections(ctx), renames))
}

/// Drops the binder sections introduced by decomposition once their
/// constraints are gone.
fn remove_empty_mini_sections(mut ctx: Context) -> Context {
    loop {
        let found = ctx.items.iter().enumerate().find_map(|(i, it)| match it {
            Item::Begin(l) if l.is_internal() => {
                let end = ctx.matching_end(i)?;
                let only_universals =
                    ctx.items[i + 1..end].iter().all(|it| matches!(it, Item::Decl { q: context::Quantifier::Forall, .. }));
                only_universals.then_some((i, end))
            }
            _ => None,
        });
        match found {
            Some((b, e)) => {
                for _ in b..=e {
                    ctx.remove(b);
                }
            }
            None => return ctx,
        }
    }
}
