//! Type inference and checking in a context, with conversion taken modulo
//! the constraints visible at the position of the query.

use std::collections::HashMap;
use std::sync::Arc;

use crate::context::{Context, Scope};
use crate::db::Db;
use crate::error::{Error, Result};
use crate::reduction::{self, Budget, Fuel, Locals, Signature};
use crate::term::{Name, Sort, Term};

struct Checker<'a> {
    env: Locals<'a>,
    constraints: &'a [(Db, Db)],
    budget: Budget,
    trace: Vec<&'static str>,
}

impl<'a> Checker<'a> {
    fn new(scope: &'a Scope, fuel: Fuel) -> Checker<'a> {
        let constraints = if scope.has_constraints() { scope.normal_constraints() } else { &[] };
        Checker { env: Locals::new(scope), constraints, budget: Budget::new(fuel), trace: Vec::new() }
    }

    fn type_error(&self, at: &Db, reason: impl Into<String>) -> Error {
        Error::TypeError { location: self.display(at), reason: reason.into(), trace: self.trace.clone() }
    }

    fn display(&self, t: &Db) -> Term {
        t.to_term()
    }

    fn infer(&mut self, t: &Db) -> Result<Db> {
        match t {
            Db::Sort(Sort::Prop) => Ok(Db::Sort(Sort::Type)),
            Db::Sort(Sort::Type) => Err(self.type_error(t, "Type has no type")),
            Db::Free(x) => self.env.type_of(x).ok_or_else(|| Error::UnboundName(x.clone())),
            Db::Bound(_) => Err(self.type_error(t, "loose bound variable")),
            Db::App(f, a) => {
                self.trace.push("app");
                let tf = self.infer(f)?;
                let (dom, cod) = match self.as_pi(&tf)? {
                    Some(p) => p,
                    None => {
                        return Err(self.type_error(t, format!("{} is applied but has type {}", f.to_term(), tf.to_term())))
                    }
                };
                let ta = self.infer(a)?;
                if !self.equiv(&ta, &dom)? {
                    return Err(Error::TypeError {
                        location: t.to_term(),
                        reason: format!(
                            "argument {} has type {} but {} was expected",
                            a.to_term(),
                            ta.to_term(),
                            dom.to_term()
                        ),
                        trace: self.trace.clone(),
                    });
                }
                self.trace.pop();
                Ok(cod.open(a))
            }
            Db::Lam(h, dom, body) => {
                self.trace.push("abs");
                self.infer_sort(dom)?;
                let z = Name::internal();
                self.env.vars.push((z.clone(), (**dom).clone()));
                let r = self.infer(&body.open(&Db::free(&z))).and_then(|tb| {
                    self.infer_sort(&tb)?;
                    Ok(tb)
                });
                self.env.vars.pop();
                let tb = r?;
                self.trace.pop();
                Ok(Db::Pi(h.clone(), dom.clone(), Arc::new(tb.close(&z))))
            }
            Db::Pi(_, dom, body) => {
                self.trace.push("prod");
                self.infer_sort(dom)?;
                let z = Name::internal();
                self.env.vars.push((z.clone(), (**dom).clone()));
                let r = self.infer_sort(&body.open(&Db::free(&z)));
                self.env.vars.pop();
                let s = r?;
                self.trace.pop();
                Ok(Db::Sort(s))
            }
        }
    }

    fn infer_sort(&mut self, t: &Db) -> Result<Sort> {
        let ty = self.infer(t)?;
        match self.as_sort(&ty)? {
            Some(s) => Ok(s),
            None => Err(self.type_error(t, format!("has type {}, not a sort", ty.to_term()))),
        }
    }

    fn as_pi(&mut self, ty: &Db) -> Result<Option<(Db, Db)>> {
        let w = reduction::whnf_db(&self.env, ty, &mut self.budget, true)?;
        if let Db::Pi(_, d, c) = &w {
            return Ok(Some(((**d).clone(), (**c).clone())));
        }
        if self.constraints.is_empty() {
            return Ok(None);
        }
        let nf = reduction::nf_db(&self.env, ty, &mut self.budget, true)?;
        let cc = Closure::new(self.constraints, &[&nf]);
        Ok(cc.class_of(&nf).into_iter().find_map(|t| match t {
            Db::Pi(_, d, c) => Some(((*d).clone(), (*c).clone())),
            _ => None,
        }))
    }

    fn as_sort(&mut self, ty: &Db) -> Result<Option<Sort>> {
        let w = reduction::whnf_db(&self.env, ty, &mut self.budget, true)?;
        if let Db::Sort(s) = w {
            return Ok(Some(s));
        }
        if self.constraints.is_empty() {
            return Ok(None);
        }
        let nf = reduction::nf_db(&self.env, ty, &mut self.budget, true)?;
        let cc = Closure::new(self.constraints, &[&nf]);
        Ok(cc.class_of(&nf).into_iter().find_map(|t| match t {
            Db::Sort(s) => Some(s),
            _ => None,
        }))
    }

    fn equiv(&mut self, a: &Db, b: &Db) -> Result<bool> {
        if reduction::convertible_db(&self.env, a, b, &mut self.budget)? {
            return Ok(true);
        }
        if self.constraints.is_empty() {
            return Ok(false);
        }
        let na = reduction::nf_db(&self.env, a, &mut self.budget, true)?;
        let nb = reduction::nf_db(&self.env, b, &mut self.budget, true)?;
        let cc = Closure::new(self.constraints, &[&na, &nb]);
        Ok(cc.same(&na, &nb))
    }
}

/// Congruence closure over hash-consed nodes. Applications, abstractions and
/// products are function symbols on their children; everything else is an
/// atom.
struct Closure {
    ids: HashMap<Db, usize>,
    terms: Vec<Db>,
    children: Vec<Option<(u8, usize, usize)>>,
    parent: Vec<usize>,
}

impl Closure {
    fn new(equations: &[(Db, Db)], extra: &[&Db]) -> Closure {
        let mut cc = Closure { ids: HashMap::new(), terms: Vec::new(), children: Vec::new(), parent: Vec::new() };
        let mut pairs = Vec::new();
        for (a, b) in equations {
            let i = cc.add(a);
            let j = cc.add(b);
            pairs.push((i, j));
        }
        for t in extra {
            cc.add(t);
        }
        for (i, j) in pairs {
            cc.union(i, j);
        }
        cc.saturate();
        cc
    }

    fn add(&mut self, t: &Db) -> usize {
        if let Some(&i) = self.ids.get(t) {
            return i;
        }
        let children = match t {
            Db::App(f, a) => Some((0, self.add(f), self.add(a))),
            Db::Lam(_, d, b) => Some((1, self.add(d), self.add(b))),
            Db::Pi(_, d, b) => Some((2, self.add(d), self.add(b))),
            _ => None,
        };
        let i = self.terms.len();
        self.ids.insert(t.clone(), i);
        self.terms.push(t.clone());
        self.children.push(children);
        self.parent.push(i);
        i
    }

    fn find(&self, mut i: usize) -> usize {
        while self.parent[i] != i {
            i = self.parent[i];
        }
        i
    }

    fn union(&mut self, i: usize, j: usize) -> bool {
        let (a, b) = (self.find(i), self.find(j));
        if a == b {
            return false;
        }
        self.parent[a.max(b)] = a.min(b);
        true
    }

    fn saturate(&mut self) {
        loop {
            let mut changed = false;
            let mut table: HashMap<(u8, usize, usize), usize> = HashMap::new();
            for i in 0..self.terms.len() {
                if let Some((tag, c1, c2)) = self.children[i] {
                    let key = (tag, self.find(c1), self.find(c2));
                    match table.get(&key) {
                        Some(&j) => changed |= self.union(i, j),
                        None => {
                            table.insert(key, i);
                        }
                    }
                }
            }
            if !changed {
                break;
            }
        }
    }

    fn same(&self, a: &Db, b: &Db) -> bool {
        match (self.ids.get(a), self.ids.get(b)) {
            (Some(&i), Some(&j)) => self.find(i) == self.find(j),
            _ => a == b,
        }
    }

    fn class_of(&self, t: &Db) -> Vec<Db> {
        let Some(&i) = self.ids.get(t) else { return Vec::new() };
        let r = self.find(i);
        (0..self.terms.len())
            .filter(|&j| self.find(j) == r && self.terms[j].is_locally_closed())
            .map(|j| self.terms[j].clone())
            .collect()
    }
}

pub(crate) fn infer_db(scope: &Scope, t: &Db, fuel: Fuel) -> Result<Db> {
    Checker::new(scope, fuel).infer(t)
}

pub(crate) fn infer_sort_db(scope: &Scope, t: &Db, fuel: Fuel) -> Result<Sort> {
    Checker::new(scope, fuel).infer_sort(t)
}

pub(crate) fn check_db(scope: &Scope, t: &Db, ty: &Db, fuel: Fuel) -> Result<()> {
    let mut c = Checker::new(scope, fuel);
    let inferred = c.infer(t)?;
    if c.equiv(&inferred, ty)? {
        Ok(())
    } else {
        Err(Error::Mismatch { inferred: inferred.to_term(), expected: ty.to_term() })
    }
}

pub(crate) fn equiv_db(scope: &Scope, a: &Db, b: &Db, fuel: Fuel) -> Result<bool> {
    Checker::new(scope, fuel).equiv(a, b)
}

/// The type of `t` in `ctx.items[..at]`.
pub fn infer(ctx: &Context, at: usize, t: &Term, fuel: Fuel) -> Result<Term> {
    let scope = ctx.scope_at(at).with_fuel(fuel);
    Ok(infer_db(&scope, &Db::from_term(t), fuel)?.to_term())
}

pub fn check(ctx: &Context, at: usize, t: &Term, ty: &Term, fuel: Fuel) -> Result<()> {
    let scope = ctx.scope_at(at).with_fuel(fuel);
    check_db(&scope, &Db::from_term(t), &Db::from_term(ty), fuel)
}

/// Conversion modulo the constraints visible at `at`.
pub fn equiv_mod_constraints(ctx: &Context, at: usize, a: &Term, b: &Term, fuel: Fuel) -> Result<bool> {
    let scope = ctx.scope_at(at).with_fuel(fuel);
    equiv_db(&scope, &Db::from_term(a), &Db::from_term(b), fuel)
}
