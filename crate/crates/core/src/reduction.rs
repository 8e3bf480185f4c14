//! Beta-delta reduction, eta-long normal forms and convertibility.
//!
//! Every entry point runs on a fresh step budget taken from [`Fuel`];
//! running out is reported as [`Error::FuelExhausted`].

use crate::db::Db;
use crate::error::{Error, Result};
use crate::term::{Name, Sort, Term};

/// Maximum number of reduction steps per entry-point call.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Fuel(pub u64);

impl Default for Fuel {
    fn default() -> Fuel {
        Fuel(100_000)
    }
}

pub(crate) struct Budget {
    left: u64,
}

impl Budget {
    pub(crate) fn new(fuel: Fuel) -> Budget {
        Budget { left: fuel.0 }
    }

    fn tick(&mut self) -> Result<()> {
        if self.left == 0 {
            return Err(Error::FuelExhausted);
        }
        self.left -= 1;
        Ok(())
    }
}

/// What reduction needs from a context: delta rules and the types of names.
pub trait Signature {
    fn definition(&self, x: &Name) -> Option<Db>;
    fn type_of(&self, x: &Name) -> Option<Db>;
}

pub struct EmptySignature;

impl Signature for EmptySignature {
    fn definition(&self, _: &Name) -> Option<Db> {
        None
    }
    fn type_of(&self, _: &Name) -> Option<Db> {
        None
    }
}

/// A signature extended with opened binder variables (no definitions).
pub(crate) struct Locals<'a> {
    pub base: &'a dyn Signature,
    pub vars: Vec<(Name, Db)>,
}

impl<'a> Locals<'a> {
    pub fn new(base: &'a dyn Signature) -> Locals<'a> {
        Locals { base, vars: Vec::new() }
    }
}

impl Signature for Locals<'_> {
    fn definition(&self, x: &Name) -> Option<Db> {
        if self.vars.iter().any(|(n, _)| n == x) {
            return None;
        }
        self.base.definition(x)
    }
    fn type_of(&self, x: &Name) -> Option<Db> {
        match self.vars.iter().rev().find(|(n, _)| n == x) {
            Some((_, ty)) => Some(ty.clone()),
            None => self.base.type_of(x),
        }
    }
}

pub(crate) fn whnf_db(sig: &dyn Signature, t: &Db, budget: &mut Budget, delta: bool) -> Result<Db> {
    let (head, args) = t.spine();
    let mut head = head.clone();
    let mut args: Vec<Db> = args.into_iter().cloned().collect();
    args.reverse();
    loop {
        match &head {
            Db::Lam(_, _, body) if !args.is_empty() => {
                budget.tick()?;
                let a = args.pop().expect("nonempty");
                head = body.open(&a);
                // the new head may itself be an application
                let (h, more) = head.spine();
                let h = h.clone();
                let more: Vec<Db> = more.into_iter().cloned().collect();
                args.extend(more.into_iter().rev());
                head = h;
            }
            Db::Free(x) if delta => match sig.definition(x) {
                Some(v) => {
                    budget.tick()?;
                    let (h, more) = v.spine();
                    let h = h.clone();
                    let more: Vec<Db> = more.into_iter().cloned().collect();
                    args.extend(more.into_iter().rev());
                    head = h;
                }
                None => break,
            },
            _ => break,
        }
    }
    Ok(Db::apps(head, args.into_iter().rev()))
}

/// Full beta(-delta) normal form, no eta.
pub(crate) fn nf_db(sig: &dyn Signature, t: &Db, budget: &mut Budget, delta: bool) -> Result<Db> {
    let w = whnf_db(sig, t, budget, delta)?;
    Ok(match &w {
        Db::Sort(_) | Db::Free(_) | Db::Bound(_) => w,
        Db::App(..) => {
            let (head, args) = w.spine();
            let mut out = head.clone();
            for a in args {
                out = Db::app(out, nf_db(sig, a, budget, delta)?);
            }
            out
        }
        Db::Lam(h, a, body) | Db::Pi(h, a, body) => {
            let dom = nf_db(sig, a, budget, delta)?;
            let z = Name::internal();
            let b = nf_db(sig, &body.open(&Db::free(&z)), budget, delta)?;
            let b = std::sync::Arc::new(b.close(&z));
            if matches!(w, Db::Lam(..)) {
                Db::Lam(h.clone(), std::sync::Arc::new(dom), b)
            } else {
                Db::Pi(h.clone(), std::sync::Arc::new(dom), b)
            }
        }
    })
}

/// Beta-delta normal, eta-long form of `t : ty`. Falls back to the untyped
/// normal form on any subterm whose type cannot be read off the signature.
pub(crate) fn nf_long_db(sig: &dyn Signature, t: &Db, ty: &Db, budget: &mut Budget) -> Result<Db> {
    let mut locals = Locals::new(sig);
    nf_long(&mut locals, t, ty, budget)
}

fn nf_long(env: &mut Locals<'_>, t: &Db, ty: &Db, budget: &mut Budget) -> Result<Db> {
    let tyw = whnf_db(env, ty, budget, true)?;
    if let Db::Pi(h, dom, cod) = &tyw {
        let tw = whnf_db(env, t, budget, true)?;
        let hint = match &tw {
            Db::Lam(h2, _, _) => h2.clone(),
            _ if h.is_anonymous() => Name::new("x"),
            _ => h.clone(),
        };
        let dom_nf = nf_long(env, dom, &Db::Sort(Sort::Type), budget)?;
        let z = Name::internal();
        env.vars.push((z.clone(), (**dom).clone()));
        let body = nf_long(env, &Db::app(tw, Db::free(&z)), &cod.open(&Db::free(&z)), budget);
        env.vars.pop();
        let body = body?;
        return Ok(Db::Lam(hint, std::sync::Arc::new(dom_nf), std::sync::Arc::new(body.close(&z))));
    }
    let w = whnf_db(env, t, budget, true)?;
    match &w {
        Db::Sort(_) => Ok(w),
        Db::Pi(h, dom, cod) => {
            let dom_nf = nf_long(env, dom, &Db::Sort(Sort::Type), budget)?;
            let z = Name::internal();
            env.vars.push((z.clone(), (**dom).clone()));
            let body = nf_long(env, &cod.open(&Db::free(&z)), &Db::Sort(Sort::Type), budget);
            env.vars.pop();
            let body = body?;
            Ok(Db::Pi(h.clone(), std::sync::Arc::new(dom_nf), std::sync::Arc::new(body.close(&z))))
        }
        Db::Free(_) | Db::App(..) => {
            let (head, args) = w.spine();
            let mut head_ty = match head {
                Db::Free(x) => env.type_of(x),
                _ => None,
            };
            let mut out = head.clone();
            for a in args {
                let arg_ty = match &head_ty {
                    Some(ht) => match whnf_db(env, ht, budget, true)? {
                        Db::Pi(_, dom, cod) => {
                            head_ty = Some(cod.open(a));
                            Some((*dom).clone())
                        }
                        _ => {
                            head_ty = None;
                            None
                        }
                    },
                    None => None,
                };
                let a_nf = match arg_ty {
                    Some(at) => nf_long(env, a, &at, budget)?,
                    None => nf_db(env, a, budget, true)?,
                };
                out = Db::app(out, a_nf);
            }
            Ok(out)
        }
        Db::Lam(..) | Db::Bound(_) => nf_db(env, &w, budget, true),
    }
}

/// Structural equality of normal forms, with the eta rule.
pub(crate) fn eq_eta(a: &Db, b: &Db) -> bool {
    match (a, b) {
        (Db::Lam(_, da, sa), Db::Lam(_, dbb, sb)) | (Db::Pi(_, da, sa), Db::Pi(_, dbb, sb)) => {
            eq_eta(da, dbb) && eq_eta(sa, sb)
        }
        (Db::Lam(_, _, s), u) | (u, Db::Lam(_, _, s)) if !matches!(u, Db::Lam(..)) => {
            let z = Name::internal();
            eq_eta(&s.open(&Db::free(&z)), &Db::app(u.clone(), Db::free(&z)))
        }
        (Db::App(f, x), Db::App(g, y)) => eq_eta(f, g) && eq_eta(x, y),
        _ => a == b,
    }
}

pub(crate) fn convertible_db(sig: &dyn Signature, a: &Db, b: &Db, budget: &mut Budget) -> Result<bool> {
    if a == b {
        return Ok(true);
    }
    let na = nf_db(sig, a, budget, true)?;
    let nb = nf_db(sig, b, budget, true)?;
    Ok(eq_eta(&na, &nb))
}

/// Weak-head beta-delta normal form.
pub fn whnf(sig: &dyn Signature, t: &Term, fuel: Fuel) -> Result<Term> {
    Ok(whnf_db(sig, &Db::from_term(t), &mut Budget::new(fuel), true)?.to_term())
}

/// Beta-delta normal, eta-long form of `t` at type `ty`.
pub fn normalize(sig: &dyn Signature, t: &Term, ty: &Term, fuel: Fuel) -> Result<Term> {
    Ok(nf_long_db(sig, &Db::from_term(t), &Db::from_term(ty), &mut Budget::new(fuel))?.to_term())
}

pub fn convertible(sig: &dyn Signature, t: &Term, u: &Term, fuel: Fuel) -> Result<bool> {
    convertible_db(sig, &Db::from_term(t), &Db::from_term(u), &mut Budget::new(fuel))
}
