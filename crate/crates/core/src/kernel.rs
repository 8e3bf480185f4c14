//! A small, independent checker for plain CoC signatures (axioms and
//! definitions, no existentials, no constraints). It shares nothing with
//! the context machinery apart from the surface [`Term`] type, and is used
//! to re-check extracted proofs.

use std::collections::HashMap;
use std::rc::Rc;

use crate::term::{Name, Sort, Term};

#[derive(Clone, Debug, PartialEq, Eq)]
enum K {
    Sort(Sort),
    Rel(usize),
    Const(Name),
    App(Rc<K>, Rc<K>),
    Lam(Rc<K>, Rc<K>),
    Pi(Rc<K>, Rc<K>),
}

fn shift(t: &K, d: isize, cutoff: usize) -> K {
    match t {
        K::Rel(i) if *i >= cutoff => K::Rel((*i as isize + d) as usize),
        K::Sort(_) | K::Rel(_) | K::Const(_) => t.clone(),
        K::App(f, a) => K::App(Rc::new(shift(f, d, cutoff)), Rc::new(shift(a, d, cutoff))),
        K::Lam(a, b) => K::Lam(Rc::new(shift(a, d, cutoff)), Rc::new(shift(b, d, cutoff + 1))),
        K::Pi(a, b) => K::Pi(Rc::new(shift(a, d, cutoff)), Rc::new(shift(b, d, cutoff + 1))),
    }
}

/// `t[j := s]`, with the indices above `j` lowered by one.
fn subst(t: &K, j: usize, s: &K) -> K {
    match t {
        K::Rel(i) if *i == j => shift(s, j as isize, 0),
        K::Rel(i) if *i > j => K::Rel(i - 1),
        K::Sort(_) | K::Rel(_) | K::Const(_) => t.clone(),
        K::App(f, a) => K::App(Rc::new(subst(f, j, s)), Rc::new(subst(a, j, s))),
        K::Lam(a, b) => K::Lam(Rc::new(subst(a, j, s)), Rc::new(subst(b, j + 1, s))),
        K::Pi(a, b) => K::Pi(Rc::new(subst(a, j, s)), Rc::new(subst(b, j + 1, s))),
    }
}

#[derive(Default)]
pub struct Kernel {
    consts: HashMap<Name, (K, Option<K>)>,
    fuel: u64,
}

struct Steps(u64);

impl Steps {
    fn tick(&mut self) -> Result<(), String> {
        if self.0 == 0 {
            return Err("out of fuel".into());
        }
        self.0 -= 1;
        Ok(())
    }
}

impl Kernel {
    pub fn new() -> Kernel {
        Kernel { consts: HashMap::new(), fuel: 1_000_000 }
    }

    pub fn contains(&self, x: &Name) -> bool {
        self.consts.contains_key(x)
    }

    fn lower(&self, t: &Term, env: &mut Vec<Name>) -> Result<K, String> {
        Ok(match t {
            Term::Sort(s) => K::Sort(*s),
            Term::Var(x) => match env.iter().rposition(|n| n == x) {
                Some(i) => K::Rel(env.len() - 1 - i),
                None if self.consts.contains_key(x) => K::Const(x.clone()),
                None => return Err(format!("unknown name {x}")),
            },
            Term::App(f, a) => K::App(Rc::new(self.lower(f, env)?), Rc::new(self.lower(a, env)?)),
            Term::Lambda(x, a, b) | Term::Product(x, a, b) => {
                let a = self.lower(a, env)?;
                env.push(x.clone());
                let b = self.lower(b, env);
                env.pop();
                let b = b?;
                if matches!(t, Term::Lambda(..)) {
                    K::Lam(Rc::new(a), Rc::new(b))
                } else {
                    K::Pi(Rc::new(a), Rc::new(b))
                }
            }
        })
    }

    pub fn add_axiom(&mut self, x: &Name, ty: &Term) -> Result<(), String> {
        if self.consts.contains_key(x) {
            return Err(format!("{x} already defined"));
        }
        let ty = self.lower(ty, &mut Vec::new())?;
        let mut steps = Steps(self.fuel);
        self.sort_of(&mut Vec::new(), &ty, &mut steps)?;
        self.consts.insert(x.clone(), (ty, None));
        Ok(())
    }

    pub fn add_definition(&mut self, x: &Name, body: &Term, ty: &Term) -> Result<(), String> {
        if self.consts.contains_key(x) {
            return Err(format!("{x} already defined"));
        }
        let k_ty = self.lower(ty, &mut Vec::new())?;
        let k_body = self.lower(body, &mut Vec::new())?;
        let mut steps = Steps(self.fuel);
        self.sort_of(&mut Vec::new(), &k_ty, &mut steps)?;
        let inferred = self.infer_k(&mut Vec::new(), &k_body, &mut steps)?;
        if !self.conv(&inferred, &k_ty, &mut steps)? {
            return Err(format!("{x}: body does not have type {ty}"));
        }
        self.consts.insert(x.clone(), (k_ty, Some(k_body)));
        Ok(())
    }

    /// Checks `t : ty` in the current signature.
    pub fn check(&self, t: &Term, ty: &Term) -> Result<(), String> {
        let k_t = self.lower(t, &mut Vec::new())?;
        let k_ty = self.lower(ty, &mut Vec::new())?;
        let mut steps = Steps(self.fuel);
        let inferred = self.infer_k(&mut Vec::new(), &k_t, &mut steps)?;
        if self.conv(&inferred, &k_ty, &mut steps)? {
            Ok(())
        } else {
            Err(format!("{t} does not have type {ty}"))
        }
    }

    pub fn convertible(&self, a: &Term, b: &Term) -> Result<bool, String> {
        let a = self.lower(a, &mut Vec::new())?;
        let b = self.lower(b, &mut Vec::new())?;
        self.conv(&a, &b, &mut Steps(self.fuel))
    }

    fn sort_of(&self, env: &mut Vec<K>, t: &K, steps: &mut Steps) -> Result<Sort, String> {
        let ty = self.infer_k(env, t, steps)?;
        match self.whnf(&ty, steps)? {
            K::Sort(s) => Ok(s),
            _ => Err("expected a sort".into()),
        }
    }

    /// `env` holds the types of the bound variables, innermost last, each
    /// valid in the prefix before it.
    fn infer_k(&self, env: &mut Vec<K>, t: &K, steps: &mut Steps) -> Result<K, String> {
        match t {
            K::Sort(Sort::Prop) => Ok(K::Sort(Sort::Type)),
            K::Sort(Sort::Type) => Err("Type has no type".into()),
            K::Rel(i) => {
                let ty = &env[env.len() - 1 - i];
                Ok(shift(ty, *i as isize + 1, 0))
            }
            K::Const(x) => Ok(self.consts[x].0.clone()),
            K::App(f, a) => {
                let tf = self.infer_k(env, f, steps)?;
                match self.whnf(&tf, steps)? {
                    K::Pi(dom, cod) => {
                        let ta = self.infer_k(env, a, steps)?;
                        if !self.conv(&ta, &dom, steps)? {
                            return Err("argument type mismatch".into());
                        }
                        Ok(subst(&cod, 0, a))
                    }
                    _ => Err("application of a non-function".into()),
                }
            }
            K::Lam(a, b) => {
                self.sort_of(env, a, steps)?;
                env.push((**a).clone());
                let r = self
                    .infer_k(env, b, steps)
                    .and_then(|tb| self.sort_of(env, &tb, steps).map(|_| tb));
                env.pop();
                Ok(K::Pi(a.clone(), Rc::new(r?)))
            }
            K::Pi(a, b) => {
                self.sort_of(env, a, steps)?;
                env.push((**a).clone());
                let r = self.sort_of(env, b, steps);
                env.pop();
                Ok(K::Sort(r?))
            }
        }
    }

    fn whnf(&self, t: &K, steps: &mut Steps) -> Result<K, String> {
        let mut t = t.clone();
        loop {
            let (head, mut args) = unspine(&t);
            match head {
                K::Lam(_, body) if !args.is_empty() => {
                    steps.tick()?;
                    let a = args.remove(0);
                    t = respine(subst(&body, 0, &a), args);
                }
                K::Const(x) => match &self.consts[&x].1 {
                    Some(v) => {
                        steps.tick()?;
                        t = respine(v.clone(), args);
                    }
                    None => return Ok(t),
                },
                _ => return Ok(t),
            }
        }
    }

    fn nf(&self, t: &K, steps: &mut Steps) -> Result<K, String> {
        let w = self.whnf(t, steps)?;
        Ok(match &w {
            K::Lam(a, b) => K::Lam(Rc::new(self.nf(a, steps)?), Rc::new(self.nf(b, steps)?)),
            K::Pi(a, b) => K::Pi(Rc::new(self.nf(a, steps)?), Rc::new(self.nf(b, steps)?)),
            K::App(..) => {
                let (head, args) = unspine(&w);
                let mut out = head;
                for a in args {
                    out = K::App(Rc::new(out), Rc::new(self.nf(&a, steps)?));
                }
                out
            }
            _ => w,
        })
    }

    fn conv(&self, a: &K, b: &K, steps: &mut Steps) -> Result<bool, String> {
        if a == b {
            return Ok(true);
        }
        let a = self.nf(a, steps)?;
        let b = self.nf(b, steps)?;
        Ok(eta_eq(&a, &b))
    }
}

fn eta_eq(a: &K, b: &K) -> bool {
    match (a, b) {
        (K::Lam(x, s), K::Lam(y, r)) | (K::Pi(x, s), K::Pi(y, r)) => eta_eq(x, y) && eta_eq(s, r),
        (K::Lam(_, s), u) | (u, K::Lam(_, s)) if !matches!(u, K::Lam(..)) => {
            let expanded = K::App(Rc::new(shift(u, 1, 0)), Rc::new(K::Rel(0)));
            eta_eq(s, &expanded)
        }
        (K::App(f, x), K::App(g, y)) => eta_eq(f, g) && eta_eq(x, y),
        _ => a == b,
    }
}

fn unspine(t: &K) -> (K, Vec<K>) {
    let mut args = Vec::new();
    let mut t = t;
    while let K::App(f, a) = t {
        args.push((**a).clone());
        t = f;
    }
    args.reverse();
    (t.clone(), args)
}

fn respine(head: K, args: Vec<K>) -> K {
    args.into_iter().fold(head, |f, a| K::App(Rc::new(f), Rc::new(a)))
}
