//! Locally nameless terms: bound variables are de Bruijn indices, free
//! variables are names. All reduction, typing and unification work happens
//! here; [`Term`] is the surface form.

use std::collections::{BTreeSet, HashMap};
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use crate::term::{Name, Sort, Term};

#[derive(Clone, Debug)]
pub enum Db {
    Sort(Sort),
    Free(Name),
    Bound(u32),
    App(Arc<Db>, Arc<Db>),
    /// Binder hint, domain, body.
    Lam(Name, Arc<Db>, Arc<Db>),
    Pi(Name, Arc<Db>, Arc<Db>),
}

impl PartialEq for Db {
    fn eq(&self, other: &Db) -> bool {
        match (self, other) {
            (Db::Sort(a), Db::Sort(b)) => a == b,
            (Db::Free(a), Db::Free(b)) => a == b,
            (Db::Bound(a), Db::Bound(b)) => a == b,
            (Db::App(f, a), Db::App(g, b)) => f == g && a == b,
            (Db::Lam(_, a, s), Db::Lam(_, b, r)) | (Db::Pi(_, a, s), Db::Pi(_, b, r)) => a == b && s == r,
            _ => false,
        }
    }
}

impl Eq for Db {}

impl Hash for Db {
    fn hash<H: Hasher>(&self, state: &mut H) {
        std::mem::discriminant(self).hash(state);
        match self {
            Db::Sort(s) => s.hash(state),
            Db::Free(x) => x.hash(state),
            Db::Bound(i) => i.hash(state),
            Db::App(f, a) => {
                f.hash(state);
                a.hash(state);
            }
            Db::Lam(_, a, b) | Db::Pi(_, a, b) => {
                a.hash(state);
                b.hash(state);
            }
        }
    }
}

impl Db {
    pub fn free(x: &Name) -> Db {
        Db::Free(x.clone())
    }

    pub fn app(f: Db, a: Db) -> Db {
        Db::App(Arc::new(f), Arc::new(a))
    }

    pub fn apps(head: Db, args: impl IntoIterator<Item = Db>) -> Db {
        args.into_iter().fold(head, Db::app)
    }

    /// `[x:ty]body`, abstracting the free name `x` of `body`.
    pub fn lam_over(x: &Name, ty: Db, body: &Db) -> Db {
        Db::Lam(x.clone(), Arc::new(ty), Arc::new(body.close(x)))
    }

    pub fn pi_over(x: &Name, ty: Db, body: &Db) -> Db {
        Db::Pi(x.clone(), Arc::new(ty), Arc::new(body.close(x)))
    }

    /// Abstracts a telescope of named binders, outermost first.
    pub fn lams_over(binders: &[(Name, Db)], body: Db) -> Db {
        binders.iter().rev().fold(body, |acc, (x, ty)| Db::lam_over(x, ty.clone(), &acc))
    }

    pub fn pis_over(binders: &[(Name, Db)], body: Db) -> Db {
        binders.iter().rev().fold(body, |acc, (x, ty)| Db::pi_over(x, ty.clone(), &acc))
    }

    pub fn from_term(t: &Term) -> Db {
        fn go(t: &Term, env: &mut Vec<Name>) -> Db {
            match t {
                Term::Sort(s) => Db::Sort(*s),
                Term::Var(x) => match env.iter().rposition(|n| n == x) {
                    Some(i) => Db::Bound((env.len() - 1 - i) as u32),
                    None => Db::Free(x.clone()),
                },
                Term::App(f, a) => Db::app(go(f, env), go(a, env)),
                Term::Lambda(x, ty, body) | Term::Product(x, ty, body) => {
                    let ty = go(ty, env);
                    env.push(x.clone());
                    let body = go(body, env);
                    env.pop();
                    if matches!(t, Term::Lambda(..)) {
                        Db::Lam(x.clone(), Arc::new(ty), Arc::new(body))
                    } else {
                        Db::Pi(x.clone(), Arc::new(ty), Arc::new(body))
                    }
                }
            }
        }
        go(t, &mut Vec::new())
    }

    /// Reads back a named term. Binder names avoid every free name of the
    /// body and every enclosing binder name, so no shadowing is produced.
    pub fn to_term(&self) -> Term {
        fn pick(hint: &Name, body: &Db, env: &[Name]) -> Name {
            let uses = body.uses_bound(0);
            if hint.is_anonymous() && !uses {
                return hint.clone();
            }
            let mut n = if hint.is_anonymous() || hint.is_internal() {
                Name::new("x")
            } else {
                hint.clone()
            };
            let fv = body.free_names();
            while fv.contains(&n) || env.contains(&n) {
                n = n.primed();
            }
            n
        }
        fn go(t: &Db, env: &mut Vec<Name>) -> Term {
            match t {
                Db::Sort(s) => Term::Sort(*s),
                Db::Free(x) => Term::Var(x.clone()),
                Db::Bound(i) => {
                    let i = *i as usize;
                    match env.len().checked_sub(i + 1) {
                        Some(k) => Term::Var(env[k].clone()),
                        None => Term::Var(Name::new(format!("#loose{i}"))),
                    }
                }
                Db::App(f, a) => Term::app(go(f, env), go(a, env)),
                Db::Lam(h, ty, body) | Db::Pi(h, ty, body) => {
                    let ty = go(ty, env);
                    let n = pick(h, body, env);
                    env.push(n.clone());
                    let b = go(body, env);
                    env.pop();
                    if matches!(t, Db::Lam(..)) {
                        Term::lambda(n, ty, b)
                    } else {
                        Term::product(n, ty, b)
                    }
                }
            }
        }
        go(self, &mut Vec::new())
    }

    pub fn uses_bound(&self, k: u32) -> bool {
        match self {
            Db::Bound(i) => *i == k,
            Db::Sort(_) | Db::Free(_) => false,
            Db::App(f, a) => f.uses_bound(k) || a.uses_bound(k),
            Db::Lam(_, a, b) | Db::Pi(_, a, b) => a.uses_bound(k) || b.uses_bound(k + 1),
        }
    }

    pub fn is_locally_closed(&self) -> bool {
        fn go(t: &Db, depth: u32) -> bool {
            match t {
                Db::Bound(i) => *i < depth,
                Db::Sort(_) | Db::Free(_) => true,
                Db::App(f, a) => go(f, depth) && go(a, depth),
                Db::Lam(_, a, b) | Db::Pi(_, a, b) => go(a, depth) && go(b, depth + 1),
            }
        }
        go(self, 0)
    }

    pub fn free_names(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut out);
        out
    }

    fn collect_free(&self, out: &mut BTreeSet<Name>) {
        match self {
            Db::Free(x) => {
                out.insert(x.clone());
            }
            Db::Sort(_) | Db::Bound(_) => {}
            Db::App(f, a) => {
                f.collect_free(out);
                a.collect_free(out);
            }
            Db::Lam(_, a, b) | Db::Pi(_, a, b) => {
                a.collect_free(out);
                b.collect_free(out);
            }
        }
    }

    pub fn has_free(&self, x: &Name) -> bool {
        match self {
            Db::Free(y) => y == x,
            Db::Sort(_) | Db::Bound(_) => false,
            Db::App(f, a) => f.has_free(x) || a.has_free(x),
            Db::Lam(_, a, b) | Db::Pi(_, a, b) => a.has_free(x) || b.has_free(x),
        }
    }

    /// Replaces the outermost loose index by `u` (which must be locally closed).
    pub fn open(&self, u: &Db) -> Db {
        fn go(t: &Db, u: &Db, depth: u32) -> Db {
            match t {
                Db::Bound(i) if *i == depth => u.clone(),
                Db::Bound(i) if *i > depth => Db::Bound(i - 1),
                Db::Sort(_) | Db::Free(_) | Db::Bound(_) => t.clone(),
                Db::App(f, a) => Db::app(go(f, u, depth), go(a, u, depth)),
                Db::Lam(h, a, b) => Db::Lam(h.clone(), Arc::new(go(a, u, depth)), Arc::new(go(b, u, depth + 1))),
                Db::Pi(h, a, b) => Db::Pi(h.clone(), Arc::new(go(a, u, depth)), Arc::new(go(b, u, depth + 1))),
            }
        }
        go(self, u, 0)
    }

    /// Turns the free name `x` into the outermost loose index.
    pub fn close(&self, x: &Name) -> Db {
        fn go(t: &Db, x: &Name, depth: u32) -> Db {
            match t {
                Db::Free(y) if y == x => Db::Bound(depth),
                Db::Sort(_) | Db::Free(_) | Db::Bound(_) => t.clone(),
                Db::App(f, a) => Db::app(go(f, x, depth), go(a, x, depth)),
                Db::Lam(h, a, b) => Db::Lam(h.clone(), Arc::new(go(a, x, depth)), Arc::new(go(b, x, depth + 1))),
                Db::Pi(h, a, b) => Db::Pi(h.clone(), Arc::new(go(a, x, depth)), Arc::new(go(b, x, depth + 1))),
            }
        }
        if !self.has_free(x) {
            return self.clone();
        }
        go(self, x, 0)
    }

    pub fn subst_free(&self, x: &Name, u: &Db) -> Db {
        let mut map = HashMap::new();
        map.insert(x.clone(), u.clone());
        self.subst_many(&map)
    }

    /// Simultaneous substitution of free names by locally closed terms.
    pub fn subst_many(&self, map: &HashMap<Name, Db>) -> Db {
        if map.is_empty() {
            return self.clone();
        }
        match self {
            Db::Free(y) => map.get(y).cloned().unwrap_or_else(|| self.clone()),
            Db::Sort(_) | Db::Bound(_) => self.clone(),
            Db::App(f, a) => Db::app(f.subst_many(map), a.subst_many(map)),
            Db::Lam(h, a, b) => Db::Lam(h.clone(), Arc::new(a.subst_many(map)), Arc::new(b.subst_many(map))),
            Db::Pi(h, a, b) => Db::Pi(h.clone(), Arc::new(a.subst_many(map)), Arc::new(b.subst_many(map))),
        }
    }

    pub fn spine(&self) -> (&Db, Vec<&Db>) {
        let mut args = Vec::new();
        let mut t = self;
        while let Db::App(f, a) = t {
            args.push(&**a);
            t = f;
        }
        args.reverse();
        (t, args)
    }

    pub fn head_name(&self) -> Option<&Name> {
        match self.spine().0 {
            Db::Free(x) => Some(x),
            _ => None,
        }
    }

    pub fn as_free(&self) -> Option<&Name> {
        match self {
            Db::Free(x) => Some(x),
            _ => None,
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Db::Sort(_) | Db::Free(_) | Db::Bound(_) => 1,
            Db::App(f, a) => 1 + f.size() + a.size(),
            Db::Lam(_, a, b) | Db::Pi(_, a, b) => 1 + a.size() + b.size(),
        }
    }
}
