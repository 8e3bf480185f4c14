//! The engine: a context, an index into it, and a register holding a typed
//! term. Every operation either succeeds or leaves the state unchanged.

use crate::context::{self, Classification, Context, Item, Quantifier};
use crate::error::{Error, Result};
use crate::reduction::Fuel;
use crate::term::{Name, Sort, Term};
use crate::typing;
use crate::unify::{self, Rename};

#[derive(Clone, Debug)]
pub struct Config {
    /// Run first-order unification after every instantiation.
    pub auto_solve: bool,
    /// `Apply` only tries the first goal.
    pub apply_strict: bool,
    pub fuel: Fuel,
    /// Re-check well-formedness after every operation.
    pub check_invariants: bool,
}

impl Default for Config {
    fn default() -> Config {
        Config { auto_solve: true, apply_strict: false, fuel: Fuel::default(), check_invariants: false }
    }
}

#[derive(Clone, Debug)]
pub struct EngineState {
    pub context: Context,
    /// A term and its type, valid in `context.items[..context.index]`.
    pub register: Option<(Term, Term)>,
    pub config: Config,
    /// Renamings caused by the last instantiation.
    pub renames: Vec<Rename>,
    invariant_checks: u64,
}

impl EngineState {
    pub fn new(config: Config) -> EngineState {
        EngineState { context: Context::new(), register: None, config, renames: Vec::new(), invariant_checks: 0 }
    }

    pub fn fuel(&self) -> Fuel {
        self.config.fuel
    }

    pub fn index(&self) -> usize {
        self.context.index
    }

    /// How many times the invariants have been checked.
    pub fn invariant_checks(&self) -> u64 {
        self.invariant_checks
    }

    pub fn check_invariants(&mut self) -> Result<()> {
        self.invariant_checks += 1;
        context::check_well_formed(&self.context, self.fuel())?;
        if let Some((t, ty)) = &self.register {
            typing::check(&self.context, self.context.index, t, ty, self.fuel())?;
        }
        Ok(())
    }

    fn after(&mut self) -> Result<()> {
        if self.config.check_invariants {
            self.check_invariants()?;
        }
        Ok(())
    }

    pub fn move_index(&mut self, i: usize) -> Result<()> {
        if i > self.context.len() {
            return Err(Error::OutOfBounds);
        }
        self.context.index = i;
        self.register = None;
        self.after()
    }

    /// Types `t` left of the index and stores it in the register.
    pub fn load(&mut self, t: &Term) -> Result<()> {
        let ty = typing::infer(&self.context, self.context.index, t, self.fuel())?;
        self.register = Some((t.clone(), ty));
        self.after()
    }

    fn visible(&self, name: &Name) -> bool {
        self.context.scope_at(self.context.index).lookup(name).is_some()
    }

    /// Inserts `q name : r` at the index, where the register holds a type `r`.
    pub fn declare(&mut self, q: Quantifier, name: &Name) -> Result<()> {
        let (t, ty) = self.register.clone().ok_or(Error::RegisterEmpty)?;
        if !matches!(ty, Term::Sort(_)) {
            let w = crate::reduction::whnf(&self.context.scope_at(self.context.index), &ty, self.fuel())?;
            if !matches!(w, Term::Sort(_)) {
                return Err(Error::NotASort(ty));
            }
        }
        if self.visible(name) {
            return Err(Error::NameClash(name.clone()));
        }
        let at = self.context.index;
        self.context.insert(at, Item::Decl { q, name: name.clone(), ty: t });
        self.register = None;
        self.after()
    }

    /// Inserts `name := r : type(r)` at the index.
    pub fn insert_definition(&mut self, name: &Name) -> Result<()> {
        let (t, ty) = self.register.clone().ok_or(Error::RegisterEmpty)?;
        if self.visible(name) {
            return Err(Error::NameClash(name.clone()));
        }
        let at = self.context.index;
        self.context.insert(at, Item::Def { name: name.clone(), body: t, ty });
        self.register = None;
        self.after()
    }

    /// Instantiates the existential declaration just left of the index by
    /// the register.
    pub fn instantiate(&mut self) -> Result<()> {
        let (r, u) = self.register.clone().ok_or(Error::RegisterEmpty)?;
        let i = self.context.index;
        let (y, t) = match i.checked_sub(1).and_then(|k| self.context.items.get(k)) {
            Some(Item::Decl { q: Quantifier::Exists, name, ty }) => (name.clone(), ty.clone()),
            _ => return Err(Error::NotExistentialAtIndex),
        };
        if r.occurs_free(&y) {
            return Err(Error::FailureContext(format!("{y} occurs in {r}")));
        }
        let scope = self.context.scope_at(i - 1);
        let ground = |x: &Term| !scope.mentions_existential(&crate::db::Db::from_term(x));
        if ground(&u) && ground(&t) && !typing::equiv_mod_constraints(&self.context, i - 1, &u, &t, self.fuel())? {
            return Err(Error::Mismatch { inferred: u, expected: t });
        }
        let mut ctx = self.context.clone();
        ctx.items[i - 1] = Item::Constraint(u, t.clone());
        ctx.insert(i, Item::Def { name: y, body: r, ty: t });
        let (ctx, renames) = self.settle(ctx)?;
        self.context = ctx;
        self.renames = renames;
        self.register = None;
        self.after()
    }

    /// Normalizes, optionally solves, and rejects failure contexts.
    pub(crate) fn settle(&self, ctx: Context) -> Result<(Context, Vec<Rename>)> {
        let fuel = self.fuel();
        let ctx = context::normalize_context(&ctx, fuel)?;
        let (ctx, renames) = if self.config.auto_solve {
            let (ctx, renames) = unify::solve_first_order(&ctx, fuel)?;
            (context::normalize_context(&ctx, fuel)?, renames)
        } else {
            (ctx, Vec::new())
        };
        if context::classify(&ctx, fuel) == Classification::Failure {
            return Err(Error::FailureContext(ctx.to_string()));
        }
        Ok((ctx, renames))
    }

    /// Instantiates the existential `x` by `t`, read at the position of `x`.
    pub fn instantiate_named(&mut self, x: &Name, t: &Term) -> Result<()> {
        let xi = self.context.existential_index(x).ok_or_else(|| Error::NotExistential(x.clone()))?;
        let saved = self.context.index;
        let at_end = saved == self.context.len();
        self.move_index(xi + 1)?;
        if let Err(e) = self.load(t).and_then(|_| self.instantiate()) {
            self.context.index = saved;
            self.register = None;
            return Err(e);
        }
        self.context.index = if at_end { self.context.len() } else { saved.min(self.context.len()) };
        Ok(())
    }

    pub fn open_section(&mut self, label: &Name) -> Result<()> {
        let at = self.context.index;
        self.context.insert(at, Item::Begin(label.clone()));
        self.register = None;
        self.after()
    }

    /// Inserts an empty `Begin label; End label` pair at the index.
    pub fn empty_section(&mut self, label: &Name) -> Result<()> {
        let at = self.context.index;
        self.context.insert(at, Item::Begin(label.clone()));
        self.context.insert(at + 1, Item::End(label.clone()));
        self.register = None;
        self.after()
    }

    pub fn close_section(&mut self, label: &Name) -> Result<()> {
        let at = self.context.index;
        match self.context.open_sections_at(at).last() {
            Some(&b) if matches!(&self.context.items[b], Item::Begin(l) if l == label) => {}
            _ => return Err(Error::NoSuchSection(label.clone())),
        }
        self.context.insert(at, Item::End(label.clone()));
        self.register = None;
        self.after()
    }

    pub fn classify(&self) -> Classification {
        context::classify(&self.context, self.fuel())
    }

    /// Runs unification on the whole context.
    pub fn solve(&mut self) -> Result<()> {
        let (ctx, renames) = unify::solve_first_order(&self.context, self.fuel())?;
        self.context = context::normalize_context(&ctx, self.fuel())?;
        self.renames = renames;
        self.after()
    }

    pub fn sort_of(&self, at: usize, ty: &Term) -> Result<Sort> {
        match typing::infer(&self.context, at, ty, self.fuel())? {
            Term::Sort(s) => Ok(s),
            other => {
                match crate::reduction::whnf(&self.context.scope_at(at), &other, self.fuel())? {
                    Term::Sort(s) => Ok(s),
                    _ => Err(Error::NotASort(other)),
                }
            }
        }
    }
}
