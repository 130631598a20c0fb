//! Seeded generators of types and well-typed programs, for property tests
//! and the acceptance suite. Equal seeds give equal output.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::syntax::{
    ClassicalProcess, Label, MixedBranch, MixedProcess, Name, Polarity, Process, Qualifier, Value, View,
};
use crate::translate::{translate_context, translate_process};
use crate::types::{ClassicalType, MixedType, MixedTypeBranch};
use crate::typing::mixed::check_mixed;
use crate::typing::Context;

const LABELS: [&str; 3] = ["m", "n", "p"];

pub struct Gen {
    rng: ChaCha8Rng,
    next_var: usize,
    next_name: usize,
    translatable: bool,
}

impl Gen {
    pub fn new(seed: u64) -> Self {
        Gen { rng: ChaCha8Rng::seed_from_u64(seed), next_var: 0, next_name: 0, translatable: false }
    }

    fn keys(&mut self, max: usize) -> Vec<(Label, Polarity)> {
        let mut all: Vec<(Label, Polarity)> =
            LABELS.iter().flat_map(|l| [(Label::new(*l), Polarity::Out), (Label::new(*l), Polarity::In)]).collect();
        all.shuffle(&mut self.rng);
        let n = self.rng.gen_range(1..=max);
        all.truncate(n);
        all
    }

    fn base(&mut self) -> MixedType {
        [MixedType::Int, MixedType::Bool, MixedType::Unit][self.rng.gen_range(0..3)].clone()
    }

    fn view(&mut self) -> View {
        if self.rng.gen_bool(0.5) {
            View::Internal
        } else {
            View::External
        }
    }

    /// A closed, contractive, well-formed session type of nesting at most
    /// `depth`, with recursion, unrestricted choices and session payloads.
    pub fn mixed_type(&mut self, depth: usize) -> MixedType {
        self.closed_type(depth, false)
    }

    /// Like [`Gen::mixed_type`], but every unrestricted choice has the form
    /// `rec a.un♯{l⋆U.a}`, the shape the translation accepts.
    pub fn translatable_type(&mut self, depth: usize) -> MixedType {
        self.closed_type(depth, true)
    }

    fn closed_type(&mut self, depth: usize, translatable: bool) -> MixedType {
        self.translatable = translatable;
        loop {
            let t = self.any_type(depth, &mut Vec::new());
            if t.well_formed().is_ok() {
                return t;
            }
        }
    }

    fn any_type(&mut self, depth: usize, scope: &mut Vec<String>) -> MixedType {
        if depth == 0 || self.rng.gen_bool(0.2) {
            if !scope.is_empty() && self.rng.gen_bool(0.4) {
                return MixedType::var(scope.choose(&mut self.rng).expect("non-empty").clone());
            }
            return MixedType::End;
        }
        if self.rng.gen_bool(0.3) {
            self.next_var += 1;
            let a = format!("a{}", self.next_var);
            scope.push(a.clone());
            let body = self.any_choice(depth, scope);
            scope.pop();
            return MixedType::rec(a, body);
        }
        self.any_choice(depth, scope)
    }

    fn any_choice(&mut self, depth: usize, scope: &mut Vec<String>) -> MixedType {
        let q = if self.rng.gen_bool(0.3) { Qualifier::Un } else { Qualifier::Lin };
        if q == Qualifier::Un && self.translatable {
            return self.un_loop(depth, scope);
        }
        let view = self.view();
        let branches = self
            .keys(3)
            .into_iter()
            .map(|(l, p)| {
                let payload = if self.rng.gen_bool(0.6) { self.base() } else { self.any_type(depth - 1, scope) };
                let cont = self.any_type(depth - 1, scope);
                MixedTypeBranch::new(l, p, payload, cont)
            })
            .collect();
        MixedType::choice(q, view, branches)
    }

    fn un_loop(&mut self, depth: usize, scope: &mut Vec<String>) -> MixedType {
        self.next_var += 1;
        let a = format!("a{}", self.next_var);
        let view = self.view();
        let branches = self
            .keys(3)
            .into_iter()
            .map(|(l, p)| {
                let payload = if self.rng.gen_bool(0.6) { self.base() } else { self.any_type(depth - 1, scope) };
                MixedTypeBranch::new(l, p, payload, MixedType::var(a.clone()))
            })
            .collect();
        MixedType::rec(a, MixedType::choice(Qualifier::Un, view, branches))
    }

    /// A supertype of `t`: internal choices may lose branches and external
    /// choices may gain them, along continuations outside recursion (a
    /// change under `rec` would also reach contravariant occurrences of
    /// the variable).
    pub fn supertype(&mut self, t: &MixedType) -> MixedType {
        match t {
            MixedType::Choice { q, view, branches } => {
                let mut out: Vec<MixedTypeBranch> = branches
                    .iter()
                    .map(|b| {
                        MixedTypeBranch::new(b.label.clone(), b.polarity, b.payload.clone(), self.supertype(&b.cont))
                    })
                    .collect();
                match view {
                    View::Internal if out.len() > 1 && self.rng.gen_bool(0.5) => {
                        let i = self.rng.gen_range(0..out.len());
                        out.remove(i);
                    }
                    View::External if self.rng.gen_bool(0.5) => {
                        let l = Label::new(format!("x{}", self.rng.gen_range(0..3)));
                        let p = if self.rng.gen_bool(0.5) { Polarity::Out } else { Polarity::In };
                        if !out.iter().any(|b| b.key() == (l.clone(), p)) {
                            out.push(MixedTypeBranch::new(l, p, MixedType::Int, MixedType::End));
                        }
                    }
                    _ => {}
                }
                MixedType::choice(*q, *view, out)
            }
            other => other.clone(),
        }
    }

    /// A type programs can follow: linear choices with base payloads, or an
    /// unrestricted loop `rec a.un♯{l⋆B.a}`.
    pub fn protocol(&mut self, depth: usize) -> MixedType {
        if self.rng.gen_bool(0.2) {
            self.next_var += 1;
            let a = format!("a{}", self.next_var);
            let view = self.view();
            let branches = self
                .keys(2)
                .into_iter()
                .map(|(l, p)| MixedTypeBranch::new(l, p, self.base(), MixedType::var(a.clone())))
                .collect();
            return MixedType::rec(a, MixedType::choice(Qualifier::Un, view, branches));
        }
        self.linear_protocol(depth.max(1))
    }

    fn linear_protocol(&mut self, depth: usize) -> MixedType {
        if depth == 0 || self.rng.gen_bool(0.25) {
            return MixedType::End;
        }
        let view = self.view();
        let branches = self
            .keys(3)
            .into_iter()
            .map(|(l, p)| {
                let payload = self.base();
                MixedTypeBranch::new(l, p, payload, self.linear_protocol(depth - 1))
            })
            .collect();
        MixedType::choice(Qualifier::Lin, view, branches)
    }

    fn literal(&mut self, t: &MixedType) -> Value {
        match t {
            MixedType::Bool => {
                if self.rng.gen_bool(0.5) {
                    Value::True
                } else {
                    Value::False
                }
            }
            MixedType::Int => Value::Int { value: self.rng.gen_range(-3..20) },
            _ => Value::Unit,
        }
    }

    fn fresh_binder(&mut self) -> Name {
        self.next_name += 1;
        Name::user(format!("z{}", self.next_name))
    }

    fn condition(&mut self) -> Value {
        if self.rng.gen_bool(0.5) {
            Value::True
        } else {
            Value::False
        }
    }

    /// A process using `x` exactly as `t` prescribes.
    pub fn endpoint(&mut self, x: &Name, t: &MixedType) -> MixedProcess {
        let Some((q, view, branches)) = t.as_choice() else {
            return Process::Inact;
        };
        if q == Qualifier::Lin && self.rng.gen_bool(0.1) {
            let c = self.condition();
            let a = self.endpoint(x, t);
            let b = self.endpoint(x, t);
            return Process::cond(c, a, b);
        }
        let chosen: Vec<&MixedTypeBranch> = match view {
            View::External => branches.iter().collect(),
            View::Internal => {
                let mut v: Vec<&MixedTypeBranch> = branches.iter().filter(|_| self.rng.gen_bool(0.6)).collect();
                if v.is_empty() {
                    v.push(branches.choose(&mut self.rng).expect("choices are non-empty"));
                }
                v
            }
        };
        let mut out = Vec::new();
        for b in chosen {
            let copies = if self.rng.gen_bool(0.25) { 2 } else { 1 };
            for _ in 0..copies {
                let cont = |g: &mut Gen| if q == Qualifier::Un { Process::Inact } else { g.endpoint(x, &b.cont) };
                out.push(match b.polarity {
                    Polarity::Out => {
                        let v = self.literal(&b.payload);
                        MixedBranch::output(b.label.clone(), v, cont(self))
                    }
                    Polarity::In => {
                        let z = self.fresh_binder();
                        let body = if b.payload == MixedType::Bool && q == Qualifier::Lin && self.rng.gen_bool(0.3) {
                            Process::cond(Value::var(z.clone()), cont(self), cont(self))
                        } else {
                            cont(self)
                        };
                        MixedBranch::input(b.label.clone(), z, body)
                    }
                });
            }
        }
        out.shuffle(&mut self.rng);
        MixedProcess::choice(q, x.clone(), out)
    }

    /// A closed program of one or two independent sessions whose
    /// protocols nest at most `depth` choices.
    pub fn program(&mut self, depth: usize) -> MixedProcess {
        let sessions = self.rng.gen_range(1..=2);
        let parts: Vec<MixedProcess> = (0..sessions)
            .map(|i| {
                let x = Name::user(format!("x{i}"));
                let y = Name::user(format!("y{i}"));
                let t = self.protocol(depth);
                let d = t.dual_of().expect("protocols have duals");
                let left = self.endpoint(&x, &t);
                let right = self.endpoint(&y, &d);
                Process::new(x, y, t, Process::par(left, right))
            })
            .collect();
        Process::par_all(parts)
    }

    /// A classical context and `n` translated processes each typed under it.
    pub fn ndchoice_instance(&mut self, n: usize) -> (Context<ClassicalType>, Vec<ClassicalProcess>) {
        let channels = self.rng.gen_range(1..=2);
        let entries: Vec<(Name, MixedType)> =
            (0..channels).map(|i| (Name::user(format!("c{i}")), self.protocol(2))).collect();
        let ctx = Context::from_entries(entries.clone());
        let parts = (0..n)
            .map(|_| {
                let p = Process::par_all(entries.iter().map(|(x, t)| self.endpoint(x, t)));
                let d = check_mixed(&ctx, &p).expect("generated endpoints follow their types");
                translate_process(&d).expect("generated protocols translate")
            })
            .collect();
        (translate_context(&ctx).expect("generated protocols translate"), parts)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_program() {
        assert_eq!(Gen::new(7).program(3), Gen::new(7).program(3));
    }

    #[test]
    fn programs_type_check() {
        let mut g = Gen::new(1);
        for _ in 0..50 {
            let p = g.program(4);
            assert!(check_mixed(&Context::new(), &p).is_ok(), "{p}");
        }
    }

    #[test]
    fn supertypes_are_supertypes() {
        let mut g = Gen::new(2);
        for _ in 0..50 {
            let t = g.mixed_type(3);
            let s = g.supertype(&t);
            assert!(t.subtype(&s), "{t} </= {s}");
        }
    }
}
