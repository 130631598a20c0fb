use serde::{Deserialize, Serialize};

use super::name::{Label, Name, Polarity, Qualifier, Value};
use super::process::{Action, Mapper, Process, Visitor};
use crate::types::MixedType;

pub type MixedProcess = Process<Choice>;

/// `q x (M1 + ... + Mn)`, the single action of mixed sessions.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Choice {
    pub q: Qualifier,
    pub subject: Name,
    pub branches: Vec<MixedBranch>,
}

/// `l!v.P` or `l?z.P`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MixedBranch {
    pub label: Label,
    pub comm: Comm,
    pub cont: MixedProcess,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "polarity", rename_all = "snake_case")]
pub enum Comm {
    Out { payload: Value },
    In { binder: Name },
}

impl MixedBranch {
    pub fn output(label: Label, payload: Value, cont: MixedProcess) -> Self {
        MixedBranch { label, comm: Comm::Out { payload }, cont }
    }

    pub fn input(label: Label, binder: Name, cont: MixedProcess) -> Self {
        MixedBranch { label, comm: Comm::In { binder }, cont }
    }

    pub fn polarity(&self) -> Polarity {
        match self.comm {
            Comm::Out { .. } => Polarity::Out,
            Comm::In { .. } => Polarity::In,
        }
    }

    pub fn key(&self) -> (Label, Polarity) {
        (self.label.clone(), self.polarity())
    }
}

impl Action for Choice {
    type Type = MixedType;

    fn subject(&self) -> &Name {
        &self.subject
    }

    fn map_with<M: Mapper<Self>>(&self, m: &mut M) -> Self {
        let subject = m.name(&self.subject);
        let branches = self
            .branches
            .iter()
            .map(|b| match &b.comm {
                Comm::Out { payload } => {
                    let payload = m.value(payload);
                    let cont = m.process(&b.cont);
                    MixedBranch::output(b.label.clone(), payload, cont)
                }
                Comm::In { binder } => {
                    let new = m.bind(binder);
                    let cont = m.process(&b.cont);
                    m.unbind(binder);
                    MixedBranch::input(b.label.clone(), new, cont)
                }
            })
            .collect();
        Choice { q: self.q, subject, branches }
    }

    fn visit_with<V: Visitor<Self>>(&self, v: &mut V) {
        v.name(&self.subject);
        for b in &self.branches {
            match &b.comm {
                Comm::Out { payload } => {
                    v.value(payload);
                    v.process(&b.cont);
                }
                Comm::In { binder } => {
                    v.bind(binder);
                    v.process(&b.cont);
                    v.unbind(binder);
                }
            }
        }
    }
}

impl MixedProcess {
    pub fn choice(q: Qualifier, subject: Name, branches: Vec<MixedBranch>) -> Self {
        Process::act(Choice { q, subject, branches })
    }
}
