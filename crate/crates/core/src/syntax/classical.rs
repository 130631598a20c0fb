use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::name::{Label, Name, Qualifier, Value};
use super::process::{Action, Mapper, Process, Visitor};
use crate::types::ClassicalType;

pub type ClassicalProcess = Process<ClassicalAction>;

/// Output, input, selection and branching.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClassicalAction {
    Send { subject: Name, payload: Value, cont: Box<ClassicalProcess> },
    Receive { q: Qualifier, subject: Name, binder: Name, cont: Box<ClassicalProcess> },
    Select { subject: Name, label: Label, cont: Box<ClassicalProcess> },
    Case { subject: Name, arms: BTreeMap<Label, ClassicalProcess> },
}

impl Action for ClassicalAction {
    type Type = ClassicalType;

    fn subject(&self) -> &Name {
        match self {
            ClassicalAction::Send { subject, .. }
            | ClassicalAction::Receive { subject, .. }
            | ClassicalAction::Select { subject, .. }
            | ClassicalAction::Case { subject, .. } => subject,
        }
    }

    fn map_with<M: Mapper<Self>>(&self, m: &mut M) -> Self {
        match self {
            ClassicalAction::Send { subject, payload, cont } => ClassicalAction::Send {
                subject: m.name(subject),
                payload: m.value(payload),
                cont: Box::new(m.process(cont)),
            },
            ClassicalAction::Receive { q, subject, binder, cont } => {
                let subject = m.name(subject);
                let new = m.bind(binder);
                let cont = m.process(cont);
                m.unbind(binder);
                ClassicalAction::Receive { q: *q, subject, binder: new, cont: Box::new(cont) }
            }
            ClassicalAction::Select { subject, label, cont } => ClassicalAction::Select {
                subject: m.name(subject),
                label: label.clone(),
                cont: Box::new(m.process(cont)),
            },
            ClassicalAction::Case { subject, arms } => ClassicalAction::Case {
                subject: m.name(subject),
                arms: arms.iter().map(|(l, p)| (l.clone(), m.process(p))).collect(),
            },
        }
    }

    fn garbage_subject(&self) -> Option<&Name> {
        match self {
            ClassicalAction::Select { subject, cont, .. } if cont.is_inact() => Some(subject),
            _ => None,
        }
    }

    fn visit_with<V: Visitor<Self>>(&self, v: &mut V) {
        match self {
            ClassicalAction::Send { subject, payload, cont } => {
                v.name(subject);
                v.value(payload);
                v.process(cont);
            }
            ClassicalAction::Receive { subject, binder, cont, .. } => {
                v.name(subject);
                v.bind(binder);
                v.process(cont);
                v.unbind(binder);
            }
            ClassicalAction::Select { subject, cont, .. } => {
                v.name(subject);
                v.process(cont);
            }
            ClassicalAction::Case { subject, arms } => {
                v.name(subject);
                for p in arms.values() {
                    v.process(p);
                }
            }
        }
    }
}

impl ClassicalProcess {
    pub fn send(subject: Name, payload: Value, cont: Self) -> Self {
        Process::act(ClassicalAction::Send { subject, payload, cont: Box::new(cont) })
    }

    pub fn receive(q: Qualifier, subject: Name, binder: Name, cont: Self) -> Self {
        Process::act(ClassicalAction::Receive { q, subject, binder, cont: Box::new(cont) })
    }

    pub fn select(subject: Name, label: Label, cont: Self) -> Self {
        Process::act(ClassicalAction::Select { subject, label, cont: Box::new(cont) })
    }

    pub fn case(subject: Name, arms: BTreeMap<Label, Self>) -> Self {
        Process::act(ClassicalAction::Case { subject, arms })
    }
}
