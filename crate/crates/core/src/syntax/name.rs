use std::fmt;

use serde::{Deserialize, Serialize};

/// Channel ends and variables.
///
/// User names come from source text and never start with `%`. Generated
/// names live in the `%` namespace and print as `%s1`, `%t1`, ... so they
/// can never capture a user name.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "origin", rename_all = "snake_case")]
pub enum Name {
    User { text: String },
    Generated { kind: NameKind, counter: u32 },
}

/// Kinds of generated names. The first six are the channel ends the
/// translation introduces; the rest are internal to alpha-renaming.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NameKind {
    S,
    T,
    U,
    V,
    A,
    B,
    /// Binders renumbered by canonicalization.
    Canon,
    /// Binders refreshed to avoid capture.
    Refresh,
    /// Restricted ends at one canonicalization level.
    Slot,
    /// Placeholders used while computing canonical sort keys.
    Hole,
}

impl NameKind {
    pub fn letter(self) -> char {
        match self {
            NameKind::S => 's',
            NameKind::T => 't',
            NameKind::U => 'u',
            NameKind::V => 'v',
            NameKind::A => 'a',
            NameKind::B => 'b',
            NameKind::Canon => 'c',
            NameKind::Refresh => 'r',
            NameKind::Slot => 'k',
            NameKind::Hole => 'h',
        }
    }

    pub fn from_letter(c: char) -> Option<NameKind> {
        Some(match c {
            's' => NameKind::S,
            't' => NameKind::T,
            'u' => NameKind::U,
            'v' => NameKind::V,
            'a' => NameKind::A,
            'b' => NameKind::B,
            'c' => NameKind::Canon,
            'r' => NameKind::Refresh,
            'k' => NameKind::Slot,
            'h' => NameKind::Hole,
            _ => return None,
        })
    }
}

impl Name {
    pub fn user(text: impl Into<String>) -> Name {
        let text = text.into();
        debug_assert!(!text.starts_with('%'), "user names cannot start with %");
        Name::User { text }
    }

    pub fn generated(kind: NameKind, counter: u32) -> Name {
        Name::Generated { kind, counter }
    }

    /// The binder used for inputs whose value is ignored, `v?_`.
    pub fn wildcard() -> Name {
        Name::user("_")
    }

    pub fn is_generated(&self) -> bool {
        matches!(self, Name::Generated { .. })
    }

    pub fn is_wildcard(&self) -> bool {
        matches!(self, Name::User { text } if text == "_")
    }

    /// Rendering used by SePi output and trace labels: `%s3` becomes `s_3`
    /// (or `s3` when `underscore` is false).
    pub fn plain(&self, underscore: bool) -> String {
        match self {
            Name::User { text } => text.clone(),
            Name::Generated { kind, counter } => {
                if underscore {
                    format!("{}_{}", kind.letter(), counter)
                } else {
                    format!("{}{}", kind.letter(), counter)
                }
            }
        }
    }
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Name::User { text } => f.write_str(text),
            Name::Generated { kind, counter } => write!(f, "%{}{}", kind.letter(), counter),
        }
    }
}

/// Label polarity marks. `Out` and `In` only appear on translation output,
/// where they render as `l^!` and `l^?`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mark {
    None,
    Out,
    In,
}

/// Serialized as its display text (`m`, `m^!`, `%ell_2`) so that maps
/// keyed by labels stay JSON objects.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "String", from = "String")]
pub struct Label {
    pub base: String,
    pub mark: Mark,
}

impl Label {
    pub fn new(base: impl Into<String>) -> Label {
        Label { base: base.into(), mark: Mark::None }
    }

    pub fn marked(base: impl Into<String>, polarity: Polarity) -> Label {
        let mark = match polarity {
            Polarity::Out => Mark::Out,
            Polarity::In => Mark::In,
        };
        Label { base: base.into(), mark }
    }

    /// The labels of an n-ary race: `%ell` when n = 1, `%ell_1 .. %ell_n`
    /// otherwise.
    pub fn race(index: usize, arity: usize) -> Label {
        if arity == 1 {
            Label::new("%ell")
        } else {
            Label::new(format!("%ell_{index}"))
        }
    }

    pub fn is_reserved(&self) -> bool {
        self.base.starts_with('%')
    }

    /// Mangled form for SePi: `m^!` becomes `m_out`, `%ell_2` becomes `ell_2`.
    pub fn mangled(&self) -> String {
        let base = self.base.trim_start_matches('%');
        match self.mark {
            Mark::None => base.to_string(),
            Mark::Out => format!("{base}_out"),
            Mark::In => format!("{base}_in"),
        }
    }
}

impl From<String> for Label {
    fn from(s: String) -> Label {
        if let Some(base) = s.strip_suffix("^!") {
            Label::marked(base, Polarity::Out)
        } else if let Some(base) = s.strip_suffix("^?") {
            Label::marked(base, Polarity::In)
        } else {
            Label::new(s)
        }
    }
}

impl From<Label> for String {
    fn from(l: Label) -> String {
        l.to_string()
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.base)?;
        match self.mark {
            Mark::None => Ok(()),
            Mark::Out => f.write_str("^!"),
            Mark::In => f.write_str("^?"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Qualifier {
    Lin,
    Un,
}

impl fmt::Display for Qualifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Qualifier::Lin => "lin",
            Qualifier::Un => "un",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Polarity {
    Out,
    In,
}

impl Polarity {
    pub fn dual(self) -> Polarity {
        match self {
            Polarity::Out => Polarity::In,
            Polarity::In => Polarity::Out,
        }
    }
}

impl fmt::Display for Polarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Polarity::Out => "!",
            Polarity::In => "?",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum View {
    /// `⊕`, the selecting side.
    Internal,
    /// `&`, the offering side.
    External,
}

impl View {
    pub fn dual(self) -> View {
        match self {
            View::Internal => View::External,
            View::External => View::Internal,
        }
    }
}

impl fmt::Display for View {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            View::Internal => "+",
            View::External => "&",
        })
    }
}

/// Values. Integer literals are an extension over unit and booleans.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Value {
    Var { name: Name },
    True,
    False,
    Unit,
    Int { value: i64 },
}

impl Value {
    pub fn var(name: Name) -> Value {
        Value::Var { name }
    }

    pub fn as_name(&self) -> Option<&Name> {
        match self {
            Value::Var { name } => Some(name),
            _ => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Var { name } => write!(f, "{name}"),
            Value::True => f.write_str("true"),
            Value::False => f.write_str("false"),
            Value::Unit => f.write_str("()"),
            Value::Int { value } => write!(f, "{value}"),
        }
    }
}
