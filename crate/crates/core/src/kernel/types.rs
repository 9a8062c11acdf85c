use std::fmt;
use std::sync::Arc;

/// A logical type. There are no type variables and no way to declare new
/// type constructors: every type is built from `set`, `prop` and `→`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LogicType {
    Set,
    Prop,
    Fun(Arc<LogicType>, Arc<LogicType>),
}

impl LogicType {
    pub fn fun(domain: LogicType, codomain: LogicType) -> LogicType {
        LogicType::Fun(Arc::new(domain), Arc::new(codomain))
    }

    /// `τ → prop`, the type of predicates over `τ`.
    pub fn predicate(domain: LogicType) -> LogicType {
        LogicType::fun(domain, LogicType::Prop)
    }

    pub fn as_fun(&self) -> Option<(&LogicType, &LogicType)> {
        match self {
            LogicType::Fun(d, c) => Some((d, c)),
            _ => None,
        }
    }

    pub fn is_prop(&self) -> bool {
        matches!(self, LogicType::Prop)
    }

    pub fn is_set(&self) -> bool {
        matches!(self, LogicType::Set)
    }

    pub fn size(&self) -> usize {
        match self {
            LogicType::Set | LogicType::Prop => 1,
            LogicType::Fun(d, c) => 1 + d.size() + c.size(),
        }
    }

    pub(crate) fn write(&self, f: &mut impl fmt::Write, ascii: bool) -> fmt::Result {
        self.write_prec(f, ascii, false)
    }

    fn write_prec(&self, f: &mut impl fmt::Write, ascii: bool, parens: bool) -> fmt::Result {
        match self {
            LogicType::Set => f.write_str("set"),
            LogicType::Prop => f.write_str("prop"),
            LogicType::Fun(d, c) => {
                if parens {
                    f.write_char('(')?;
                }
                d.write_prec(f, ascii, true)?;
                f.write_str(if ascii { " -> " } else { " → " })?;
                c.write_prec(f, ascii, false)?;
                if parens {
                    f.write_char(')')?;
                }
                Ok(())
            }
        }
    }

    pub fn to_ascii(&self) -> String {
        let mut s = String::new();
        self.write(&mut s, true).expect("writing to a String");
        s
    }
}

impl fmt::Display for LogicType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write(f, false)
    }
}

impl fmt::Debug for LogicType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write(f, false)
    }
}
