use super::Interpreter;
use crate::context::{ContextRef, ContextSource};
use crate::kernel::Term;
use crate::store::Store;
use crate::syntax::{print_term, print_type, Mode};
use crate::value::Value;

/// Prints a term in the context its indices refer to.
pub fn show_term(store: &Store, t: &Term, ctx: &ContextRef, mode: Mode) -> String {
    match store.name_env(ctx) {
        Ok(env) => print_term(t, &env, mode),
        Err(_) => format!("{t:?}"),
    }
}

/// Human-readable rendering of a value. Strings are shown raw at the top
/// level and quoted inside containers.
pub fn show_value(store: &Store, v: &Value, mode: Mode) -> String {
    let mut out = String::new();
    write_value(store, v, mode, true, &mut out);
    out
}

fn write_value(store: &Store, v: &Value, mode: Mode, top: bool, out: &mut String) {
    let ascii = mode == Mode::Ascii;
    let seq = |items: &mut dyn Iterator<Item = &Value>, open: &str, close: &str, out: &mut String| {
        out.push_str(open);
        for (i, x) in items.enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            write_value(store, x, mode, false, out);
        }
        out.push_str(close);
    };
    match v {
        Value::Theorem(th) => {
            out.push_str(if ascii { "|- " } else { "⊢ " });
            out.push_str(&show_term(store, th.proposition(), th.context(), mode));
        }
        Value::Term(t, c) => {
            out.push('\'');
            out.push_str(&show_term(store, t, c, mode));
            out.push('\'');
        }
        Value::Context(c) => out.push_str(&format!("@\"{c}\"")),
        Value::Type(t) => out.push_str(&print_type(t, ascii)),
        Value::Int(i) => out.push_str(&i.to_string()),
        Value::Str(s) if top => out.push_str(s),
        Value::Str(s) => out.push_str(&format!("{s:?}")),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::List(xs) => seq(&mut xs.iter(), "[", "]", out),
        Value::Vector(xs) => seq(&mut xs.iter(), "(", ")", out),
        Value::Set(xs) => seq(&mut xs.iter(), "{", "}", out),
        Value::Map(m) if m.is_empty() => out.push_str("{->}"),
        Value::Map(m) => {
            out.push('{');
            for (i, (k, x)) in m.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_value(store, k, mode, false, out);
                out.push_str(" -> ");
                write_value(store, x, mode, false, out);
            }
            out.push('}');
        }
        Value::Function(f) => out.push_str(&f.to_string()),
    }
}

impl Interpreter<'_> {
    pub fn show(&self, v: &Value) -> String {
        show_value(self.store, v, self.mode)
    }
}
