//! Term printer. Output parses back to the same term.

use std::collections::HashSet;

use super::RESERVED_TERM_WORDS;
use crate::context::NameEnv;
use crate::kernel::{ConstId, LogicType, Term};

#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub enum Mode {
    #[default]
    Unicode,
    Ascii,
}

impl Mode {
    pub fn from_ascii_flag(ascii: bool) -> Mode {
        if ascii {
            Mode::Ascii
        } else {
            Mode::Unicode
        }
    }
}

const APP: u8 = 9;
const ATOM: u8 = 10;

/// (precedence, left operand level, right operand level)
fn infix(id: ConstId) -> Option<(u8, u8, u8)> {
    Some(match id {
        ConstId::Implies => (2, 3, 2),
        ConstId::Or => (3, 4, 3),
        ConstId::And => (4, 5, 4),
        ConstId::Eq | ConstId::Elem | ConstId::Subset => (6, 7, 7),
        ConstId::Union => (7, 7, 8),
        ConstId::Intersect => (8, 8, 9),
        _ => return None,
    })
}

struct Printer<'e> {
    env: &'e NameEnv,
    taken: HashSet<&'e str>,
    binders: Vec<String>,
    mode: Mode,
    out: String,
}

pub fn print_term(t: &Term, env: &NameEnv, mode: Mode) -> String {
    let mut p = Printer {
        env,
        taken: env.names().iter().map(String::as_str).collect(),
        binders: Vec::new(),
        mode,
        out: String::new(),
    };
    p.term(t, 0, true);
    p.out
}

fn fresh_candidates() -> impl Iterator<Item = String> {
    const BASE: [&str; 6] = ["x", "y", "z", "u", "v", "w"];
    BASE.iter()
        .map(|s| s.to_string())
        .chain((1..).flat_map(|i| BASE.iter().map(move |b| format!("{b}{i}"))))
}

impl Printer<'_> {
    fn ascii(&self) -> bool {
        self.mode == Mode::Ascii
    }

    fn sym(&self, id: ConstId) -> &'static str {
        id.symbol(self.ascii())
    }

    fn fresh(&self) -> String {
        fresh_candidates()
            .find(|c| {
                !self.taken.contains(c.as_str())
                    && !self.binders.contains(c)
                    && !RESERVED_TERM_WORDS.contains(&c.as_str())
            })
            .expect("infinitely many candidates")
    }

    fn ty(&mut self, ty: &LogicType) {
        let ascii = self.ascii();
        ty.write(&mut self.out, ascii).expect("writing to a String");
    }

    fn open(&mut self, parens: bool) {
        if parens {
            self.out.push('(');
        }
    }

    fn close(&mut self, parens: bool) {
        if parens {
            self.out.push(')');
        }
    }

    fn var(&mut self, i: usize) {
        let depth = self.binders.len();
        if i < depth {
            let n = self.binders[depth - 1 - i].clone();
            self.out.push_str(&n);
            return;
        }
        let j = i - depth;
        match self.env.names().get(j) {
            Some(name) => {
                let k = self.env.names()[..j].iter().filter(|n| *n == name).count();
                self.out.push_str(name);
                if k > 0 {
                    self.out.push_str(&format!("#{k}"));
                }
            }
            None => self.out.push_str(&format!("#{i}")),
        }
    }

    fn bare_const(&mut self, id: ConstId, inst: &Option<LogicType>) {
        if let (true, Some(inst)) = (id.is_polymorphic(), inst) {
            self.out.push('(');
            self.out.push_str(self.sym(id));
            self.out.push_str(" : ");
            self.ty(inst);
            self.out.push(')');
        } else if infix(id).is_some() || id == ConstId::Not || id.is_polymorphic() {
            self.out.push('(');
            self.out.push_str(self.sym(id));
            self.out.push(')');
        } else {
            self.out.push_str(self.sym(id));
        }
    }

    /// Writes `sym x : τ. body`.
    fn binder(&mut self, sym: &str, ty: &LogicType, body: &Term) {
        self.out.push_str(sym);
        if !(self.ascii() && sym == "\\") {
            self.out.push(' ');
        }
        let name = self.fresh();
        self.out.push_str(&name);
        if *ty != LogicType::Set {
            self.out.push_str(" : ");
            self.ty(ty);
        }
        self.out.push_str(". ");
        self.binders.push(name);
        self.term(body, 0, true);
        self.binders.pop();
    }

    fn lambda_sym(&self) -> &'static str {
        if self.ascii() {
            "\\"
        } else {
            "λ"
        }
    }

    /// `{a, b, …}` when `t` is a singleton or a right-nested union of them.
    fn enumeration<'t>(t: &'t Term, acc: &mut Vec<&'t Term>) -> bool {
        let (h, args) = t.strip_app();
        match (h, args.as_slice()) {
            (Term::Const(ConstId::Singleton, _), [a]) => {
                acc.push(a);
                true
            }
            (Term::Const(ConstId::Union, _), [l, r]) => {
                let (lh, largs) = l.strip_app();
                match (lh, largs.as_slice()) {
                    (Term::Const(ConstId::Singleton, _), [a]) => {
                        acc.push(a);
                        Self::enumeration(r, acc)
                    }
                    _ => false,
                }
            }
            _ => false,
        }
    }

    fn term(&mut self, t: &Term, level: u8, right_open: bool) {
        match t {
            Term::Var(i) => self.var(*i),
            Term::Const(id, inst) => self.bare_const(*id, inst),
            Term::Lam(ty, body) => {
                let parens = !right_open;
                self.open(parens);
                let s = self.lambda_sym();
                self.binder(s, ty, body);
                self.close(parens);
            }
            Term::App(..) => self.application(t, level, right_open),
        }
    }

    fn application(&mut self, t: &Term, level: u8, right_open: bool) {
        let (head, args) = t.strip_app();
        if let Term::Const(id, _) = head {
            let id = *id;
            match (id, args.as_slice()) {
                (ConstId::Forall | ConstId::Exists | ConstId::Choice, [Term::Lam(ty, body), rest @ ..]) => {
                    if rest.is_empty() {
                        let parens = !right_open;
                        self.open(parens);
                        self.binder(self.sym(id), ty, body);
                        self.close(parens);
                    } else {
                        let parens = level > APP;
                        self.open(parens);
                        self.out.push('(');
                        self.binder(self.sym(id), ty, body);
                        self.out.push(')');
                        for a in rest {
                            self.out.push(' ');
                            self.term(a, ATOM, false);
                        }
                        self.close(parens);
                    }
                    return;
                }
                (ConstId::Not, [x]) => {
                    let parens = level > 5;
                    self.open(parens);
                    self.out.push_str(self.sym(ConstId::Not));
                    if self.ascii() {
                        self.out.push(' ');
                    }
                    self.term(x, 5, right_open || parens);
                    self.close(parens);
                    return;
                }
                (ConstId::Singleton | ConstId::Union, _) => {
                    let mut items = Vec::new();
                    if Self::enumeration(t, &mut items) {
                        self.out.push('{');
                        for (i, it) in items.iter().enumerate() {
                            if i > 0 {
                                self.out.push_str(", ");
                            }
                            self.term(it, 0, true);
                        }
                        self.out.push('}');
                        return;
                    }
                }
                (ConstId::Separation, [dom, Term::Lam(LogicType::Set, pred)]) => {
                    let name = self.fresh();
                    self.out.push('{');
                    self.out.push_str(&name);
                    self.out.push(' ');
                    self.out.push_str(self.sym(ConstId::Elem));
                    self.out.push(' ');
                    self.term(dom, 7, true);
                    self.out.push_str(" | ");
                    self.binders.push(name);
                    self.term(pred, 0, true);
                    self.binders.pop();
                    self.out.push('}');
                    return;
                }
                (ConstId::Replacement, [dom, Term::Lam(LogicType::Set, body)]) => {
                    let name = self.fresh();
                    self.out.push('{');
                    self.binders.push(name.clone());
                    self.term(body, 0, true);
                    self.binders.pop();
                    self.out.push_str(" | ");
                    self.out.push_str(&name);
                    self.out.push(' ');
                    self.out.push_str(self.sym(ConstId::Elem));
                    self.out.push(' ');
                    self.term(dom, 7, true);
                    self.out.push('}');
                    return;
                }
                _ => {}
            }
            if let (Some((prec, lprec, rprec)), [l, r]) = (infix(id), args.as_slice()) {
                let parens = level > prec;
                self.open(parens);
                self.term(l, lprec, false);
                self.out.push(' ');
                self.out.push_str(self.sym(id));
                self.out.push(' ');
                self.term(r, rprec, right_open || parens);
                self.close(parens);
                return;
            }
        }
        let parens = level > APP;
        self.open(parens);
        self.term(head, APP, false);
        for a in args {
            self.out.push(' ');
            self.term(a, ATOM, false);
        }
        self.close(parens);
    }
}
