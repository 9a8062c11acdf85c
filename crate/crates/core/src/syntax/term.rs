//! Term lexer, parser and elaborator.

use super::types::parse_type_cursor;
use super::{is_ident_continue, is_ident_start, Cursor, Pos, SyntaxError, RESERVED_TERM_WORDS};
use crate::context::NameEnv;
use crate::kernel::{typecheck, ConstId, LogicType, Term};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String, Option<usize>),
    Raw(usize),
    /// Constants that stand alone as atoms.
    Atom(ConstId),
    /// Infix operators.
    Op(ConstId),
    Neq,
    Not,
    Lambda,
    Quant(ConstId),
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Dot,
    Colon,
    Bar,
    Eof,
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(n, _) => format!("'{n}'"),
        Tok::Raw(k) => format!("'#{k}'"),
        Tok::Atom(c) | Tok::Op(c) | Tok::Quant(c) => format!("'{}'", c.symbol(false)),
        Tok::Neq => "'≠'".into(),
        Tok::Not => "'¬'".into(),
        Tok::Lambda => "'λ'".into(),
        Tok::LParen => "'('".into(),
        Tok::RParen => "')'".into(),
        Tok::LBrace => "'{'".into(),
        Tok::RBrace => "'}'".into(),
        Tok::Comma => "','".into(),
        Tok::Dot => "'.'".into(),
        Tok::Colon => "':'".into(),
        Tok::Bar => "'|'".into(),
        Tok::Eof => "end of input".into(),
    }
}

fn ascii_word(w: &str) -> Option<Tok> {
    let id = ConstId::ALL.iter().copied().find(|c| c.ascii() == w)?;
    Some(match id {
        ConstId::Forall | ConstId::Exists | ConstId::Choice => Tok::Quant(id),
        ConstId::Not => Tok::Not,
        ConstId::And
        | ConstId::Or
        | ConstId::Elem
        | ConstId::Subset
        | ConstId::Union
        | ConstId::Intersect => Tok::Op(id),
        _ => Tok::Atom(id),
    })
}

fn digits(c: &mut Cursor<'_>) -> Option<usize> {
    let start = c.offset();
    while c.peek().is_some_and(|ch| ch.is_ascii_digit()) {
        c.bump();
    }
    c.slice(start).parse().ok()
}

fn lex(c: &mut Cursor<'_>) -> Result<(Tok, Pos), SyntaxError> {
    while c.peek().is_some_and(char::is_whitespace) {
        c.bump();
    }
    let pos = c.pos();
    let Some(ch) = c.peek() else {
        return Ok((Tok::Eof, pos));
    };
    let sym = |c: &mut Cursor<'_>, t: Tok| {
        c.bump();
        Ok((t, pos))
    };
    match ch {
        '(' => sym(c, Tok::LParen),
        ')' => sym(c, Tok::RParen),
        '{' => sym(c, Tok::LBrace),
        '}' => sym(c, Tok::RBrace),
        ',' => sym(c, Tok::Comma),
        '.' => sym(c, Tok::Dot),
        ':' => sym(c, Tok::Colon),
        '|' | '∣' => sym(c, Tok::Bar),
        'λ' | '\\' => sym(c, Tok::Lambda),
        '∀' => sym(c, Tok::Quant(ConstId::Forall)),
        '∃' => sym(c, Tok::Quant(ConstId::Exists)),
        'ε' => sym(c, Tok::Quant(ConstId::Choice)),
        '¬' => sym(c, Tok::Not),
        '≠' => sym(c, Tok::Neq),
        '=' => sym(c, Tok::Op(ConstId::Eq)),
        '⟶' | '→' => sym(c, Tok::Op(ConstId::Implies)),
        '∧' => sym(c, Tok::Op(ConstId::And)),
        '∨' => sym(c, Tok::Op(ConstId::Or)),
        '∈' => sym(c, Tok::Op(ConstId::Elem)),
        '⊆' => sym(c, Tok::Op(ConstId::Subset)),
        '∪' => sym(c, Tok::Op(ConstId::Union)),
        '∩' => sym(c, Tok::Op(ConstId::Intersect)),
        '∅' => sym(c, Tok::Atom(ConstId::EmptySet)),
        '𝒫' => sym(c, Tok::Atom(ConstId::PowerSet)),
        '⋃' => sym(c, Tok::Atom(ConstId::BigUnion)),
        '⋂' => sym(c, Tok::Atom(ConstId::BigIntersect)),
        '-' => {
            if c.eat("-->") || c.eat("->") {
                Ok((Tok::Op(ConstId::Implies), pos))
            } else {
                Err(SyntaxError::parse(pos, "unexpected '-'"))
            }
        }
        '#' => {
            c.bump();
            match digits(c) {
                Some(k) => Ok((Tok::Raw(k), pos)),
                None => Err(SyntaxError::parse(pos, "expected digits after '#'")),
            }
        }
        '_' => {
            let start = c.offset();
            c.bump();
            while c.peek().is_some_and(|ch| ch.is_ascii_alphabetic()) {
                c.bump();
            }
            let w = c.slice(start);
            ascii_word(w).map(|t| (t, pos)).ok_or_else(|| {
                SyntaxError::parse(pos, format!("unknown ASCII constant '{w}'"))
            })
        }
        ch if is_ident_start(ch) => {
            let start = c.offset();
            while c.peek().is_some_and(is_ident_continue) {
                c.bump();
            }
            let name = c.slice(start).to_string();
            match name.as_str() {
                "true" => return Ok((Tok::Atom(ConstId::True), pos)),
                "false" => return Ok((Tok::Atom(ConstId::False), pos)),
                w if RESERVED_TERM_WORDS.contains(&w) => {
                    return Err(SyntaxError::parse(pos, format!("'{w}' cannot be used as a name")))
                }
                _ => {}
            }
            let mut index = None;
            if c.peek() == Some('#') && c.peek2().is_some_and(|d| d.is_ascii_digit()) {
                c.bump();
                index = digits(c);
            }
            Ok((Tok::Ident(name, index), pos))
        }
        other => Err(SyntaxError::parse(pos, format!("unexpected character '{other}'"))),
    }
}

/// Named parse tree of a term, before resolution against a context.
#[derive(Clone, Debug, PartialEq)]
pub enum Surface {
    Name { name: String, index: Option<usize>, pos: Pos },
    Raw { index: usize, pos: Pos },
    Const { id: ConstId, pos: Pos },
    Lambda { names: Vec<String>, ty: Option<LogicType>, body: Box<Surface>, pos: Pos },
    Quant { id: ConstId, names: Vec<String>, ty: Option<LogicType>, body: Box<Surface>, pos: Pos },
    App(Box<Surface>, Box<Surface>),
    Neq(Box<Surface>, Box<Surface>, Pos),
    Ascribe(Box<Surface>, LogicType, Pos),
    SetEnum(Vec<Surface>, Pos),
    Separation { name: String, domain: Box<Surface>, pred: Box<Surface>, pos: Pos },
    Replacement { body: Box<Surface>, name: String, domain: Box<Surface>, pos: Pos },
}

impl Surface {
    pub fn pos(&self) -> Pos {
        match self {
            Surface::Name { pos, .. }
            | Surface::Raw { pos, .. }
            | Surface::Const { pos, .. }
            | Surface::Lambda { pos, .. }
            | Surface::Quant { pos, .. }
            | Surface::Neq(_, _, pos)
            | Surface::Ascribe(_, _, pos)
            | Surface::SetEnum(_, pos)
            | Surface::Separation { pos, .. }
            | Surface::Replacement { pos, .. } => *pos,
            Surface::App(f, _) => f.pos(),
        }
    }

    fn binary(id: ConstId, pos: Pos, l: Surface, r: Surface) -> Surface {
        Surface::App(
            Box::new(Surface::App(Box::new(Surface::Const { id, pos }), Box::new(l))),
            Box::new(r),
        )
    }
}

struct Parser<'a> {
    cur: Cursor<'a>,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Result<(Tok, Pos), SyntaxError> {
        lex(&mut self.cur.clone())
    }

    fn peek2(&self) -> Result<Tok, SyntaxError> {
        let mut c = self.cur.clone();
        lex(&mut c)?;
        Ok(lex(&mut c)?.0)
    }

    fn next(&mut self) -> Result<(Tok, Pos), SyntaxError> {
        lex(&mut self.cur)
    }

    fn expect(&mut self, t: Tok) -> Result<Pos, SyntaxError> {
        let (got, pos) = self.next()?;
        if got == t {
            Ok(pos)
        } else {
            Err(SyntaxError::parse(pos, format!("expected {}, found {}", describe(&t), describe(&got))))
        }
    }

    fn ty(&mut self) -> Result<LogicType, SyntaxError> {
        parse_type_cursor(&mut self.cur)
    }

    /// term := open [':' type]
    fn term(&mut self) -> Result<Surface, SyntaxError> {
        let t = self.open()?;
        let (tok, pos) = self.peek()?;
        if tok == Tok::Colon {
            self.next()?;
            let ty = self.ty()?;
            return Ok(Surface::Ascribe(Box::new(t), ty, pos));
        }
        Ok(t)
    }

    /// A binder, or an implication chain.
    fn open(&mut self) -> Result<Surface, SyntaxError> {
        match self.peek()?.0 {
            Tok::Lambda | Tok::Quant(_) => self.binder(),
            _ => self.implication(),
        }
    }

    fn operand(&mut self, tighter: fn(&mut Self) -> Result<Surface, SyntaxError>) -> Result<Surface, SyntaxError> {
        match self.peek()?.0 {
            Tok::Lambda | Tok::Quant(_) => self.binder(),
            _ => tighter(self),
        }
    }

    fn binder(&mut self) -> Result<Surface, SyntaxError> {
        let (tok, pos) = self.next()?;
        let mut names = Vec::new();
        loop {
            match self.peek()? {
                (Tok::Ident(n, None), _) => {
                    self.next()?;
                    names.push(n);
                }
                (Tok::Ident(_, Some(_)), p) => {
                    return Err(SyntaxError::parse(p, "a bound name cannot carry an index"))
                }
                _ => break,
            }
        }
        if names.is_empty() {
            let (t, p) = self.peek()?;
            return Err(SyntaxError::parse(p, format!("expected a bound name, found {}", describe(&t))));
        }
        let ty = if self.peek()?.0 == Tok::Colon {
            self.next()?;
            Some(self.ty()?)
        } else {
            None
        };
        self.expect(Tok::Dot)?;
        let body = Box::new(self.open()?);
        Ok(match tok {
            Tok::Lambda => Surface::Lambda { names, ty, body, pos },
            Tok::Quant(id) => Surface::Quant { id, names, ty, body, pos },
            _ => unreachable!("binder called on a binder token"),
        })
    }

    fn implication(&mut self) -> Result<Surface, SyntaxError> {
        let l = self.disjunction()?;
        if let (Tok::Op(ConstId::Implies), pos) = self.peek()? {
            self.next()?;
            let r = self.operand(Self::implication)?;
            return Ok(Surface::binary(ConstId::Implies, pos, l, r));
        }
        Ok(l)
    }

    fn disjunction(&mut self) -> Result<Surface, SyntaxError> {
        let l = self.conjunction()?;
        if let (Tok::Op(ConstId::Or), pos) = self.peek()? {
            self.next()?;
            let r = self.operand(Self::disjunction)?;
            return Ok(Surface::binary(ConstId::Or, pos, l, r));
        }
        Ok(l)
    }

    fn conjunction(&mut self) -> Result<Surface, SyntaxError> {
        let l = self.negation()?;
        if let (Tok::Op(ConstId::And), pos) = self.peek()? {
            self.next()?;
            let r = self.operand(Self::conjunction)?;
            return Ok(Surface::binary(ConstId::And, pos, l, r));
        }
        Ok(l)
    }

    fn negation(&mut self) -> Result<Surface, SyntaxError> {
        if let (Tok::Not, pos) = self.peek()? {
            if self.peek2()? != Tok::RParen {
                self.next()?;
                let x = self.operand(Self::negation)?;
                return Ok(Surface::App(Box::new(Surface::Const { id: ConstId::Not, pos }), Box::new(x)));
            }
        }
        self.relation()
    }

    fn relation(&mut self) -> Result<Surface, SyntaxError> {
        let l = self.union()?;
        let (tok, pos) = self.peek()?;
        let op = match tok {
            Tok::Op(id @ (ConstId::Eq | ConstId::Elem | ConstId::Subset)) => Some(id),
            Tok::Neq => None,
            _ => return Ok(l),
        };
        self.next()?;
        let r = self.operand(Self::union)?;
        let out = match op {
            Some(id) => Surface::binary(id, pos, l, r),
            None => Surface::Neq(Box::new(l), Box::new(r), pos),
        };
        if let (Tok::Op(ConstId::Eq | ConstId::Elem | ConstId::Subset) | Tok::Neq, p) = self.peek()? {
            return Err(SyntaxError::parse(p, "relations do not chain; add parentheses"));
        }
        Ok(out)
    }

    fn union(&mut self) -> Result<Surface, SyntaxError> {
        let mut l = self.intersection()?;
        while let (Tok::Op(ConstId::Union), pos) = self.peek()? {
            self.next()?;
            let r = self.operand(Self::intersection)?;
            l = Surface::binary(ConstId::Union, pos, l, r);
        }
        Ok(l)
    }

    fn intersection(&mut self) -> Result<Surface, SyntaxError> {
        let mut l = self.application()?;
        while let (Tok::Op(ConstId::Intersect), pos) = self.peek()? {
            self.next()?;
            let r = self.operand(Self::application)?;
            l = Surface::binary(ConstId::Intersect, pos, l, r);
        }
        Ok(l)
    }

    fn starts_atom(t: &Tok) -> bool {
        matches!(t, Tok::Ident(..) | Tok::Raw(_) | Tok::Atom(_) | Tok::LParen | Tok::LBrace)
    }

    fn application(&mut self) -> Result<Surface, SyntaxError> {
        let mut f = self.atom()?;
        while Self::starts_atom(&self.peek()?.0) {
            let a = self.atom()?;
            f = Surface::App(Box::new(f), Box::new(a));
        }
        Ok(f)
    }

    fn atom(&mut self) -> Result<Surface, SyntaxError> {
        let (tok, pos) = self.next()?;
        match tok {
            Tok::Ident(name, index) => Ok(Surface::Name { name, index, pos }),
            Tok::Raw(index) => Ok(Surface::Raw { index, pos }),
            Tok::Atom(id) => Ok(Surface::Const { id, pos }),
            Tok::LParen => {
                // bare operators: (∧), (¬), (∀), (= : τ → τ → prop)
                let (t, p) = self.peek()?;
                let bare = match t {
                    Tok::Op(id) | Tok::Quant(id) => Some(id),
                    Tok::Not => Some(ConstId::Not),
                    _ => None,
                };
                if let Some(id) = bare {
                    let after = self.peek2()?;
                    if after == Tok::RParen || after == Tok::Colon {
                        self.next()?;
                        let c = Surface::Const { id, pos: p };
                        let out = if self.peek()?.0 == Tok::Colon {
                            self.next()?;
                            Surface::Ascribe(Box::new(c), self.ty()?, pos)
                        } else {
                            c
                        };
                        self.expect(Tok::RParen)?;
                        return Ok(out);
                    }
                }
                let t = self.term()?;
                self.expect(Tok::RParen)?;
                Ok(t)
            }
            Tok::LBrace => self.braces(pos),
            other => Err(SyntaxError::parse(pos, format!("expected a term, found {}", describe(&other)))),
        }
    }

    fn braces(&mut self, pos: Pos) -> Result<Surface, SyntaxError> {
        if self.peek()?.0 == Tok::RBrace {
            self.next()?;
            return Ok(Surface::SetEnum(Vec::new(), pos));
        }
        let first = self.term()?;
        let (tok, p) = self.next()?;
        match tok {
            Tok::RBrace => Ok(Surface::SetEnum(vec![first], pos)),
            Tok::Comma => {
                let mut items = vec![first, self.term()?];
                loop {
                    let (t, p) = self.next()?;
                    match t {
                        Tok::Comma => items.push(self.term()?),
                        Tok::RBrace => return Ok(Surface::SetEnum(items, pos)),
                        other => {
                            return Err(SyntaxError::parse(p, format!("expected ',' or '}}', found {}", describe(&other))))
                        }
                    }
                }
            }
            Tok::Bar => {
                if let Some((name, domain)) = membership(&first) {
                    let pred = self.term()?;
                    self.expect(Tok::RBrace)?;
                    return Ok(Surface::Separation { name, domain: Box::new(domain), pred: Box::new(pred), pos });
                }
                let bpos = self.peek()?.1;
                let binding = self.term()?;
                self.expect(Tok::RBrace)?;
                match membership(&binding) {
                    Some((name, domain)) => Ok(Surface::Replacement {
                        body: Box::new(first),
                        name,
                        domain: Box::new(domain),
                        pos,
                    }),
                    None => Err(SyntaxError::parse(bpos, "expected 'x ∈ X' after '|'")),
                }
            }
            other => Err(SyntaxError::parse(p, format!("expected ',', '|' or '}}', found {}", describe(&other)))),
        }
    }
}

/// Recognizes `x ∈ X` with a plain name on the left.
fn membership(s: &Surface) -> Option<(String, Surface)> {
    let Surface::App(f, domain) = s else { return None };
    let Surface::App(op, x) = &**f else { return None };
    match (&**op, &**x) {
        (Surface::Const { id: ConstId::Elem, .. }, Surface::Name { name, index: None, .. }) => {
            Some((name.clone(), (**domain).clone()))
        }
        _ => None,
    }
}

/// Parses a term into its named surface form.
pub fn parse_surface(src: &str) -> Result<Surface, SyntaxError> {
    let mut p = Parser { cur: Cursor::new(src) };
    let t = p.term()?;
    let (tok, pos) = p.next()?;
    if tok != Tok::Eof {
        return Err(SyntaxError::parse(pos, format!("unexpected {} after term", describe(&tok))));
    }
    Ok(t)
}

struct Elab<'e> {
    env: &'e NameEnv,
    binders: Vec<(String, LogicType)>,
}

fn type_err(pos: Pos, message: String) -> SyntaxError {
    SyntaxError::Type { pos, message }
}

impl Elab<'_> {
    fn lookup(&self, name: &str, k: usize, pos: Pos) -> Result<(Term, LogicType), SyntaxError> {
        let mut seen = 0;
        for (j, (n, ty)) in self.binders.iter().rev().enumerate() {
            if n == name {
                if seen == k {
                    return Ok((Term::Var(j), ty.clone()));
                }
                seen += 1;
            }
        }
        let depth = self.binders.len();
        for (i, n) in self.env.names().iter().enumerate() {
            if n == name {
                if seen == k {
                    return Ok((Term::Var(depth + i), self.env.types()[i].clone()));
                }
                seen += 1;
            }
        }
        let name = if k == 0 { name.to_string() } else { format!("{name}#{k}") };
        Err(SyntaxError::Name { pos, name })
    }

    fn raw(&self, k: usize, pos: Pos) -> Result<(Term, LogicType), SyntaxError> {
        let depth = self.binders.len();
        let ty = if k < depth {
            self.binders[depth - 1 - k].1.clone()
        } else {
            self.env
                .types()
                .get(k - depth)
                .cloned()
                .ok_or_else(|| SyntaxError::Name { pos, name: format!("#{k}") })?
        };
        Ok((Term::Var(k), ty))
    }

    fn constant(&self, id: ConstId, expected: Option<&LogicType>, pos: Pos) -> Result<(Term, LogicType), SyntaxError> {
        if let Some(ty) = id.fixed_type() {
            return Ok((Term::constant(id), ty));
        }
        let inst = expected.ok_or_else(|| {
            type_err(pos, format!("cannot infer the type of '{}'; add a type ascription", id.symbol(false)))
        })?;
        let tau = id
            .instance_parameter(inst)
            .ok_or_else(|| type_err(pos, format!("'{}' cannot have type {inst}", id.symbol(false))))?;
        Ok((Term::poly(id, tau), inst.clone()))
    }

    fn check(&mut self, s: &Surface, want: &LogicType) -> Result<Term, SyntaxError> {
        let (t, ty) = self.infer(s, Some(want))?;
        if &ty != want {
            return Err(type_err(s.pos(), format!("expected a term of type {want}, found type {ty}")));
        }
        Ok(t)
    }

    fn with_binders<T>(
        &mut self,
        names: &[String],
        ty: &LogicType,
        f: impl FnOnce(&mut Self) -> Result<T, SyntaxError>,
    ) -> Result<T, SyntaxError> {
        for n in names {
            self.binders.push((n.clone(), ty.clone()));
        }
        let out = f(self);
        self.binders.truncate(self.binders.len() - names.len());
        out
    }

    fn infer(&mut self, s: &Surface, expected: Option<&LogicType>) -> Result<(Term, LogicType), SyntaxError> {
        match s {
            Surface::Name { name, index, pos } => self.lookup(name, index.unwrap_or(0), *pos),
            Surface::Raw { index, pos } => self.raw(*index, *pos),
            Surface::Const { id, pos } => self.constant(*id, expected, *pos),
            Surface::Ascribe(inner, ty, pos) => {
                let (t, got) = self.infer(inner, Some(ty))?;
                if &got != ty {
                    return Err(type_err(*pos, format!("term has type {got}, not {ty}")));
                }
                Ok((t, got))
            }
            Surface::Lambda { names, ty, body, .. } => {
                let dom = ty.clone().unwrap_or(LogicType::Set);
                let (b, bty) = self.with_binders(names, &dom, |e| e.infer(body, None))?;
                let mut t = b;
                let mut tty = bty;
                for _ in names {
                    t = Term::lam(dom.clone(), t);
                    tty = LogicType::fun(dom.clone(), tty);
                }
                Ok((t, tty))
            }
            Surface::Quant { id, names, ty, body, .. } => {
                let dom = ty.clone().unwrap_or(LogicType::Set);
                let b = self.with_binders(names, &dom, |e| e.check(body, &LogicType::Prop))?;
                let mut t = b;
                for _ in names {
                    t = Term::app(Term::poly(*id, dom.clone()), Term::lam(dom.clone(), t));
                }
                let ty = if *id == ConstId::Choice { dom } else { LogicType::Prop };
                if *id == ConstId::Choice && names.len() > 1 {
                    return Err(type_err(s.pos(), "ε binds exactly one name".into()));
                }
                Ok((t, ty))
            }
            Surface::Neq(l, r, pos) => {
                let (a, aty) = self.infer(l, None)?;
                let b = self.check(r, &aty)?;
                let _ = pos;
                Ok((Term::not(Term::eq(aty, a, b)), LogicType::Prop))
            }
            Surface::SetEnum(items, pos) => {
                let _ = pos;
                let mut elems = Vec::new();
                for it in items {
                    elems.push(self.check(it, &LogicType::Set)?);
                }
                let single = |t: Term| Term::app(Term::constant(ConstId::Singleton), t);
                let Some(last) = elems.pop() else {
                    return Ok((Term::constant(ConstId::EmptySet), LogicType::Set));
                };
                let mut acc = single(last);
                while let Some(e) = elems.pop() {
                    acc = Term::binary(ConstId::Union, single(e), acc);
                }
                Ok((acc, LogicType::Set))
            }
            Surface::Separation { name, domain, pred, .. } => {
                let d = self.check(domain, &LogicType::Set)?;
                let p = self.with_binders(std::slice::from_ref(name), &LogicType::Set, |e| {
                    e.check(pred, &LogicType::Prop)
                })?;
                Ok((
                    Term::apps(Term::constant(ConstId::Separation), [d, Term::lam(LogicType::Set, p)]),
                    LogicType::Set,
                ))
            }
            Surface::Replacement { body, name, domain, .. } => {
                let d = self.check(domain, &LogicType::Set)?;
                let f = self.with_binders(std::slice::from_ref(name), &LogicType::Set, |e| {
                    e.check(body, &LogicType::Set)
                })?;
                Ok((
                    Term::apps(Term::constant(ConstId::Replacement), [d, Term::lam(LogicType::Set, f)]),
                    LogicType::Set,
                ))
            }
            Surface::App(..) => self.spine(s),
        }
    }

    fn spine(&mut self, s: &Surface) -> Result<(Term, LogicType), SyntaxError> {
        let mut args = Vec::new();
        let mut head = s;
        while let Surface::App(f, a) = head {
            args.push(&**a);
            head = f;
        }
        args.reverse();
        let mut rest = args.as_slice();
        let (mut f, mut fty) = match head {
            Surface::Const { id, pos } if id.is_polymorphic() => {
                // the first argument fixes the instance
                let (a0, a0ty) = self.infer(rest[0], None)?;
                rest = &rest[1..];
                let tau = match id {
                    ConstId::Eq => a0ty.clone(),
                    _ => match a0ty.as_fun() {
                        Some((d, c)) if c.is_prop() => d.clone(),
                        _ => {
                            return Err(type_err(
                                args[0].pos(),
                                format!("'{}' expects a predicate, found type {a0ty}", id.symbol(false)),
                            ))
                        }
                    },
                };
                let inst = id.instance_at(tau.clone()).expect("polymorphic constant");
                let (_, cod) = inst.as_fun().expect("instance is a function type");
                let _ = pos;
                (Term::app(Term::poly(*id, tau), a0), cod.clone())
            }
            other => self.infer(other, None)?,
        };
        for a in rest {
            let Some((dom, cod)) = fty.as_fun().map(|(d, c)| (d.clone(), c.clone())) else {
                return Err(type_err(a.pos(), format!("a term of type {fty} cannot be applied")));
            };
            let t = self.check(a, &dom)?;
            f = Term::app(f, t);
            fty = cod;
        }
        Ok((f, fty))
    }
}

/// Resolves a surface term against a context's constants and typechecks it.
pub fn elaborate(s: &Surface, env: &NameEnv) -> Result<(Term, LogicType), SyntaxError> {
    let mut e = Elab { env, binders: Vec::new() };
    let (t, ty) = e.infer(s, None)?;
    match typecheck(&t, env.types()) {
        Ok(k) if k == ty => Ok((t, ty)),
        Ok(k) => Err(type_err(s.pos(), format!("internal: elaborated type {ty} differs from {k}"))),
        Err(err) => Err(type_err(s.pos(), err.to_string())),
    }
}

/// Parses and elaborates `src` relative to `env`, returning the term and its
/// type.
pub fn parse_term(src: &str, env: &NameEnv) -> Result<(Term, LogicType), SyntaxError> {
    elaborate(&parse_surface(src)?, env)
}

/// Like [`parse_term`] for text embedded at `base` inside a larger source.
pub fn parse_term_at(src: &str, env: &NameEnv, base: Pos) -> Result<(Term, LogicType), SyntaxError> {
    parse_term(src, env).map_err(|e| e.shifted(base))
}
