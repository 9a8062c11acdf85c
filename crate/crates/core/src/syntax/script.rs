//! ProofScript lexer, abstract syntax and parser.

use std::sync::Arc;

use num_bigint::BigInt;

use super::{is_ident_continue, is_ident_start, Cursor, Pos, SyntaxError};

pub const KEYWORDS: [&str; 31] = [
    "fix", "assume", "define", "obtain", "have", "by", "let", "unbind", "val", "def", "if", "then",
    "else", "for", "in", "do", "while", "match", "case", "with", "begin", "end", "root", "this",
    "true", "false", "and", "or", "not", "mod", "fn",
];

/// `@n`, `@u:n`, `@u:n:v` and `@"key"`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AtRef {
    Name(String),
    Owned { user: String, name: String },
    Versioned { user: String, name: String, version: u64 },
    Key(String),
}

impl std::fmt::Display for AtRef {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AtRef::Name(n) => write!(f, "@{n}"),
            AtRef::Owned { user, name } => write!(f, "@{user}:{name}"),
            AtRef::Versioned { user, name, version } => write!(f, "@{user}:{name}:{version}"),
            AtRef::Key(k) => write!(f, "@\"{k}\""),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Literal {
    Int(BigInt),
    Str(String),
    Bool(bool),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Pattern {
    Wildcard,
    Ident(String),
    Literal(Literal),
    Tuple(Vec<Pattern>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Mod => "mod",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::And => "and",
            BinOp::Or => "or",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UnOp {
    Neg,
    Not,
}

pub type Block = Vec<Stmt>;

#[derive(Clone, Debug, PartialEq)]
pub struct Expr {
    pub kind: ExprKind,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ExprKind {
    Lit(Literal),
    /// Term literal: source text and the position where the text starts.
    Term(String, Pos),
    Root,
    This,
    Ident(String),
    At(AtRef),
    List(Vec<Expr>),
    Vector(Vec<Expr>),
    Set(Vec<Expr>),
    Map(Vec<(Expr, Expr)>),
    Field(Box<Expr>, String),
    App(Box<Expr>, Box<Expr>),
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    /// `fn p… => e`, kept as a one-function group so it can be persisted.
    Lambda(Arc<DefGroup>),
    If { cond: Box<Expr>, then: Block, otherwise: Option<Block> },
    For { pat: Pattern, iter: Box<Expr>, body: Block },
    While { cond: Box<Expr>, body: Block },
    Match { scrutinee: Box<Expr>, cases: Vec<(Pattern, Block)> },
    With { context: Box<Expr>, body: Block },
    Block(Block),
}

impl ExprKind {
    /// Constructs that thread the state when used as statements.
    pub fn is_control(&self) -> bool {
        matches!(
            self,
            ExprKind::If { .. }
                | ExprKind::For { .. }
                | ExprKind::While { .. }
                | ExprKind::Match { .. }
                | ExprKind::With { .. }
                | ExprKind::Block(_)
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FunDef {
    pub name: String,
    pub params: Vec<Pattern>,
    pub body: Expr,
    pub pos: Pos,
}

/// A maximal run of adjacent `def` statements; they see each other.
#[derive(Clone, Debug, PartialEq)]
pub struct DefGroup {
    pub defs: Vec<FunDef>,
    /// The group's source text, kept so functions can be persisted.
    pub source: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Stmt {
    pub kind: StmtKind,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq)]
pub enum StmtKind {
    Fix { label: Option<String>, payload: Expr },
    Assume { label: Option<String>, prop: Expr },
    Define { name: String, definition: Expr },
    Obtain { names: Vec<String>, by: Expr },
    Have { label: Option<String>, guard: Expr, by: Expr },
    Let { name: String, value: Expr },
    Unbind { name: String },
    Val { pat: Pattern, value: Expr },
    Def(Arc<DefGroup>),
    Expr(Expr),
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Kw(&'static str),
    Int(BigInt),
    Str(String),
    Term(String, Pos),
    At(AtRef),
    Sym(&'static str),
    Eof,
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(n) => format!("identifier '{n}'"),
        Tok::Kw(k) => format!("'{k}'"),
        Tok::Int(i) => format!("number {i}"),
        Tok::Str(_) => "string literal".into(),
        Tok::Term(..) => "term literal".into(),
        Tok::At(r) => format!("'{r}'"),
        Tok::Sym(s) => format!("'{s}'"),
        Tok::Eof => "end of input".into(),
    }
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    pos: Pos,
    end_line: u32,
    start: usize,
    end: usize,
}

const SYMBOLS: [&str; 24] = [
    "=>", "==", "!=", "<=", ">=", "->", "(", ")", "[", "]", "{", "}", ",", ".", "=", "+", "-", "*",
    "/", "%", "<", ">", ";", ":",
];

fn lex_all(src: &str) -> Result<Vec<Token>, SyntaxError> {
    let mut c = Cursor::new(src);
    let mut out = Vec::new();
    loop {
        // whitespace and comments
        loop {
            match c.peek() {
                Some(ch) if ch.is_whitespace() => {
                    c.bump();
                }
                Some('#') => {
                    while c.peek().is_some_and(|ch| ch != '\n') {
                        c.bump();
                    }
                }
                _ => break,
            }
        }
        let pos = c.pos();
        let start = c.offset();
        let Some(ch) = c.peek() else {
            out.push(Token { tok: Tok::Eof, pos, end_line: pos.line, start, end: start });
            return Ok(out);
        };
        let tok = if is_ident_start(ch) || ch == '_' {
            while c.peek().is_some_and(is_ident_continue) {
                c.bump();
            }
            let w = c.slice(start);
            match KEYWORDS.iter().find(|k| **k == w) {
                Some(k) => Tok::Kw(k),
                None => Tok::Ident(w.to_string()),
            }
        } else if ch.is_ascii_digit() {
            while c.peek().is_some_and(|d| d.is_ascii_digit()) {
                c.bump();
            }
            Tok::Int(c.slice(start).parse().expect("digits"))
        } else if ch == '"' {
            Tok::Str(string_literal(&mut c)?)
        } else if ch == '\'' {
            c.bump();
            let body_pos = c.pos();
            let body_start = c.offset();
            loop {
                match c.peek() {
                    Some('\'') => break,
                    Some(_) => {
                        c.bump();
                    }
                    None => return Err(SyntaxError::parse(pos, "unterminated term literal")),
                }
            }
            let body = c.slice(body_start).to_string();
            c.bump();
            Tok::Term(body, body_pos)
        } else if ch == '@' {
            c.bump();
            Tok::At(at_ref(&mut c, pos)?)
        } else if let Some(s) = SYMBOLS.iter().find(|s| c.rest().starts_with(**s)) {
            c.eat(s);
            Tok::Sym(s)
        } else {
            return Err(SyntaxError::parse(pos, format!("unexpected character '{ch}'")));
        };
        out.push(Token { tok, pos, end_line: c.pos().line, start, end: c.offset() });
    }
}

/// Whether `src` stops in the middle of a statement: a block left open, a
/// literal left unterminated, or a trailing token that needs an operand.
/// Used to decide when interactive input is complete.
pub fn needs_more_input(src: &str) -> bool {
    let toks = match lex_all(src) {
        Ok(t) => t,
        Err(SyntaxError::Parse { message, .. }) => return message.starts_with("unterminated"),
        Err(_) => return false,
    };
    let mut depth: i64 = 0;
    for t in &toks {
        match t.tok {
            Tok::Kw("begin" | "if" | "do" | "match") => depth += 1,
            Tok::Kw("end") => depth -= 1,
            _ => {}
        }
    }
    let last = toks.iter().rev().find(|t| t.tok != Tok::Eof).map(|t| &t.tok);
    let dangling = matches!(
        last,
        Some(Tok::Kw("by" | "then" | "else" | "do" | "in" | "and" | "or" | "not" | "with" | "fn" | "case"))
            | Some(Tok::Sym("=" | "=>" | "," | "(" | "[" | "{" | "+" | "-" | "*" | "/" | "%"))
    );
    depth > 0 || dangling
}

fn string_literal(c: &mut Cursor<'_>) -> Result<String, SyntaxError> {
    let pos = c.pos();
    c.bump();
    let mut s = String::new();
    loop {
        match c.bump() {
            None => return Err(SyntaxError::parse(pos, "unterminated string literal")),
            Some('"') => return Ok(s),
            Some('\\') => {
                let epos = c.pos();
                match c.bump() {
                    Some('n') => s.push('\n'),
                    Some('t') => s.push('\t'),
                    Some('"') => s.push('"'),
                    Some('\\') => s.push('\\'),
                    _ => return Err(SyntaxError::parse(epos, "unknown escape sequence")),
                }
            }
            Some(ch) => s.push(ch),
        }
    }
}

fn is_ref_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '-'
}

fn at_ref(c: &mut Cursor<'_>, pos: Pos) -> Result<AtRef, SyntaxError> {
    if c.peek() == Some('"') {
        return Ok(AtRef::Key(string_literal(c)?));
    }
    let mut parts = Vec::new();
    loop {
        let start = c.offset();
        while c.peek().is_some_and(is_ref_char) {
            c.bump();
        }
        let seg = c.slice(start);
        if seg.is_empty() {
            return Err(SyntaxError::parse(c.pos(), "expected a name in '@' reference"));
        }
        parts.push(seg.to_string());
        if c.peek() == Some(':') && c.peek2().is_some_and(is_ref_char) {
            c.bump();
        } else {
            break;
        }
    }
    match parts.as_slice() {
        [n] => Ok(AtRef::Name(n.clone())),
        [u, n] => Ok(AtRef::Owned { user: u.clone(), name: n.clone() }),
        [u, n, v] => match v.parse() {
            Ok(version) => Ok(AtRef::Versioned { user: u.clone(), name: n.clone(), version }),
            Err(_) => Err(SyntaxError::parse(pos, format!("'{v}' is not a version number"))),
        },
        _ => Err(SyntaxError::parse(pos, "too many ':' in '@' reference")),
    }
}

struct Parser<'a> {
    src: &'a str,
    toks: Vec<Token>,
    i: usize,
    /// Nesting depth of brackets; inside brackets arguments may continue on
    /// the next line.
    depth: usize,
}

type PResult<T> = Result<T, SyntaxError>;

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.i].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.i + k).min(self.toks.len() - 1)].tok
    }

    fn pos(&self) -> Pos {
        self.toks[self.i].pos
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.i].clone();
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
        t
    }

    fn prev_end_line(&self) -> u32 {
        if self.i == 0 {
            0
        } else {
            self.toks[self.i - 1].end_line
        }
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn is_kw(&self, k: &str) -> bool {
        matches!(self.peek(), Tok::Kw(x) if *x == k)
    }

    fn err<T>(&self, msg: impl Into<String>) -> PResult<T> {
        Err(SyntaxError::parse(self.pos(), msg))
    }

    fn unexpected<T>(&self, wanted: &str) -> PResult<T> {
        self.err(format!("expected {wanted}, found {}", describe(self.peek())))
    }

    fn expect_sym(&mut self, s: &str) -> PResult<()> {
        if self.is_sym(s) {
            self.bump();
            Ok(())
        } else {
            self.unexpected(&format!("'{s}'"))
        }
    }

    fn expect_kw(&mut self, k: &str) -> PResult<()> {
        if self.is_kw(k) {
            self.bump();
            Ok(())
        } else {
            self.unexpected(&format!("'{k}'"))
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(n) => {
                self.bump();
                Ok(n)
            }
            _ => self.unexpected("an identifier"),
        }
    }

    fn block_until(&mut self, stops: &[&str]) -> PResult<Block> {
        let saved = std::mem::replace(&mut self.depth, 0);
        let mut out = Vec::new();
        loop {
            while self.is_sym(";") {
                self.bump();
            }
            match self.peek() {
                Tok::Kw(k) if stops.contains(k) => break,
                Tok::Eof if stops.is_empty() => break,
                Tok::Eof => {
                    let want: Vec<String> = stops.iter().map(|s| format!("'{s}'")).collect();
                    return self.err(format!("expected {} before end of input", want.join(" or ")));
                }
                _ => {}
            }
            if self.is_kw("def") {
                out.push(self.def_group()?);
            } else {
                out.push(self.statement()?);
            }
        }
        self.depth = saved;
        Ok(out)
    }

    /// `n = …` label prefix.
    fn label(&mut self) -> Option<String> {
        if let (Tok::Ident(n), Tok::Sym("=")) = (self.peek().clone(), self.peek_at(1)) {
            self.bump();
            self.bump();
            Some(n)
        } else {
            None
        }
    }

    fn statement(&mut self) -> PResult<Stmt> {
        let pos = self.pos();
        let kind = match self.peek().clone() {
            Tok::Kw("fix") => {
                self.bump();
                let label = self.label();
                StmtKind::Fix { label, payload: self.expr()? }
            }
            Tok::Kw("assume") => {
                self.bump();
                let label = self.label();
                StmtKind::Assume { label, prop: self.expr()? }
            }
            Tok::Kw("define") => {
                self.bump();
                let name = self.ident()?;
                self.expect_sym("=")?;
                StmtKind::Define { name, definition: self.expr()? }
            }
            Tok::Kw("obtain") => {
                self.bump();
                let mut names = vec![self.ident()?];
                while self.is_sym(",") {
                    self.bump();
                    names.push(self.ident()?);
                }
                self.expect_kw("by")?;
                StmtKind::Obtain { names, by: self.expr()? }
            }
            Tok::Kw("have") => {
                self.bump();
                let label = self.label();
                let guard = self.expr()?;
                self.expect_kw("by")?;
                StmtKind::Have { label, guard, by: self.expr()? }
            }
            Tok::Kw("let") => {
                self.bump();
                let name = self.ident()?;
                self.expect_sym("=")?;
                StmtKind::Let { name, value: self.expr()? }
            }
            Tok::Kw("unbind") => {
                self.bump();
                StmtKind::Unbind { name: self.ident()? }
            }
            Tok::Kw("val") => {
                self.bump();
                let pat = self.pattern()?;
                self.expect_sym("=")?;
                StmtKind::Val { pat, value: self.expr()? }
            }
            _ => StmtKind::Expr(self.expr()?),
        };
        Ok(Stmt { kind, pos })
    }

    fn def_group(&mut self) -> PResult<Stmt> {
        let pos = self.pos();
        let start = self.toks[self.i].start;
        let mut defs = Vec::new();
        while self.is_kw("def") {
            let dpos = self.pos();
            self.bump();
            let name = self.ident()?;
            let mut params = Vec::new();
            while !self.is_sym("=") {
                params.push(self.atomic_pattern()?);
            }
            if params.is_empty() {
                return self.err(format!("function '{name}' needs at least one parameter"));
            }
            self.bump();
            let body = self.expr()?;
            defs.push(FunDef { name, params, body, pos: dpos });
        }
        let end = self.toks[self.i - 1].end;
        let source = self.src[start..end].to_string();
        Ok(Stmt { kind: StmtKind::Def(Arc::new(DefGroup { defs, source })), pos })
    }

    fn pattern(&mut self) -> PResult<Pattern> {
        self.atomic_pattern()
    }

    fn atomic_pattern(&mut self) -> PResult<Pattern> {
        let t = self.peek().clone();
        let p = match t {
            Tok::Ident(n) if n == "_" => Pattern::Wildcard,
            Tok::Ident(n) => Pattern::Ident(n),
            Tok::Int(i) => Pattern::Literal(Literal::Int(i)),
            Tok::Str(s) => Pattern::Literal(Literal::Str(s)),
            Tok::Kw("true") => Pattern::Literal(Literal::Bool(true)),
            Tok::Kw("false") => Pattern::Literal(Literal::Bool(false)),
            Tok::Sym("-") => {
                self.bump();
                return match self.peek().clone() {
                    Tok::Int(i) => {
                        self.bump();
                        Ok(Pattern::Literal(Literal::Int(-i)))
                    }
                    _ => self.unexpected("a number"),
                };
            }
            Tok::Sym("(") => {
                self.bump();
                let mut items = Vec::new();
                if !self.is_sym(")") {
                    items.push(self.pattern()?);
                    while self.is_sym(",") {
                        self.bump();
                        items.push(self.pattern()?);
                    }
                }
                self.expect_sym(")")?;
                return Ok(if items.len() == 1 { items.pop().expect("one item") } else { Pattern::Tuple(items) });
            }
            _ => return self.unexpected("a pattern"),
        };
        self.bump();
        Ok(p)
    }

    fn expr(&mut self) -> PResult<Expr> {
        self.or_expr()
    }

    fn binary(&mut self, op: BinOp, l: Expr, r: Expr, pos: Pos) -> Expr {
        Expr { kind: ExprKind::Binary(op, Box::new(l), Box::new(r)), pos }
    }

    fn or_expr(&mut self) -> PResult<Expr> {
        let mut l = self.and_expr()?;
        while self.is_kw("or") {
            let pos = self.pos();
            self.bump();
            let r = self.and_expr()?;
            l = self.binary(BinOp::Or, l, r, pos);
        }
        Ok(l)
    }

    fn and_expr(&mut self) -> PResult<Expr> {
        let mut l = self.not_expr()?;
        while self.is_kw("and") {
            let pos = self.pos();
            self.bump();
            let r = self.not_expr()?;
            l = self.binary(BinOp::And, l, r, pos);
        }
        Ok(l)
    }

    fn not_expr(&mut self) -> PResult<Expr> {
        if self.is_kw("not") {
            let pos = self.pos();
            self.bump();
            let e = self.not_expr()?;
            return Ok(Expr { kind: ExprKind::Unary(UnOp::Not, Box::new(e)), pos });
        }
        self.comparison()
    }

    fn comparison(&mut self) -> PResult<Expr> {
        let l = self.additive()?;
        let op = match self.peek() {
            Tok::Sym("==") => BinOp::Eq,
            Tok::Sym("!=") => BinOp::Ne,
            Tok::Sym("<") => BinOp::Lt,
            Tok::Sym("<=") => BinOp::Le,
            Tok::Sym(">") => BinOp::Gt,
            Tok::Sym(">=") => BinOp::Ge,
            _ => return Ok(l),
        };
        let pos = self.pos();
        self.bump();
        let r = self.additive()?;
        Ok(self.binary(op, l, r, pos))
    }

    fn additive(&mut self) -> PResult<Expr> {
        let mut l = self.multiplicative()?;
        loop {
            let op = match self.peek() {
                Tok::Sym("+") => BinOp::Add,
                Tok::Sym("-") => BinOp::Sub,
                _ => return Ok(l),
            };
            let pos = self.pos();
            self.bump();
            let r = self.multiplicative()?;
            l = self.binary(op, l, r, pos);
        }
    }

    fn multiplicative(&mut self) -> PResult<Expr> {
        let mut l = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Sym("*") => BinOp::Mul,
                Tok::Sym("/") => BinOp::Div,
                Tok::Sym("%") | Tok::Kw("mod") => BinOp::Mod,
                _ => return Ok(l),
            };
            let pos = self.pos();
            self.bump();
            let r = self.unary()?;
            l = self.binary(op, l, r, pos);
        }
    }

    fn unary(&mut self) -> PResult<Expr> {
        if self.is_sym("-") {
            let pos = self.pos();
            self.bump();
            let e = self.unary()?;
            return Ok(Expr { kind: ExprKind::Unary(UnOp::Neg, Box::new(e)), pos });
        }
        self.application()
    }

    fn starts_argument(&self) -> bool {
        let same_line = self.depth > 0 || self.toks[self.i].pos.line == self.prev_end_line();
        same_line
            && matches!(
                self.peek(),
                Tok::Ident(_)
                    | Tok::Int(_)
                    | Tok::Str(_)
                    | Tok::Term(..)
                    | Tok::At(_)
                    | Tok::Sym("(")
                    | Tok::Sym("[")
                    | Tok::Sym("{")
                    | Tok::Kw("root")
                    | Tok::Kw("this")
                    | Tok::Kw("true")
                    | Tok::Kw("false")
                    | Tok::Kw("begin")
            )
    }

    fn application(&mut self) -> PResult<Expr> {
        let mut f = self.postfix()?;
        while self.starts_argument() {
            let a = self.postfix()?;
            let pos = f.pos;
            f = Expr { kind: ExprKind::App(Box::new(f), Box::new(a)), pos };
        }
        Ok(f)
    }

    fn postfix(&mut self) -> PResult<Expr> {
        let mut e = self.primary()?;
        while self.is_sym(".") {
            self.bump();
            let name = self.ident()?;
            let pos = e.pos;
            e = Expr { kind: ExprKind::Field(Box::new(e), name), pos };
        }
        Ok(e)
    }

    fn bracketed<T>(&mut self, close: &str, mut item: impl FnMut(&mut Self) -> PResult<T>) -> PResult<Vec<T>> {
        self.depth += 1;
        let mut items = Vec::new();
        if !self.is_sym(close) {
            items.push(item(self)?);
            while self.is_sym(",") {
                self.bump();
                items.push(item(self)?);
            }
        }
        self.depth -= 1;
        self.expect_sym(close)?;
        Ok(items)
    }

    fn primary(&mut self) -> PResult<Expr> {
        let pos = self.pos();
        let t = self.peek().clone();
        let kind = match t {
            Tok::Int(i) => {
                self.bump();
                ExprKind::Lit(Literal::Int(i))
            }
            Tok::Str(s) => {
                self.bump();
                ExprKind::Lit(Literal::Str(s))
            }
            Tok::Term(s, p) => {
                self.bump();
                ExprKind::Term(s, p)
            }
            Tok::At(r) => {
                self.bump();
                ExprKind::At(r)
            }
            Tok::Ident(n) => {
                self.bump();
                ExprKind::Ident(n)
            }
            Tok::Kw("true") => {
                self.bump();
                ExprKind::Lit(Literal::Bool(true))
            }
            Tok::Kw("false") => {
                self.bump();
                ExprKind::Lit(Literal::Bool(false))
            }
            Tok::Kw("root") => {
                self.bump();
                ExprKind::Root
            }
            Tok::Kw("this") => {
                self.bump();
                ExprKind::This
            }
            Tok::Sym("(") => {
                self.bump();
                let mut items = self.bracketed(")", |p| p.expr())?;
                if items.len() == 1 {
                    let mut e = items.pop().expect("one item");
                    e.pos = pos;
                    return Ok(e);
                }
                ExprKind::Vector(items)
            }
            Tok::Sym("[") => {
                self.bump();
                ExprKind::List(self.bracketed("]", |p| p.expr())?)
            }
            Tok::Sym("{") => {
                self.bump();
                if self.is_sym("->") && matches!(self.peek_at(1), Tok::Sym("}")) {
                    self.bump();
                    self.bump();
                    ExprKind::Map(Vec::new())
                } else if self.is_sym("}") {
                    self.bump();
                    ExprKind::Set(Vec::new())
                } else {
                    self.depth += 1;
                    let first = self.expr()?;
                    self.depth -= 1;
                    if self.is_sym("->") {
                        self.bump();
                        self.depth += 1;
                        let v = self.expr()?;
                        let mut entries = vec![(first, v)];
                        while self.is_sym(",") {
                            self.bump();
                            let k = self.expr()?;
                            self.expect_sym("->")?;
                            entries.push((k, self.expr()?));
                        }
                        self.depth -= 1;
                        self.expect_sym("}")?;
                        ExprKind::Map(entries)
                    } else {
                        let mut items = vec![first];
                        self.depth += 1;
                        while self.is_sym(",") {
                            self.bump();
                            items.push(self.expr()?);
                        }
                        self.depth -= 1;
                        self.expect_sym("}")?;
                        ExprKind::Set(items)
                    }
                }
            }
            Tok::Kw("fn") => {
                let start = self.toks[self.i].start;
                self.bump();
                let mut params = Vec::new();
                while !self.is_sym("=>") {
                    params.push(self.atomic_pattern()?);
                }
                if params.is_empty() {
                    return self.err("a function needs at least one parameter");
                }
                self.bump();
                let body = self.expr()?;
                let source = self.src[start..self.toks[self.i - 1].end].to_string();
                let def = FunDef { name: String::new(), params, body, pos };
                ExprKind::Lambda(Arc::new(DefGroup { defs: vec![def], source }))
            }
            Tok::Kw("begin") => {
                self.bump();
                let b = self.block_until(&["end"])?;
                self.bump();
                ExprKind::Block(b)
            }
            Tok::Kw("if") => {
                self.bump();
                let cond = Box::new(self.expr()?);
                self.expect_kw("then")?;
                let then = self.block_until(&["else", "end"])?;
                let otherwise = if self.is_kw("else") {
                    self.bump();
                    Some(self.block_until(&["end"])?)
                } else {
                    None
                };
                self.expect_kw("end")?;
                ExprKind::If { cond, then, otherwise }
            }
            Tok::Kw("for") => {
                self.bump();
                let pat = self.pattern()?;
                self.expect_kw("in")?;
                let iter = Box::new(self.expr()?);
                self.expect_kw("do")?;
                let body = self.block_until(&["end"])?;
                self.bump();
                ExprKind::For { pat, iter, body }
            }
            Tok::Kw("while") => {
                self.bump();
                let cond = Box::new(self.expr()?);
                self.expect_kw("do")?;
                let body = self.block_until(&["end"])?;
                self.bump();
                ExprKind::While { cond, body }
            }
            Tok::Kw("with") => {
                self.bump();
                let context = Box::new(self.expr()?);
                self.expect_kw("do")?;
                let body = self.block_until(&["end"])?;
                self.bump();
                ExprKind::With { context, body }
            }
            Tok::Kw("match") => {
                self.bump();
                let scrutinee = Box::new(self.expr()?);
                let mut cases = Vec::new();
                while self.is_kw("case") {
                    self.bump();
                    let pat = self.pattern()?;
                    self.expect_sym("=>")?;
                    let body = self.block_until(&["case", "end"])?;
                    cases.push((pat, body));
                }
                if cases.is_empty() {
                    return self.unexpected("'case'");
                }
                self.expect_kw("end")?;
                ExprKind::Match { scrutinee, cases }
            }
            _ => return self.unexpected("an expression"),
        };
        Ok(Expr { kind, pos })
    }
}

/// Parses a whole script.
pub fn parse_script(src: &str) -> Result<Block, SyntaxError> {
    let toks = lex_all(src)?;
    let mut p = Parser { src, toks, i: 0, depth: 0 };
    let b = p.block_until(&[])?;
    if *p.peek() != Tok::Eof {
        return p.unexpected("a statement");
    }
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    const IMPL: &str = "have impl = \"∀ x : prop. x → x\" by\n  begin\n    fix \"x : prop\"\n    assume h = \"x\"\n    have \"x\" by h\n  end\n";

    #[test]
    fn incomplete_input() {
        for src in ["have impl = \"∀ x : prop. x → x\" by", "have impl = \"p\" by\n  begin\n fix \"x : prop\"",
            "if x then", "val f = fn x =>", "val s = \"open", "with @lib do", "val l = [1,"] {
            assert!(needs_more_input(src), "{src}");
        }
        for src in [IMPL, "fix \"x : prop\"", "val x = 1 # begin", "val s = \"begin\"", "if a then 1 else 2 end", "end"] {
            assert!(!needs_more_input(src), "{src}");
        }
    }

    #[test]
    fn have_example_shape() {
        let b = parse_script(IMPL).unwrap();
        assert_eq!(b.len(), 1);
        let StmtKind::Have { label, guard, by } = &b[0].kind else { panic!("{:?}", b[0]) };
        assert_eq!(label.as_deref(), Some("impl"));
        assert_eq!(guard.kind, ExprKind::Lit(Literal::Str("∀ x : prop. x → x".into())));
        let ExprKind::Block(inner) = &by.kind else { panic!() };
        assert_eq!(inner.len(), 3);
        assert!(matches!(inner[0].kind, StmtKind::Fix { label: None, .. }));
        assert!(matches!(&inner[1].kind, StmtKind::Assume { label: Some(l), .. } if l == "h"));
        assert!(matches!(&inner[2].kind, StmtKind::Have { label: None, .. }));
        assert_eq!(inner[2].pos, Pos::new(5, 5));
    }

    #[test]
    fn defs_form_one_group() {
        let src = "def even n = if n == 0 then true else odd (n - 1) end\ndef odd n = if n == 0 then false else even (n - 1) end\nval sevenIsOdd = odd 7\n";
        let b = parse_script(src).unwrap();
        assert_eq!(b.len(), 2);
        let StmtKind::Def(g) = &b[0].kind else { panic!() };
        assert_eq!(g.defs.len(), 2);
        assert!(g.source.starts_with("def even") && g.source.ends_with("(n - 1) end"));
        let again = parse_script(&g.source).unwrap();
        let StmtKind::Def(g2) = &again[0].kind else { panic!() };
        assert_eq!(g2.defs.len(), 2);
    }

    #[test]
    fn empty_block() {
        let b = parse_script("begin end").unwrap();
        assert_eq!(b[0].kind, StmtKind::Expr(Expr { kind: ExprKind::Block(vec![]), pos: Pos::new(1, 1) }));
    }

    #[test]
    fn application_stops_at_line_breaks() {
        let b = parse_script("val a = f x\ng y").unwrap();
        assert_eq!(b.len(), 2);
        let b = parse_script("val a = f (x,\n y)").unwrap();
        assert_eq!(b.len(), 1);
    }

    #[test]
    fn references_and_literals() {
        let b = parse_script("val a = @alice:lib:3\nval b = @\"ab:1\"\nval c = @lib.fact\nval d = 'x ∈ N'").unwrap();
        let StmtKind::Val { value, .. } = &b[0].kind else { panic!() };
        assert_eq!(
            value.kind,
            ExprKind::At(AtRef::Versioned { user: "alice".into(), name: "lib".into(), version: 3 })
        );
        let StmtKind::Val { value, .. } = &b[2].kind else { panic!() };
        assert!(matches!(&value.kind, ExprKind::Field(_, f) if f == "fact"));
        let StmtKind::Val { value, .. } = &b[3].kind else { panic!() };
        assert_eq!(value.kind, ExprKind::Term("x ∈ N".into(), Pos::new(4, 10)));
    }

    #[test]
    fn collections() {
        let b = parse_script("val m = {1 -> \"a\", 2 -> \"b\"}\nval e = {->}\nval s = {}\nval l = [1, 2]\nval t = (1, 2)").unwrap();
        let kinds: Vec<_> = b
            .iter()
            .map(|s| match &s.kind {
                StmtKind::Val { value, .. } => match &value.kind {
                    ExprKind::Map(m) => format!("map{}", m.len()),
                    ExprKind::Set(s) => format!("set{}", s.len()),
                    ExprKind::List(s) => format!("list{}", s.len()),
                    ExprKind::Vector(s) => format!("vec{}", s.len()),
                    _ => "other".into(),
                },
                _ => "stmt".into(),
            })
            .collect();
        assert_eq!(kinds, ["map2", "map0", "set0", "list2", "vec2"]);
    }

    #[test]
    fn errors_have_positions() {
        let e = parse_script("if true then 1").unwrap_err();
        assert!(e.to_string().contains("'end'"), "{e}");
        let e = parse_script("val = 3").unwrap_err();
        assert_eq!(e.pos(), Pos::new(1, 5));
        assert!(parse_script("\"abc").is_err());
        assert!(parse_script("def f = 1").is_err());
        assert!(parse_script("match 1 end").is_err());
    }

    #[test]
    fn comments_and_semicolons() {
        let b = parse_script("# a comment\nval x = 1; val y = 2 # trailing\n").unwrap();
        assert_eq!(b.len(), 2);
    }
}
