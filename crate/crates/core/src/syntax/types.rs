use super::{Cursor, Pos, SyntaxError};
use crate::kernel::LogicType;

/// Parses `set`, `prop`, parentheses and right-associative `→` / `->`.
pub fn parse_type(src: &str) -> Result<LogicType, SyntaxError> {
    let mut c = Cursor::new(src);
    let ty = parse_type_cursor(&mut c)?;
    skip_ws(&mut c);
    if let Some(ch) = c.peek() {
        return Err(SyntaxError::parse(c.pos(), format!("unexpected '{ch}' after type")));
    }
    Ok(ty)
}

pub fn print_type(ty: &LogicType, ascii: bool) -> String {
    if ascii {
        ty.to_ascii()
    } else {
        ty.to_string()
    }
}

fn skip_ws(c: &mut Cursor<'_>) {
    while c.peek().is_some_and(char::is_whitespace) {
        c.bump();
    }
}

/// Parses a type starting at the cursor, leaving the cursor after it.
pub(crate) fn parse_type_cursor(c: &mut Cursor<'_>) -> Result<LogicType, SyntaxError> {
    let dom = parse_atom(c)?;
    let save = c.clone();
    skip_ws(c);
    if c.eat("→") || (c.rest().starts_with("->") && !c.rest().starts_with("-->") && c.eat("->")) {
        let cod = parse_type_cursor(c)?;
        Ok(LogicType::fun(dom, cod))
    } else {
        *c = save;
        Ok(dom)
    }
}

fn parse_atom(c: &mut Cursor<'_>) -> Result<LogicType, SyntaxError> {
    skip_ws(c);
    let pos: Pos = c.pos();
    if c.eat("(") {
        let ty = parse_type_cursor(c)?;
        skip_ws(c);
        if !c.eat(")") {
            return Err(SyntaxError::parse(c.pos(), "expected ')' in type"));
        }
        return Ok(ty);
    }
    let start = c.offset();
    while c.peek().is_some_and(|ch| ch.is_alphanumeric() || ch == '_') {
        c.bump();
    }
    match c.slice(start) {
        "set" => Ok(LogicType::Set),
        "prop" => Ok(LogicType::Prop),
        "" => Err(SyntaxError::parse(pos, match c.peek() {
            Some(ch) => format!("expected a type, found '{ch}'"),
            None => "expected a type, found end of input".to_string(),
        })),
        w => Err(SyntaxError::parse(pos, format!("unknown type '{w}'"))),
    }
}
