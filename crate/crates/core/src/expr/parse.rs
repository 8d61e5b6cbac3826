//! Recursive-descent parser.
//!
//! ```text
//! model    = builtin_model | expr ;
//! expr     = "let" ident "(" ident ")" "=" sum "in" expr | sum ;
//! sum      = term { ("+" | "-") term } ;
//! term     = unary { ("*" | "/") unary } ;
//! unary    = "-" unary | power ;
//! power    = primary [ "^" [ "-" ] integer ] ;
//! primary  = number | "i" | var | "conj" "(" var ")" | "abs" "(" var ")"
//!          | ident "(" sum ")" | "@phi_inv" "(" sum ")" "(" sum ")" | "(" sum ")" ;
//! builtin_model = "@example7" "(" sum "," sum ")"
//!          | "@example7product" "(" sum "," sum { "," sum "," sum } ")"
//!          | "@example9_1" "(" sum ")" | "@example9_2" "(" sum_in_w ")" ;
//! number   = digits [ "." digits ] [ ("e" | "E") [ "+" | "-" ] digits ] ;
//! ```
//!
//! `var` is `z` at the top level and the declared parameter inside a `let`
//! body. Subtrees without the variable are folded to constants as they are
//! built, which is also where a zero denominator is caught.

use super::{ExprNode, FunctionModel, GFunction, ParseError};
use crate::characterize::examples;
use crate::C64;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Builtin(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
    Eq,
    End,
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let ch = chars[i];
        let start = i;
        if ch.is_whitespace() {
            i += 1;
            continue;
        }
        let tok = match ch {
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '/' => Tok::Slash,
            '^' => Tok::Caret,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ',' => Tok::Comma,
            '=' => Tok::Eq,
            '@' => {
                i += 1;
                let name = take_ident(&chars, &mut i);
                if name.is_empty() {
                    return Err(syntax(start, "expected a name after `@`"));
                }
                out.push((Tok::Builtin(name), start));
                continue;
            }
            c if c.is_ascii_digit() || c == '.' => {
                let value = take_number(&chars, &mut i).ok_or_else(|| syntax(start, "malformed number"))?;
                out.push((Tok::Num(value), start));
                continue;
            }
            c if c.is_alphabetic() || c == '_' => {
                let name = take_ident(&chars, &mut i);
                out.push((Tok::Ident(name), start));
                continue;
            }
            other => return Err(syntax(start, &format!("unexpected character `{other}`"))),
        };
        out.push((tok, start));
        i += 1;
    }
    out.push((Tok::End, chars.len()));
    Ok(out)
}

fn take_ident(chars: &[char], i: &mut usize) -> String {
    let mut s = String::new();
    while *i < chars.len() && (chars[*i].is_alphanumeric() || chars[*i] == '_') {
        s.push(chars[*i]);
        *i += 1;
    }
    s
}

fn take_number(chars: &[char], i: &mut usize) -> Option<f64> {
    let mut s = String::new();
    let digits = |s: &mut String, i: &mut usize| {
        let mut n = 0;
        while *i < chars.len() && chars[*i].is_ascii_digit() {
            s.push(chars[*i]);
            *i += 1;
            n += 1;
        }
        n
    };
    let mut n = digits(&mut s, i);
    if *i < chars.len() && chars[*i] == '.' {
        s.push('.');
        *i += 1;
        n += digits(&mut s, i);
    }
    if n == 0 {
        return None;
    }
    if *i < chars.len() && (chars[*i] == 'e' || chars[*i] == 'E') {
        let mut j = *i + 1;
        let mut exp = String::from("e");
        if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
            exp.push(chars[j]);
            j += 1;
        }
        if j < chars.len() && chars[j].is_ascii_digit() {
            *i = j;
            s.push_str(&exp);
            digits(&mut s, i);
        }
    }
    s.parse().ok()
}

fn syntax(pos: usize, msg: &str) -> ParseError {
    ParseError::Syntax { pos, msg: msg.to_string() }
}

const RESERVED: &[&str] = &["let", "in", "i", "conj", "abs", "z"];

struct Parser {
    toks: Vec<(Tok, usize)>,
    at: usize,
    registry: Vec<(String, GFunction)>,
}

impl Parser {
    fn new(text: &str) -> Result<Self, ParseError> {
        Ok(Self { toks: lex(text)?, at: 0, registry: Vec::new() })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let tok = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        tok
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), ParseError> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(syntax(self.pos(), &format!("expected {what}")))
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.bump() {
            Tok::Ident(name) => Ok(name),
            _ => Err(syntax(self.toks[self.at.saturating_sub(1)].1, "expected a name")),
        }
    }

    fn expr(&mut self, var: &str) -> Result<ExprNode, ParseError> {
        if *self.peek() == Tok::Ident("let".into()) {
            self.bump();
            let name_pos = self.pos();
            let name = self.ident()?;
            if RESERVED.contains(&name.as_str()) || name == var {
                return Err(syntax(name_pos, &format!("`{name}` cannot be bound")));
            }
            self.expect(Tok::LParen, "`(`")?;
            let param = self.ident()?;
            self.expect(Tok::RParen, "`)`")?;
            self.expect(Tok::Eq, "`=`")?;
            let body = self.sum(&param)?;
            if *self.peek() != Tok::Ident("in".into()) {
                return Err(syntax(self.pos(), "expected `in`"));
            }
            self.bump();
            if self.registry.iter().any(|(n, _)| *n == name) {
                return Err(syntax(name_pos, &format!("`{name}` is already defined")));
            }
            self.registry.push((name, GFunction::Expr { param, body }));
            return self.expr(var);
        }
        self.sum(var)
    }

    fn sum(&mut self, var: &str) -> Result<ExprNode, ParseError> {
        let mut lhs = self.term(var)?;
        loop {
            let node: fn(Box<ExprNode>, Box<ExprNode>) -> ExprNode = match self.peek() {
                Tok::Plus => ExprNode::Add,
                Tok::Minus => ExprNode::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term(var)?;
            lhs = fold(node(Box::new(lhs), Box::new(rhs)));
        }
    }

    fn term(&mut self, var: &str) -> Result<ExprNode, ParseError> {
        let mut lhs = self.unary(var)?;
        loop {
            let is_div = match self.peek() {
                Tok::Star => false,
                Tok::Slash => true,
                _ => return Ok(lhs),
            };
            self.bump();
            let pos = self.pos();
            let rhs = self.unary(var)?;
            if is_div {
                if matches!(rhs, ExprNode::Const(c) if c == C64::new(0.0, 0.0)) {
                    return Err(ParseError::ZeroDenominator { pos });
                }
                lhs = fold(ExprNode::Div(Box::new(lhs), Box::new(rhs)));
            } else {
                lhs = fold(ExprNode::Mul(Box::new(lhs), Box::new(rhs)));
            }
        }
    }

    fn unary(&mut self, var: &str) -> Result<ExprNode, ParseError> {
        if *self.peek() == Tok::Minus {
            self.bump();
            let inner = self.unary(var)?;
            return Ok(match inner {
                ExprNode::Const(c) => ExprNode::Const(-c),
                other => ExprNode::Mul(Box::new(ExprNode::Const(C64::new(-1.0, 0.0))), Box::new(other)),
            });
        }
        self.power(var)
    }

    fn power(&mut self, var: &str) -> Result<ExprNode, ParseError> {
        let base = self.primary(var)?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let negative = if *self.peek() == Tok::Minus {
            self.bump();
            true
        } else {
            false
        };
        let pos = self.pos();
        let n = match self.bump() {
            Tok::Num(x) if x.fract() == 0.0 && x <= i32::MAX as f64 => x as i32,
            _ => return Err(syntax(pos, "exponent must be an integer")),
        };
        let n = if negative { -n } else { n };
        if n < 0 && matches!(base, ExprNode::Const(c) if c == C64::new(0.0, 0.0)) {
            return Err(ParseError::ZeroDenominator { pos });
        }
        Ok(fold(ExprNode::IntPow(Box::new(base), n)))
    }

    fn primary(&mut self, var: &str) -> Result<ExprNode, ParseError> {
        let pos = self.pos();
        match self.bump() {
            Tok::Num(x) => Ok(ExprNode::Const(C64::new(x, 0.0))),
            Tok::LParen => {
                let inner = self.sum(var)?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Tok::Ident(name) if name == "i" => Ok(ExprNode::Const(C64::new(0.0, 1.0))),
            Tok::Ident(name) if name == var => Ok(ExprNode::Var),
            Tok::Ident(name) if name == "conj" || name == "abs" => {
                self.expect(Tok::LParen, "`(`")?;
                let arg_pos = self.pos();
                match self.bump() {
                    Tok::Ident(v) if v == var => {}
                    _ => return Err(syntax(arg_pos, &format!("`{name}` applies to `{var}` only"))),
                }
                self.expect(Tok::RParen, "`)`")?;
                Ok(if name == "conj" { ExprNode::ConjVar } else { ExprNode::Abs })
            }
            Tok::Ident(name) => {
                if *self.peek() != Tok::LParen {
                    return Err(syntax(pos, &format!("unknown variable `{name}`")));
                }
                if !self.registry.iter().any(|(n, _)| *n == name) {
                    return Err(ParseError::UnknownFunction { name, pos });
                }
                self.bump();
                let arg = self.sum(var)?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(ExprNode::Call(name, Box::new(arg)))
            }
            Tok::Builtin(name) if name == "phi_inv" => {
                let args = self.const_args(&name)?;
                let a = single_real_in_unit(&name, &args)?;
                let key = GFunction::phi_inverse_name(a);
                if !self.registry.iter().any(|(n, _)| *n == key) {
                    self.registry.push((key.clone(), GFunction::PhiInverse { a }));
                }
                self.expect(Tok::LParen, "`(` applying @phi_inv")?;
                let arg = self.sum(var)?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(ExprNode::Call(key, Box::new(arg)))
            }
            Tok::Builtin(name) => Err(syntax(
                pos,
                &format!("@{name} is not a function usable inside an expression"),
            )),
            _ => Err(syntax(pos, "expected an operand")),
        }
    }

    fn const_args(&mut self, name: &str) -> Result<Vec<C64>, ParseError> {
        self.expect(Tok::LParen, "`(`")?;
        let mut out = Vec::new();
        loop {
            let pos = self.pos();
            match self.sum("z")? {
                ExprNode::Const(c) => out.push(c),
                _ => {
                    return Err(ParseError::Builtin {
                        name: name.to_string(),
                        msg: format!("argument at position {pos} is not a constant"),
                    })
                }
            }
            match self.bump() {
                Tok::Comma => continue,
                Tok::RParen => return Ok(out),
                _ => return Err(syntax(self.toks[self.at.saturating_sub(1)].1, "expected `,` or `)`")),
            }
        }
    }

    fn finish(&mut self) -> Result<(), ParseError> {
        if *self.peek() == Tok::End {
            Ok(())
        } else {
            Err(syntax(self.pos(), "unexpected trailing input"))
        }
    }
}

fn single_real_in_unit(name: &str, args: &[C64]) -> Result<f64, ParseError> {
    match args {
        [a] if a.im == 0.0 && a.re > 0.0 && a.re < 1.0 => Ok(a.re),
        _ => Err(ParseError::Builtin {
            name: name.to_string(),
            msg: "expects one real argument in (0, 1)".into(),
        }),
    }
}

/// Folds a node whose children are all constants.
fn fold(node: ExprNode) -> ExprNode {
    use ExprNode::*;
    let k = |n: &ExprNode| if let Const(c) = n { Some(*c) } else { None };
    let folded = match &node {
        Add(a, b) => k(a).zip(k(b)).map(|(x, y)| x + y),
        Sub(a, b) => k(a).zip(k(b)).map(|(x, y)| x - y),
        Mul(a, b) => k(a).zip(k(b)).map(|(x, y)| x * y),
        Div(a, b) => k(a).zip(k(b)).map(|(x, y)| x / y),
        IntPow(a, n) => k(a).map(|x| {
            if *n >= 0 {
                x.powu(*n as u32)
            } else {
                C64::new(1.0, 0.0) / x.powu(n.unsigned_abs())
            }
        }),
        _ => None,
    };
    folded.map(Const).unwrap_or(node)
}

/// Parses one function definition (see the module grammar).
pub fn parse(text: &str) -> Result<FunctionModel, ParseError> {
    let mut p = Parser::new(text)?;
    if let Tok::Builtin(name) = p.peek().clone() {
        if name.starts_with("example") {
            p.bump();
            return builtin_model(&mut p, &name);
        }
    }
    let root = p.expr("z")?;
    p.finish()?;
    let registry = std::mem::take(&mut p.registry);
    FunctionModel::new(root, registry).map_err(|e| syntax(0, &e.to_string()))
}

/// Parses a one-variable function body in the variable `param`, e.g. the `g`
/// of a ray-constant model.
pub fn parse_g(param: &str, text: &str) -> Result<GFunction, ParseError> {
    let mut p = Parser::new(text)?;
    let body = p.sum(param)?;
    p.finish()?;
    if !p.registry.is_empty() {
        return Err(syntax(0, "a function body cannot define or use other functions here"));
    }
    Ok(GFunction::Expr { param: param.to_string(), body })
}

fn builtin_model(p: &mut Parser, name: &str) -> Result<FunctionModel, ParseError> {
    let err = |msg: String| ParseError::Builtin { name: name.to_string(), msg };
    let model = match name {
        "example7" | "example7product" => {
            let args = p.const_args(name)?;
            if args.is_empty() || args.len() % 2 != 0 || (name == "example7" && args.len() != 2) {
                return Err(err("expects (a, rho) pairs".into()));
            }
            let mut pairs = Vec::new();
            for pair in args.chunks(2) {
                if pair[1].im != 0.0 || pair[1].re <= 0.0 {
                    return Err(err("rho must be a positive real".into()));
                }
                pairs.push((pair[0], pair[1].re));
            }
            examples::example_7_product(&pairs).map_err(|e| err(e.to_string()))?
        }
        "example9_1" => {
            let args = p.const_args(name)?;
            let a = single_real_in_unit(name, &args)?;
            examples::example_9_1(a).map_err(|e| err(e.to_string()))?
        }
        "example9_2" => {
            p.expect(Tok::LParen, "`(`")?;
            let body = p.sum("w")?;
            p.expect(Tok::RParen, "`)`")?;
            if !p.registry.is_empty() {
                return Err(err("g must be written in `w` without function calls".into()));
            }
            let g = GFunction::Expr { param: "w".into(), body };
            examples::example_9_2(g).map_err(|e| err(e.to_string()))?
        }
        other => return Err(syntax(0, &format!("unknown builtin model @{other}"))),
    };
    p.finish()?;
    Ok(model)
}

/// Reads a definition file: one `name = expression` per line, blank lines and
/// lines starting with `#` ignored. Errors carry the 1-based line number.
pub fn parse_definitions(text: &str) -> Result<Vec<(String, FunctionModel)>, (usize, ParseError)> {
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let lineno = idx + 1;
        let (name, body) = trimmed
            .split_once('=')
            .ok_or_else(|| (lineno, syntax(0, "expected `name = expression`")))?;
        let name = name.trim();
        if name.is_empty() || !name.chars().all(|c| c.is_alphanumeric() || c == '_') {
            return Err((lineno, syntax(0, "definition name must be an identifier")));
        }
        let model = parse(body).map_err(|e| (lineno, e))?;
        out.push((name.to_string(), model));
    }
    Ok(out)
}
