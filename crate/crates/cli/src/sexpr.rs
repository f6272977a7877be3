//! Prefix s-expression syntax for fields.
//!
//! ```text
//! expr := number | name | "(" op expr* ")"
//! op   := + - * / ^ sqrt log primitive
//! ```
//!
//! Numbers are integers, fractions (`-3/4`) or decimals (`0.25`), all read
//! exactly. Names depend on the [`Scope`].

use std::fmt;
use std::str::FromStr;

use cochain_core::{Expr, Rational};
use num_bigint::BigInt;
use num_traits::{Pow, Zero};

/// Which variable names an expression may use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scope {
    /// `x0 .. x{dim-1}`, plus `t` for `x0` when `dim == 4`.
    Coordinates { dim: usize },
    /// A profile in the single variable `H`.
    Profile,
    /// A spatial field on ℝ⁴ using `x1 x2 x3` only.
    Spatial,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    /// 1-based character column.
    pub column: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "column {}: {}", self.column, self.message)
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Open,
    Close,
    Atom(String),
}

struct Lexer {
    tokens: Vec<(usize, Token)>,
    pos: usize,
    end: usize,
}

fn tokenize(src: &str) -> Lexer {
    let mut tokens = Vec::new();
    let mut chars = src.chars().enumerate().peekable();
    while let Some((col, c)) = chars.next() {
        match c {
            '(' => tokens.push((col + 1, Token::Open)),
            ')' => tokens.push((col + 1, Token::Close)),
            c if c.is_whitespace() => {}
            c => {
                let mut atom = String::from(c);
                while let Some(&(_, n)) = chars.peek() {
                    if n.is_whitespace() || n == '(' || n == ')' {
                        break;
                    }
                    atom.push(n);
                    chars.next();
                }
                tokens.push((col + 1, Token::Atom(atom)));
            }
        }
    }
    Lexer {
        tokens,
        pos: 0,
        end: src.chars().count() + 1,
    }
}

impl Lexer {
    fn next(&mut self) -> Option<(usize, Token)> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn peek(&self) -> Option<&(usize, Token)> {
        self.tokens.get(self.pos)
    }

    fn column(&self) -> usize {
        self.peek().map(|(c, _)| *c).unwrap_or(self.end)
    }
}

fn err<T>(column: usize, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError {
        column,
        message: message.into(),
    })
}

/// Parse `src` as a single expression in `scope`.
pub fn parse(src: &str, scope: Scope) -> Result<Expr, ParseError> {
    let mut lx = tokenize(src);
    if lx.tokens.is_empty() {
        return err(1, "empty expression");
    }
    let e = parse_expr(&mut lx, scope)?;
    if let Some((col, _)) = lx.peek() {
        return err(*col, "unexpected trailing input");
    }
    Ok(e)
}

fn parse_expr(lx: &mut Lexer, scope: Scope) -> Result<Expr, ParseError> {
    let column = lx.column();
    match lx.next() {
        None => err(column, "unexpected end of input"),
        Some((col, Token::Close)) => err(col, "unexpected ')'"),
        Some((col, Token::Atom(a))) => parse_atom(&a, col, scope),
        Some((_, Token::Open)) => {
            let op_col = lx.column();
            let op = match lx.next() {
                Some((_, Token::Atom(op))) => op,
                Some((col, _)) => return err(col, "expected an operator"),
                None => return err(op_col, "unexpected end of input"),
            };
            let mut args = Vec::new();
            let mut arg_cols = Vec::new();
            loop {
                match lx.peek() {
                    Some((_, Token::Close)) => {
                        lx.next();
                        break;
                    }
                    Some(_) => {
                        arg_cols.push(lx.column());
                        args.push(parse_expr(lx, scope)?);
                    }
                    None => return err(lx.column(), "missing ')'"),
                }
            }
            apply(&op, op_col, args, &arg_cols)
        }
    }
}

fn arity(op: &str, col: usize, args: &[Expr], n: usize) -> Result<(), ParseError> {
    if args.len() != n {
        return err(
            col,
            format!("'{op}' takes {n} argument(s), got {}", args.len()),
        );
    }
    Ok(())
}

fn apply(
    op: &str,
    col: usize,
    mut args: Vec<Expr>,
    arg_cols: &[usize],
) -> Result<Expr, ParseError> {
    match op {
        "+" => Ok(Expr::sum(args)),
        "*" => Ok(Expr::product(args)),
        "-" => match args.len() {
            0 => err(col, "'-' needs at least one argument"),
            1 => Ok(Expr::negate(args.pop().unwrap())),
            _ => {
                let first = args.remove(0);
                Ok(Expr::difference(first, Expr::sum(args)))
            }
        },
        "/" => {
            if args.len() < 2 {
                return err(col, "'/' needs at least two arguments");
            }
            let mut it = args.into_iter().zip(arg_cols.iter());
            let (mut acc, _) = it.next().unwrap();
            for (d, &dc) in it {
                acc = Expr::try_quotient(acc, d).or_else(|_| err(dc, "division by zero"))?;
            }
            Ok(acc)
        }
        "^" => {
            arity(op, col, &args, 2)?;
            let exponent = args.pop().unwrap();
            let n = exponent
                .as_const()
                .filter(|c| c.is_integer())
                .and_then(|c| i32::try_from(c.to_integer()).ok());
            match n {
                Some(n) => {
                    let base = args.pop().unwrap();
                    if n < 0 && base.is_zero() {
                        return err(arg_cols[0], "zero raised to a negative power");
                    }
                    Ok(Expr::pow(base, n))
                }
                None => err(arg_cols[1], "exponent must be an integer literal"),
            }
        }
        "sqrt" => {
            arity(op, col, &args, 1)?;
            Ok(Expr::sqrt(args.pop().unwrap()))
        }
        "log" => {
            arity(op, col, &args, 1)?;
            Ok(Expr::log(args.pop().unwrap()))
        }
        "primitive" => {
            arity(op, col, &args, 2)?;
            let variable = args.pop().unwrap();
            Ok(Expr::formal_primitive(args.pop().unwrap(), variable))
        }
        other => err(col, format!("unknown operator '{other}'")),
    }
}

fn parse_atom(a: &str, col: usize, scope: Scope) -> Result<Expr, ParseError> {
    let starts_numeric = a.starts_with(|c: char| c.is_ascii_digit() || c == '.')
        || (a.len() > 1
            && a.starts_with('-')
            && a[1..].starts_with(|c: char| c.is_ascii_digit() || c == '.'));
    if starts_numeric {
        return parse_number(a)
            .map(Expr::constant)
            .ok_or_else(|| ParseError {
                column: col,
                message: format!("malformed number '{a}'"),
            });
    }
    match (scope, a) {
        (Scope::Profile, "H") => Ok(Expr::coord(0)),
        (Scope::Profile, _) => err(col, format!("unknown variable '{a}' (profiles use H only)")),
        (Scope::Coordinates { dim: 4 }, "t") => Ok(Expr::coord(0)),
        (Scope::Spatial, "t" | "x0") => err(col, "spatial fields must not depend on t"),
        (Scope::Coordinates { dim }, _) => coordinate(a, col, dim),
        (Scope::Spatial, _) => coordinate(a, col, 4),
    }
}

fn coordinate(a: &str, col: usize, dim: usize) -> Result<Expr, ParseError> {
    let axis = a
        .strip_prefix('x')
        .filter(|d| !d.is_empty() && d.chars().all(|c| c.is_ascii_digit()))
        .and_then(|d| d.parse::<usize>().ok());
    match axis {
        Some(i) if i < dim => Ok(Expr::coord(i)),
        Some(i) => err(
            col,
            format!("coordinate x{i} out of range for dimension {dim}"),
        ),
        None => err(col, format!("unknown name '{a}'")),
    }
}

/// Exact value of an integer, fraction or decimal literal.
pub fn parse_number(a: &str) -> Option<Rational> {
    if let Some((whole, frac)) = a.split_once('.') {
        let negative = whole.starts_with('-');
        let digits = whole.trim_start_matches('-');
        if (digits.is_empty() && frac.is_empty()) || !frac.chars().all(|c| c.is_ascii_digit()) {
            return None;
        }
        if !digits.chars().all(|c| c.is_ascii_digit()) {
            return None;
        }
        let int_part = if digits.is_empty() {
            BigInt::zero()
        } else {
            BigInt::from_str(digits).ok()?
        };
        let frac_part = if frac.is_empty() {
            BigInt::zero()
        } else {
            BigInt::from_str(frac).ok()?
        };
        let scale: BigInt = Pow::pow(BigInt::from(10), frac.len() as u32);
        let value = Rational::new(int_part * &scale + frac_part, scale);
        return Some(if negative { -value } else { value });
    }
    if a.contains('+') || a.ends_with('/') {
        return None;
    }
    let r = Rational::from_str(a).ok()?;
    if r.denom().is_zero() {
        return None;
    }
    Some(r)
}
