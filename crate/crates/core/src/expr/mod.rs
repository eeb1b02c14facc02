//! Scalar-field expressions over a coordinate chart.
//!
//! Expressions are parsed from text, printed back in a canonical form and
//! evaluated either as plain values or as second-order jets (value, gradient
//! and Hessian) by forward-mode propagation.

mod jet;
mod parser;

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

pub use jet::{finite_difference_jet, Jet2};

/// Errors raised while parsing or evaluating an expression.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("syntax error at column {column}: {message}")]
    Syntax { column: usize, message: String },
    #[error("unknown identifier `{name}` at column {column}")]
    UnknownIdentifier { name: String, column: usize },
    #[error("function `{name}` takes {expected} argument(s), found {found}")]
    Arity {
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("exponent of `{expr}` must be constant")]
    NonConstantExponent { expr: String },
    #[error("domain error in `{expr}`: {reason}")]
    Domain { expr: String, reason: &'static str },
    #[error("point has {found} coordinates, expected {expected}")]
    PointDimension { expected: usize, found: usize },
    #[error("invalid coordinate name `{0}`")]
    InvalidCoordinate(String),
}

pub type Result<T> = std::result::Result<T, ExprError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Constant {
    Pi,
    E,
}

impl Constant {
    pub fn value(self) -> f64 {
        match self {
            Constant::Pi => std::f64::consts::PI,
            Constant::E => std::f64::consts::E,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Constant::Pi => "pi",
            Constant::E => "e",
        }
    }

    fn lookup(name: &str) -> Option<Self> {
        match name {
            "pi" => Some(Constant::Pi),
            "e" => Some(Constant::E),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Log,
    Sqrt,
    Sin,
    Cos,
    Tan,
    Sinh,
    Cosh,
    Tanh,
}

impl Func {
    pub const ALL: [Func; 9] = [
        Func::Exp,
        Func::Log,
        Func::Sqrt,
        Func::Sin,
        Func::Cos,
        Func::Tan,
        Func::Sinh,
        Func::Cosh,
        Func::Tanh,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Tanh => "tanh",
        }
    }

    fn lookup(name: &str) -> Option<Self> {
        Func::ALL.iter().copied().find(|f| f.name() == name)
    }

    /// Value, first and second derivative of the function at `u`.
    fn derivatives(self, u: f64) -> std::result::Result<(f64, f64, f64), &'static str> {
        Ok(match self {
            Func::Exp => {
                let v = u.exp();
                (v, v, v)
            }
            Func::Log => {
                if u <= 0.0 {
                    return Err("logarithm of a nonpositive value");
                }
                (u.ln(), 1.0 / u, -1.0 / (u * u))
            }
            Func::Sqrt => {
                if u <= 0.0 {
                    return Err("square root is not differentiable at nonpositive values");
                }
                let s = u.sqrt();
                (s, 0.5 / s, -0.25 / (s * u))
            }
            Func::Sin => (u.sin(), u.cos(), -u.sin()),
            Func::Cos => (u.cos(), -u.sin(), -u.cos()),
            Func::Tan => {
                let c = u.cos();
                if c == 0.0 {
                    return Err("tangent pole");
                }
                let t = u.tan();
                let sec2 = 1.0 + t * t;
                (t, sec2, 2.0 * t * sec2)
            }
            Func::Sinh => (u.sinh(), u.cosh(), u.sinh()),
            Func::Cosh => (u.cosh(), u.sinh(), u.cosh()),
            Func::Tanh => {
                let t = u.tanh();
                let sech2 = 1.0 - t * t;
                (t, sech2, -2.0 * t * sech2)
            }
        })
    }

    fn value(self, u: f64) -> std::result::Result<f64, &'static str> {
        match self {
            Func::Log if u <= 0.0 => Err("logarithm of a nonpositive value"),
            Func::Sqrt if u < 0.0 => Err("square root of a negative value"),
            Func::Tan if u.cos() == 0.0 => Err("tangent pole"),
            Func::Log => Ok(u.ln()),
            Func::Sqrt => Ok(u.sqrt()),
            Func::Exp => Ok(u.exp()),
            Func::Sin => Ok(u.sin()),
            Func::Cos => Ok(u.cos()),
            Func::Tan => Ok(u.tan()),
            Func::Sinh => Ok(u.sinh()),
            Func::Cosh => Ok(u.cosh()),
            Func::Tanh => Ok(u.tanh()),
        }
    }
}

/// Abstract syntax tree node. Variables are indices into the owning chart's
/// coordinate list.
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Num(f64),
    Const(Constant),
    Var(usize),
    Neg(Box<Node>),
    Binary(BinOp, Box<Node>, Box<Node>),
    /// Power with a variable-free exponent.
    Pow(Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

impl Node {
    fn precedence(&self) -> u8 {
        match self {
            Node::Binary(BinOp::Add | BinOp::Sub, ..) => 1,
            Node::Binary(BinOp::Mul | BinOp::Div, ..) => 2,
            Node::Neg(_) => 3,
            Node::Pow(..) => 4,
            Node::Num(_) | Node::Const(_) | Node::Var(_) | Node::Call(..) => 5,
        }
    }

    pub fn is_constant(&self) -> bool {
        match self {
            Node::Num(_) | Node::Const(_) => true,
            Node::Var(_) => false,
            Node::Neg(a) | Node::Call(_, a) => a.is_constant(),
            Node::Binary(_, a, b) | Node::Pow(a, b) => a.is_constant() && b.is_constant(),
        }
    }

    fn remap(&self, map: &impl Fn(usize) -> usize) -> Node {
        match self {
            Node::Num(v) => Node::Num(*v),
            Node::Const(c) => Node::Const(*c),
            Node::Var(i) => Node::Var(map(*i)),
            Node::Neg(a) => Node::Neg(Box::new(a.remap(map))),
            Node::Binary(op, a, b) => {
                Node::Binary(*op, Box::new(a.remap(map)), Box::new(b.remap(map)))
            }
            Node::Pow(a, b) => Node::Pow(Box::new(a.remap(map)), Box::new(b.remap(map))),
            Node::Call(f, a) => Node::Call(*f, Box::new(a.remap(map))),
        }
    }

    fn max_var(&self) -> Option<usize> {
        match self {
            Node::Num(_) | Node::Const(_) => None,
            Node::Var(i) => Some(*i),
            Node::Neg(a) | Node::Call(_, a) => a.max_var(),
            Node::Binary(_, a, b) | Node::Pow(a, b) => match (a.max_var(), b.max_var()) {
                (Some(x), Some(y)) => Some(x.max(y)),
                (x, y) => x.or(y),
            },
        }
    }

    fn depends_on(&self, var: usize) -> bool {
        match self {
            Node::Num(_) | Node::Const(_) => false,
            Node::Var(i) => *i == var,
            Node::Neg(a) | Node::Call(_, a) => a.depends_on(var),
            Node::Binary(_, a, b) | Node::Pow(a, b) => a.depends_on(var) || b.depends_on(var),
        }
    }

    fn write(&self, coords: &[String], out: &mut String) {
        match self {
            Node::Num(v) => out.push_str(&format_number(*v)),
            Node::Const(c) => out.push_str(c.name()),
            Node::Var(i) => out.push_str(&coords[*i]),
            Node::Neg(a) => {
                out.push('-');
                a.write_child(coords, out, a.precedence() < 3);
            }
            Node::Binary(op, a, b) => {
                let prec = self.precedence();
                a.write_child(coords, out, a.precedence() < prec);
                out.push_str(match op {
                    BinOp::Add => " + ",
                    BinOp::Sub => " - ",
                    BinOp::Mul => "*",
                    BinOp::Div => "/",
                });
                b.write_child(coords, out, b.precedence() <= prec);
            }
            Node::Pow(a, b) => {
                a.write_child(coords, out, a.precedence() <= 4);
                out.push('^');
                b.write_child(coords, out, b.precedence() < 4);
            }
            Node::Call(f, a) => {
                out.push_str(f.name());
                out.push('(');
                a.write(coords, out);
                out.push(')');
            }
        }
    }

    fn write_child(&self, coords: &[String], out: &mut String, parens: bool) {
        if parens {
            out.push('(');
        }
        self.write(coords, out);
        if parens {
            out.push(')');
        }
    }
}

fn format_number(v: f64) -> String {
    if v < 0.0 || (v == 0.0 && v.is_sign_negative()) {
        format!("(-{})", -v)
    } else {
        format!("{v}")
    }
}

/// A parsed scalar field bound to a coordinate list.
#[derive(Debug, Clone, PartialEq)]
pub struct Expression {
    node: Node,
    coords: Arc<[String]>,
}

/// Checks a coordinate name list: identifiers, unique, and not shadowing a
/// function or constant name.
pub fn validate_coords(coords: &[String]) -> Result<()> {
    for (i, c) in coords.iter().enumerate() {
        let mut chars = c.chars();
        let ok_start = chars
            .next()
            .is_some_and(|ch| ch.is_ascii_alphabetic() || ch == '_');
        let ok_rest = chars.all(|ch| ch.is_ascii_alphanumeric() || ch == '_');
        if !ok_start
            || !ok_rest
            || Func::lookup(c).is_some()
            || Constant::lookup(c).is_some()
            || coords[..i].contains(c)
        {
            return Err(ExprError::InvalidCoordinate(c.clone()));
        }
    }
    Ok(())
}

/// Parses `text` against the declared coordinate names.
pub fn parse_expression<S: AsRef<str>>(text: &str, coords: &[S]) -> Result<Expression> {
    let coords: Arc<[String]> = coords.iter().map(|s| s.as_ref().to_string()).collect();
    Expression::parse(text, coords)
}

impl Expression {
    pub fn parse(text: &str, coords: Arc<[String]>) -> Result<Self> {
        validate_coords(&coords)?;
        let node = parser::parse(text, &coords)?;
        Ok(Expression { node, coords })
    }

    pub fn from_node(node: Node, coords: Arc<[String]>) -> Self {
        debug_assert!(node.max_var().is_none_or(|v| v < coords.len()));
        Expression { node, coords }
    }

    pub fn constant(value: f64, coords: Arc<[String]>) -> Self {
        Expression {
            node: Node::Num(value),
            coords,
        }
    }

    pub fn node(&self) -> &Node {
        &self.node
    }

    pub fn coords(&self) -> &Arc<[String]> {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn is_constant(&self) -> bool {
        self.node.is_constant()
    }

    /// True when the tree is the literal zero.
    pub fn is_zero_literal(&self) -> bool {
        matches!(self.node, Node::Num(v) if v == 0.0)
    }

    pub fn depends_on(&self, var: usize) -> bool {
        self.node.depends_on(var)
    }

    /// Re-binds the expression to a larger chart, shifting every variable
    /// index by `offset`. Used to pull factor fields back to a product chart.
    pub fn lift(&self, coords: Arc<[String]>, offset: usize) -> Self {
        let node = self.node.remap(&|i| i + offset);
        Expression::from_node(node, coords)
    }

    /// Canonical text form; parsing it yields a structurally equal tree.
    pub fn to_canonical(&self) -> String {
        let mut out = String::new();
        self.node.write(&self.coords, &mut out);
        out
    }

    fn check_point(&self, point: &[f64]) -> Result<()> {
        if point.len() != self.coords.len() {
            return Err(ExprError::PointDimension {
                expected: self.coords.len(),
                found: point.len(),
            });
        }
        Ok(())
    }

    fn domain(&self, node: &Node, reason: &'static str) -> ExprError {
        let mut expr = String::new();
        node.write(&self.coords, &mut expr);
        ExprError::Domain { expr, reason }
    }

    /// Plain value at `point`.
    pub fn eval(&self, point: &[f64]) -> Result<f64> {
        self.check_point(point)?;
        let v = self.eval_node(&self.node, point)?;
        if !v.is_finite() {
            return Err(self.domain(&self.node, "non-finite value"));
        }
        Ok(v)
    }

    fn eval_node(&self, node: &Node, p: &[f64]) -> Result<f64> {
        Ok(match node {
            Node::Num(v) => *v,
            Node::Const(c) => c.value(),
            Node::Var(i) => p[*i],
            Node::Neg(a) => -self.eval_node(a, p)?,
            Node::Binary(op, a, b) => {
                let x = self.eval_node(a, p)?;
                let y = self.eval_node(b, p)?;
                match op {
                    BinOp::Add => x + y,
                    BinOp::Sub => x - y,
                    BinOp::Mul => x * y,
                    BinOp::Div => {
                        if y == 0.0 {
                            return Err(self.domain(node, "division by zero"));
                        }
                        x / y
                    }
                }
            }
            Node::Pow(a, b) => {
                let base = self.eval_node(a, p)?;
                let exponent = self.eval_node(b, p)?;
                match integer_exponent(exponent) {
                    Some(n) => {
                        if base == 0.0 && n < 0 {
                            return Err(self.domain(node, "division by zero"));
                        }
                        base.powi(n)
                    }
                    None => {
                        if base < 0.0 || (base == 0.0 && exponent < 0.0) {
                            return Err(
                                self.domain(node, "non-integer power of a nonpositive base")
                            );
                        }
                        base.powf(exponent)
                    }
                }
            }
            Node::Call(f, a) => {
                let u = self.eval_node(a, p)?;
                f.value(u).map_err(|r| self.domain(node, r))?
            }
        })
    }

    /// Value, gradient and Hessian at `point`, exact up to rounding.
    pub fn jet(&self, point: &[f64]) -> Result<Jet2> {
        self.check_point(point)?;
        let j = self.jet_node(&self.node, point)?;
        if !j.is_finite() {
            return Err(self.domain(&self.node, "non-finite value"));
        }
        Ok(j)
    }

    fn jet_node(&self, node: &Node, p: &[f64]) -> Result<Jet2> {
        let n = p.len();
        Ok(match node {
            Node::Num(v) => Jet2::constant(n, *v),
            Node::Const(c) => Jet2::constant(n, c.value()),
            Node::Var(i) => Jet2::variable(n, *i, p[*i]),
            Node::Neg(a) => self.jet_node(a, p)?.neg(),
            Node::Binary(op, a, b) => {
                let x = self.jet_node(a, p)?;
                let y = self.jet_node(b, p)?;
                match op {
                    BinOp::Add => x.add(&y),
                    BinOp::Sub => x.sub(&y),
                    BinOp::Mul => x.mul(&y),
                    BinOp::Div => {
                        if y.value == 0.0 {
                            return Err(self.domain(node, "division by zero"));
                        }
                        x.div(&y)
                    }
                }
            }
            Node::Pow(a, b) => {
                let base = self.jet_node(a, p)?;
                let c = self.eval_node(b, p)?;
                let u = base.value;
                let (f0, f1, f2) = match integer_exponent(c) {
                    Some(0) => (1.0, 0.0, 0.0),
                    Some(n) => {
                        if u == 0.0 && n < 0 {
                            return Err(self.domain(node, "division by zero"));
                        }
                        let nf = n as f64;
                        (
                            u.powi(n),
                            nf * u.powi(n - 1),
                            nf * (nf - 1.0) * u.powi(n - 2),
                        )
                    }
                    None => {
                        if u <= 0.0 {
                            return Err(
                                self.domain(node, "non-integer power of a nonpositive base")
                            );
                        }
                        (
                            u.powf(c),
                            c * u.powf(c - 1.0),
                            c * (c - 1.0) * u.powf(c - 2.0),
                        )
                    }
                };
                base.compose(f0, f1, f2)
            }
            Node::Call(f, a) => {
                let inner = self.jet_node(a, p)?;
                let (f0, f1, f2) = f
                    .derivatives(inner.value)
                    .map_err(|r| self.domain(node, r))?;
                inner.compose(f0, f1, f2)
            }
        })
    }
}

fn integer_exponent(c: f64) -> Option<i32> {
    if c.fract() == 0.0 && c.abs() <= i32::MAX as f64 {
        Some(c as i32)
    } else {
        None
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_canonical())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn xy() -> Vec<&'static str> {
        vec!["x", "y"]
    }

    #[test]
    fn parses_function_application() {
        let e = parse_expression("exp(x)", &xy()).unwrap();
        assert_eq!(e.node(), &Node::Call(Func::Exp, Box::new(Node::Var(0))));
    }

    #[test]
    fn rejects_undeclared_identifier() {
        let err = parse_expression("x + t^2", &["x"]).unwrap_err();
        assert_eq!(
            err,
            ExprError::UnknownIdentifier {
                name: "t".into(),
                column: 5
            }
        );
    }

    #[test]
    fn reports_syntax_and_arity_errors() {
        assert!(matches!(
            parse_expression("x + * y", &xy()),
            Err(ExprError::Syntax { column: 5, .. })
        ));
        assert!(matches!(
            parse_expression("sin(x, y)", &xy()),
            Err(ExprError::Arity {
                expected: 1,
                found: 2,
                ..
            })
        ));
        assert!(matches!(
            parse_expression("cos()", &xy()),
            Err(ExprError::Arity {
                expected: 1,
                found: 0,
                ..
            })
        ));
        assert!(matches!(
            parse_expression("x^y", &xy()),
            Err(ExprError::NonConstantExponent { .. })
        ));
        assert!(matches!(
            parse_expression("", &xy()),
            Err(ExprError::Syntax { .. })
        ));
        assert!(matches!(
            parse_expression("(x", &xy()),
            Err(ExprError::Syntax { .. })
        ));
        assert!(matches!(
            parse_expression("foo(x)", &xy()),
            Err(ExprError::UnknownIdentifier { .. })
        ));
    }

    #[test]
    fn rejects_shadowing_coordinates() {
        assert!(parse_expression("e", &["e"]).is_err());
        assert!(parse_expression("x", &["x", "x"]).is_err());
        assert!(parse_expression("sin", &["sin"]).is_err());
    }

    #[test]
    fn hyperbolic_identity_at_random_points() {
        let e = parse_expression("cosh(t)*cosh(t) - sinh(t)^2", &["t"]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let t: f64 = rng.gen_range(-3.0..3.0);
            assert!((e.eval(&[t]).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn bilinear_monomial_jet() {
        let e = parse_expression("x*y", &xy()).unwrap();
        let j = e.jet(&[2.0, 3.0]).unwrap();
        assert_eq!(j.value, 6.0);
        assert_eq!(j.gradient.as_slice(), &[3.0, 2.0]);
        assert_eq!(j.hessian[(0, 0)], 0.0);
        assert_eq!(j.hessian[(0, 1)], 1.0);
        assert_eq!(j.hessian[(1, 0)], 1.0);
        assert_eq!(j.hessian[(1, 1)], 0.0);
    }

    #[test]
    fn exponential_at_origin() {
        let e = parse_expression("exp(x)", &["x"]).unwrap();
        let j = e.jet(&[0.0]).unwrap();
        assert_eq!((j.value, j.gradient[0], j.hessian[(0, 0)]), (1.0, 1.0, 1.0));
    }

    #[test]
    fn constants_have_zero_derivatives() {
        let e = parse_expression("pi*e - 3^2/sqrt(2)", &xy()).unwrap();
        let j = e.jet(&[0.3, -0.2]).unwrap();
        assert!(j.gradient.iter().all(|&g| g == 0.0));
        assert!(j.hessian.iter().all(|&h| h == 0.0));
    }

    #[test]
    fn domain_errors_name_the_subexpression() {
        let e = parse_expression("1 + log(x - 1)", &["x"]).unwrap();
        match e.jet(&[0.5]).unwrap_err() {
            ExprError::Domain { expr, .. } => assert_eq!(expr, "log(x - 1)"),
            other => panic!("unexpected {other:?}"),
        }
        let e = parse_expression("1/x", &["x"]).unwrap();
        assert!(matches!(e.eval(&[0.0]), Err(ExprError::Domain { .. })));
        let e = parse_expression("x^0.5", &["x"]).unwrap();
        assert!(matches!(e.jet(&[-1.0]), Err(ExprError::Domain { .. })));
        assert!(matches!(
            e.jet(&[1.0, 2.0]),
            Err(ExprError::PointDimension { .. })
        ));
    }

    #[test]
    fn cosh_jet_matches_central_differences() {
        let e = parse_expression("cosh(t)", &["t"]).unwrap();
        let exact = e.jet(&[0.7]).unwrap();
        let fd = finite_difference_jet(&e, &[0.7], 1e-4).unwrap();
        let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(1.0);
        assert!(rel(exact.value, fd.value) < 1e-6);
        assert!(rel(exact.gradient[0], fd.gradient[0]) < 1e-6);
        assert!(rel(exact.hessian[(0, 0)], fd.hessian[(0, 0)]) < 1e-6);
    }

    #[test]
    fn finite_difference_simple_cases() {
        let e = parse_expression("x^2", &["x"]).unwrap();
        let fd = finite_difference_jet(&e, &[1.0], 1e-4).unwrap();
        assert!((fd.hessian[(0, 0)] - 2.0).abs() < 1e-6);
        let e = parse_expression("sin(x)", &["x"]).unwrap();
        let fd = finite_difference_jet(&e, &[0.0], 1e-4).unwrap();
        assert!((fd.gradient[0] - 1.0).abs() < 1e-8);
        assert!(finite_difference_jet(&e, &[0.0], 0.0).is_err());
    }

    #[test]
    fn negative_exponents_and_right_associativity() {
        let e = parse_expression("2^-1 + x^2^2 - -x", &["x"]).unwrap();
        assert!((e.eval(&[2.0]).unwrap() - (0.5 + 16.0 + 2.0)).abs() < 1e-15);
        let e = parse_expression("-x^2", &["x"]).unwrap();
        assert_eq!(e.eval(&[3.0]).unwrap(), -9.0);
    }

    /// Random polynomial of total degree at most four in three variables.
    fn random_polynomial(rng: &mut ChaCha8Rng) -> String {
        let vars = ["x", "y", "z"];
        let mut terms = Vec::new();
        for _ in 0..rng.gen_range(3..8) {
            let c: f64 = rng.gen_range(-2.0..2.0);
            let mut term = format!("{c:.3}");
            let degree = rng.gen_range(0..=4);
            for _ in 0..degree {
                term.push('*');
                term.push_str(vars[rng.gen_range(0..3)]);
            }
            terms.push(term);
        }
        terms.join(" + ")
    }

    #[test]
    fn random_polynomials_agree_with_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(20);
        let mut worst: f64 = 0.0;
        for _ in 0..20 {
            let text = random_polynomial(&mut rng);
            let e = parse_expression(&text, &["x", "y", "z"]).unwrap();
            let p: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let exact = e.jet(&p).unwrap();
            let fd = finite_difference_jet(&e, &p, 1e-4).unwrap();
            let scale = 1.0 + exact.max_abs();
            worst = worst.max(exact.max_abs_diff(&fd) / scale);
        }
        assert!(worst < 1e-5, "worst relative deviation {worst}");
    }

    #[test]
    fn central_differences_converge_quadratically() {
        let e = parse_expression("exp(x)*sin(y) + cosh(x*y)", &xy()).unwrap();
        let p = [0.4, -0.3];
        let exact = e.jet(&p).unwrap();
        let errs: Vec<f64> = [1e-2, 1e-3]
            .iter()
            .map(|&h| {
                let fd = finite_difference_jet(&e, &p, h).unwrap();
                (exact.gradient.clone() - fd.gradient).amax()
            })
            .collect();
        let slope = (errs[0] / errs[1]).log10();
        assert!((slope - 2.0).abs() < 0.2, "slope {slope}");
        // At h = 1e-4 rounding starts to compete with truncation but the
        // error is still far below the 1e-2 value.
        let fd = finite_difference_jet(&e, &p, 1e-4).unwrap();
        assert!((exact.gradient.clone() - fd.gradient).amax() < errs[1]);
    }

    #[test]
    fn product_jet_matches_leibniz_assembly() {
        let a = parse_expression("sin(x)*y + x^3", &xy()).unwrap();
        let b = parse_expression("exp(y - x)", &xy()).unwrap();
        let ab = parse_expression("(sin(x)*y + x^3)*exp(y - x)", &xy()).unwrap();
        let p = [0.3, 0.8];
        let (ja, jb, jab) = (a.jet(&p).unwrap(), b.jet(&p).unwrap(), ab.jet(&p).unwrap());
        let value = ja.value * jb.value;
        let grad = &ja.gradient * jb.value + &jb.gradient * ja.value;
        let hess = &ja.hessian * jb.value
            + &jb.hessian * ja.value
            + &ja.gradient * jb.gradient.transpose()
            + &jb.gradient * ja.gradient.transpose();
        assert!((jab.value - value).abs() < 1e-12);
        assert!((jab.gradient - grad).amax() < 1e-12);
        assert!((jab.hessian - hess).amax() < 1e-12);
    }

    fn arb_expr() -> impl Strategy<Value = String> {
        let leaf = prop_oneof![
            (0u32..50).prop_map(|n| format!("{}", n as f64 / 4.0)),
            Just("x".to_string()),
            Just("y".to_string()),
            Just("pi".to_string()),
        ];
        leaf.prop_recursive(4, 24, 2, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone(), 0..4usize).prop_map(|(a, b, op)| {
                    let sym = ["+", "-", "*", "/"][op];
                    format!("({a}) {sym} ({b})")
                }),
                inner.clone().prop_map(|a| format!("-({a})")),
                (inner.clone(), 0..4i32).prop_map(|(a, n)| format!("({a})^{n}")),
                (inner, 0..9usize).prop_map(|(a, f)| format!("{}({a})", Func::ALL[f].name())),
            ]
        })
    }

    proptest! {
        #[test]
        fn canonical_printing_round_trips(text in arb_expr()) {
            let first = parse_expression(&text, &xy()).unwrap();
            let printed = first.to_canonical();
            let second = parse_expression(&printed, &xy()).unwrap();
            prop_assert_eq!(first.node(), second.node());
        }

        #[test]
        fn jets_are_linear(a in -3.0f64..3.0, b in -3.0f64..3.0, px in -1.0f64..1.0, py in -1.0f64..1.0) {
            let e1 = parse_expression("sin(x)*y^2", &xy()).unwrap();
            let e2 = parse_expression("exp(x - y)", &xy()).unwrap();
            let combo = Expression::from_node(
                Node::Binary(
                    BinOp::Add,
                    Box::new(Node::Binary(BinOp::Mul, Box::new(Node::Num(a)), Box::new(e1.node().clone()))),
                    Box::new(Node::Binary(BinOp::Mul, Box::new(Node::Num(b)), Box::new(e2.node().clone()))),
                ),
                e1.coords().clone(),
            );
            let p = [px, py];
            let (j1, j2, j) = (e1.jet(&p).unwrap(), e2.jet(&p).unwrap(), combo.jet(&p).unwrap());
            prop_assert_eq!(j.value, a * j1.value + b * j2.value);
            prop_assert_eq!(j.gradient, &j1.gradient * a + &j2.gradient * b);
            prop_assert_eq!(j.hessian, &j1.hessian * a + &j2.hessian * b);
        }

        #[test]
        fn hessians_are_symmetric(px in -1.0f64..1.0, py in -1.0f64..1.0) {
            let e = parse_expression("tanh(x*y)^3 + cos(x)*sinh(y)/(2 + x^2)", &xy()).unwrap();
            let j = e.jet(&[px, py]).unwrap();
            prop_assert!((j.hessian[(0, 1)] - j.hessian[(1, 0)]).abs() <= 1e-15 * (1.0 + j.hessian.amax()));
        }
    }
}
