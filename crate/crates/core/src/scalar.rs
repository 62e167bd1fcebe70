//! Closed-form coefficient functions of the radial coordinate `r`.
//!
//! A [`ScalarField`] is an immutable expression tree over exact rational
//! constants, named parameters, the variable `r`, sums, products, integer
//! powers and half-integer powers of the radicands `r²−1`, `r²+1`, `r⁴−1`
//! (plus square roots of positive integers). Construction normalizes the tree
//! just enough that like terms merge and `f − f` collapses to zero; anything
//! deeper is certified numerically with [`ScalarField::is_zero`].

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Relative tolerance used by [`ScalarField::is_zero`].
pub const ZERO_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScalarError {
    #[error("domain error: expression is undefined at r = {r}")]
    Domain { r: f64 },
    #[error("unbound parameter `{0}`")]
    UnboundParameter(String),
    #[error("cannot parse expression: {0}")]
    Parse(String),
}

/// Base of a half-integer power node.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Radicand {
    /// A positive integer constant, only ever raised to the power ±1/2.
    Integer(u32),
    /// `r² − 1`
    RSquaredMinusOne,
    /// `r² + 1`
    RSquaredPlusOne,
    /// `r⁴ − 1`
    RFourthMinusOne,
}

impl Radicand {
    fn tag(&self) -> String {
        match self {
            Radicand::Integer(k) => k.to_string(),
            Radicand::RSquaredMinusOne => "r2m1".into(),
            Radicand::RSquaredPlusOne => "r2p1".into(),
            Radicand::RFourthMinusOne => "r4m1".into(),
        }
    }

    fn depends_on_r(&self) -> bool {
        !matches!(self, Radicand::Integer(_))
    }

    /// Vanishes at r = 1.
    fn vanishes_at_one(&self) -> bool {
        matches!(self, Radicand::RSquaredMinusOne | Radicand::RFourthMinusOne)
    }

    fn value(&self, pt: &Point) -> f64 {
        let Point { r, u } = *pt;
        match self {
            Radicand::Integer(k) => *k as f64,
            // factored through u = r - 1 so the zero at r = 1 is resolved exactly
            Radicand::RSquaredMinusOne => u * (2.0 + u),
            Radicand::RSquaredPlusOne => r * r + 1.0,
            Radicand::RFourthMinusOne => u * (2.0 + u) * (r * r + 1.0),
        }
    }

    fn derivative(&self) -> Node {
        match self {
            Radicand::Integer(_) => Node::integer(0),
            Radicand::RSquaredMinusOne | Radicand::RSquaredPlusOne => {
                product(vec![Node::integer(2), Node::Var])
            }
            Radicand::RFourthMinusOne => product(vec![Node::integer(4), power(Node::Var, 3)]),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
enum Node {
    Const(BigRational),
    Param(Arc<str>),
    Var,
    /// radicand^(half_exponent / 2)
    Radical(Radicand, i32),
    Pow(Box<Node>, i32),
    Sum(Vec<Node>),
    Product(Vec<Node>),
}

impl Node {
    fn integer(v: i64) -> Node {
        Node::Const(BigRational::from_integer(BigInt::from(v)))
    }

    fn as_const(&self) -> Option<&BigRational> {
        match self {
            Node::Const(c) => Some(c),
            _ => None,
        }
    }

    fn size(&self) -> usize {
        match self {
            Node::Pow(b, _) => 1 + b.size(),
            Node::Sum(ts) | Node::Product(ts) => 1 + ts.iter().map(Node::size).sum::<usize>(),
            _ => 1,
        }
    }
}

/// Splits a term into its rational coefficient and the remaining factor.
fn split_coefficient(node: Node) -> (BigRational, Option<Node>) {
    match node {
        Node::Const(c) => (c, None),
        Node::Product(mut fs) => {
            if let Some(c) = fs.first().and_then(Node::as_const).cloned() {
                fs.remove(0);
                let rest = if fs.len() == 1 { fs.pop().unwrap() } else { Node::Product(fs) };
                (c, Some(rest))
            } else {
                (BigRational::one(), Some(Node::Product(fs)))
            }
        }
        other => (BigRational::one(), Some(other)),
    }
}

fn sum(terms: Vec<Node>) -> Node {
    let mut flat = Vec::with_capacity(terms.len());
    let mut stack: Vec<Node> = terms;
    while let Some(t) = stack.pop() {
        match t {
            Node::Sum(ts) => stack.extend(ts),
            other => flat.push(other),
        }
    }
    let mut constant = BigRational::zero();
    let mut grouped: BTreeMap<Node, BigRational> = BTreeMap::new();
    for t in flat {
        let (c, rest) = split_coefficient(t);
        match rest {
            None => constant += c,
            Some(rest) => *grouped.entry(rest).or_insert_with(BigRational::zero) += c,
        }
    }
    let mut out = Vec::new();
    if !constant.is_zero() {
        out.push(Node::Const(constant));
    }
    for (rest, c) in grouped {
        if c.is_zero() {
            continue;
        }
        if c.is_one() {
            out.push(rest);
        } else {
            out.push(product(vec![Node::Const(c), rest]));
        }
    }
    match out.len() {
        0 => Node::integer(0),
        1 => out.pop().unwrap(),
        _ => Node::Sum(out),
    }
}

fn rational_pow(c: &BigRational, k: i32) -> BigRational {
    let mut acc = BigRational::one();
    let base = if k < 0 { c.recip() } else { c.clone() };
    for _ in 0..k.unsigned_abs() {
        acc *= &base;
    }
    acc
}

fn product(factors: Vec<Node>) -> Node {
    let mut coefficient = BigRational::one();
    let mut var_exp = 0i32;
    let mut radicals: BTreeMap<Radicand, i32> = BTreeMap::new();
    let mut others: BTreeMap<Node, i32> = BTreeMap::new();
    let mut stack = factors;
    while let Some(f) = stack.pop() {
        match f {
            Node::Product(fs) => stack.extend(fs),
            Node::Const(c) => {
                if c.is_zero() {
                    return Node::integer(0);
                }
                coefficient *= c;
            }
            Node::Var => var_exp += 1,
            Node::Radical(k, e) => *radicals.entry(k).or_insert(0) += e,
            Node::Pow(b, e) => match *b {
                Node::Var => var_exp += e,
                base => *others.entry(base).or_insert(0) += e,
            },
            other => *others.entry(other).or_insert(0) += 1,
        }
    }
    let mut out = Vec::new();
    for (base, e) in others.iter().filter(|(b, _)| matches!(b, Node::Param(_))) {
        push_power(&mut out, base.clone(), *e);
    }
    push_power(&mut out, Node::Var, var_exp);
    for (k, e) in radicals {
        if e == 0 {
            continue;
        }
        match k {
            Radicand::Integer(v) => {
                // fold even powers of √v into the rational coefficient
                let whole = e.div_euclid(2);
                coefficient *= rational_pow(&BigRational::from_integer(BigInt::from(v)), whole);
                if e.rem_euclid(2) == 1 {
                    out.push(Node::Radical(k, 1));
                }
            }
            _ => out.push(Node::Radical(k, e)),
        }
    }
    for (base, e) in others.into_iter().filter(|(b, _)| !matches!(b, Node::Param(_))) {
        push_power(&mut out, base, e);
    }
    if out.is_empty() {
        return Node::Const(coefficient);
    }
    if out.len() == 1 && !coefficient.is_one() {
        if let Node::Sum(ts) = &out[0] {
            let c = Node::Const(coefficient);
            return sum(ts.iter().map(|t| product(vec![c.clone(), t.clone()])).collect());
        }
    }
    if !coefficient.is_one() {
        out.insert(0, Node::Const(coefficient));
    }
    if out.len() == 1 {
        out.pop().unwrap()
    } else {
        Node::Product(out)
    }
}

fn push_power(out: &mut Vec<Node>, base: Node, e: i32) {
    match e {
        0 => {}
        1 => out.push(base),
        _ => out.push(Node::Pow(Box::new(base), e)),
    }
}

fn power(base: Node, k: i32) -> Node {
    match k {
        0 => return Node::integer(1),
        1 => return base,
        _ => {}
    }
    match base {
        Node::Const(c) => {
            if c.is_zero() {
                if k < 0 {
                    Node::Pow(Box::new(Node::Const(c)), k)
                } else {
                    Node::integer(0)
                }
            } else {
                Node::Const(rational_pow(&c, k))
            }
        }
        Node::Radical(rad, e) => product(vec![Node::Radical(rad, e * k)]),
        Node::Pow(b, m) => power(*b, m * k),
        Node::Product(fs) => product(fs.into_iter().map(|f| power(f, k)).collect()),
        other => Node::Pow(Box::new(other), k),
    }
}

fn derivative(node: &Node) -> Node {
    match node {
        Node::Const(_) | Node::Param(_) => Node::integer(0),
        Node::Var => Node::integer(1),
        Node::Radical(k, e) => {
            if !k.depends_on_r() {
                return Node::integer(0);
            }
            product(vec![
                Node::Const(BigRational::new(BigInt::from(*e), BigInt::from(2))),
                Node::Radical(*k, e - 2),
                k.derivative(),
            ])
        }
        Node::Pow(b, k) => product(vec![
            Node::integer(*k as i64),
            power((**b).clone(), k - 1),
            derivative(b),
        ]),
        Node::Sum(ts) => sum(ts.iter().map(derivative).collect()),
        Node::Product(fs) => {
            let mut terms = Vec::with_capacity(fs.len());
            for i in 0..fs.len() {
                let d = derivative(&fs[i]);
                if d.as_const().is_some_and(Zero::is_zero) {
                    continue;
                }
                let mut factors = fs.clone();
                factors[i] = d;
                terms.push(product(factors));
            }
            sum(terms)
        }
    }
}

/// Evaluation point; `u = r − 1` is carried separately so that factors
/// vanishing at `r = 1` keep full relative precision.
#[derive(Clone, Copy, Debug)]
struct Point {
    r: f64,
    u: f64,
}

type Bindings = BTreeMap<String, f64>;

/// Returns `(value, scale)`, where `scale` is the magnitude of the largest
/// cancellation encountered (sums of absolute values of summands).
fn eval(node: &Node, pt: &Point, bindings: &Bindings) -> Result<(f64, f64), ScalarError> {
    let domain = || ScalarError::Domain { r: pt.r };
    let out = match node {
        Node::Const(c) => {
            let v = c.to_f64().ok_or_else(domain)?;
            (v, v.abs())
        }
        Node::Param(name) => {
            let v = *bindings
                .get(name.as_ref())
                .ok_or_else(|| ScalarError::UnboundParameter(name.to_string()))?;
            (v, v.abs())
        }
        Node::Var => (pt.r, pt.r.abs()),
        Node::Radical(k, e) => {
            let odd = e.rem_euclid(2) == 1;
            if odd && k.vanishes_at_one() && pt.u <= 0.0 {
                return Err(domain());
            }
            let base = k.value(pt);
            if base == 0.0 && *e < 0 {
                return Err(domain());
            }
            let v = if odd {
                if base < 0.0 {
                    return Err(domain());
                }
                base.sqrt().powi(*e)
            } else {
                base.powi(e / 2)
            };
            (v, v.abs())
        }
        Node::Pow(b, k) => {
            let (v, s) = eval(b, pt, bindings)?;
            if v == 0.0 && *k < 0 {
                return Err(domain());
            }
            let value = v.powi(*k);
            let scale = if *k > 0 { s.powi(*k) } else { value.abs() };
            (value, scale)
        }
        Node::Sum(ts) => {
            // Neumaier compensated summation
            let mut total = 0.0f64;
            let mut comp = 0.0f64;
            let mut scale = 0.0f64;
            for t in ts {
                let (v, s) = eval(t, pt, bindings)?;
                let next = total + v;
                if total.abs() >= v.abs() {
                    comp += (total - next) + v;
                } else {
                    comp += (v - next) + total;
                }
                total = next;
                scale += s;
            }
            (total + comp, scale)
        }
        Node::Product(fs) => {
            let mut value = 1.0;
            let mut scale = 1.0;
            for f in fs {
                let (v, s) = eval(f, pt, bindings)?;
                value *= v;
                scale *= s;
            }
            (value, scale)
        }
    };
    if out.0.is_finite() {
        Ok(out)
    } else {
        Err(domain())
    }
}

/// An immutable closed-form function of `r`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ScalarField(Arc<Node>);

impl ScalarField {
    fn wrap(node: Node) -> Self {
        ScalarField(Arc::new(node))
    }

    pub fn zero() -> Self {
        Self::integer(0)
    }

    pub fn one() -> Self {
        Self::integer(1)
    }

    pub fn integer(v: i64) -> Self {
        Self::wrap(Node::integer(v))
    }

    pub fn rational(num: i64, den: i64) -> Self {
        Self::wrap(Node::Const(BigRational::new(BigInt::from(num), BigInt::from(den))))
    }

    pub fn constant(c: BigRational) -> Self {
        Self::wrap(Node::Const(c))
    }

    /// Exact conversion of a finite binary64 value.
    pub fn from_f64(v: f64) -> Option<Self> {
        BigRational::from_float(v).map(Self::constant)
    }

    /// The radial coordinate `r`.
    pub fn r() -> Self {
        Self::wrap(Node::Var)
    }

    /// A symbolic constant; must be bound before evaluation.
    pub fn param(name: &str) -> Self {
        Self::wrap(Node::Param(Arc::from(name)))
    }

    /// `radicand^(half_exponent/2)`.
    pub fn radical(radicand: Radicand, half_exponent: i32) -> Self {
        Self::wrap(product(vec![Node::Radical(radicand, half_exponent)]))
    }

    pub fn pow(&self, k: i32) -> Self {
        Self::wrap(power((*self.0).clone(), k))
    }

    pub fn recip(&self) -> Self {
        self.pow(-1)
    }

    pub fn derivative(&self) -> Self {
        Self::wrap(derivative(&self.0))
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        self.0.as_const()
    }

    /// True when the tree normalized to the literal constant zero.
    pub fn is_structurally_zero(&self) -> bool {
        self.as_rational().is_some_and(Zero::is_zero)
    }

    pub fn node_count(&self) -> usize {
        self.0.size()
    }

    pub fn evaluate(&self, r: f64) -> Result<f64, ScalarError> {
        self.evaluate_with(r, &Bindings::new())
    }

    /// Evaluates at `r = 1 + u`, resolving the radicands through `u` directly.
    pub fn evaluate_shifted(&self, u: f64) -> Result<f64, ScalarError> {
        eval(&self.0, &Point { r: 1.0 + u, u }, &Bindings::new()).map(|(v, _)| v)
    }

    pub fn evaluate_with(&self, r: f64, bindings: &Bindings) -> Result<f64, ScalarError> {
        eval(&self.0, &Point { r, u: r - 1.0 }, bindings).map(|(v, _)| v)
    }

    fn evaluate_scaled(&self, r: f64) -> Result<(f64, f64), ScalarError> {
        eval(&self.0, &Point { r, u: r - 1.0 }, &Bindings::new())
    }

    /// Certifies `f ≡ 0` by sampling: `|f(rᵢ)| ≤ 1e−10·(1 + scale)` at every point.
    pub fn is_zero(&self, samples: &Samples) -> bool {
        if self.is_structurally_zero() {
            return true;
        }
        samples.points().iter().all(|&r| match self.evaluate_scaled(r) {
            Ok((v, s)) => v.abs() <= ZERO_TOLERANCE * (1.0 + s),
            Err(_) => false,
        })
    }

    /// Largest `|f(rᵢ)|` over the samples (infinite on a domain error).
    pub fn max_abs(&self, samples: &Samples) -> f64 {
        if self.is_structurally_zero() {
            return 0.0;
        }
        samples
            .points()
            .iter()
            .map(|&r| self.evaluate(r).map(f64::abs).unwrap_or(f64::INFINITY))
            .fold(0.0, f64::max)
    }

    /// Replaces parameters by exact rational values.
    pub fn substitute(&self, values: &BTreeMap<String, BigRational>) -> Self {
        fn go(node: &Node, values: &BTreeMap<String, BigRational>) -> Node {
            match node {
                Node::Param(name) => match values.get(name.as_ref()) {
                    Some(v) => Node::Const(v.clone()),
                    None => node.clone(),
                },
                Node::Pow(b, k) => power(go(b, values), *k),
                Node::Sum(ts) => sum(ts.iter().map(|t| go(t, values)).collect()),
                Node::Product(fs) => product(fs.iter().map(|f| go(f, values)).collect()),
                other => other.clone(),
            }
        }
        Self::wrap(go(&self.0, values))
    }

    pub fn parameters(&self) -> Vec<String> {
        fn go(node: &Node, out: &mut Vec<String>) {
            match node {
                Node::Param(p) => {
                    if !out.iter().any(|q| q == p.as_ref()) {
                        out.push(p.to_string());
                    }
                }
                Node::Pow(b, _) => go(b, out),
                Node::Sum(ts) | Node::Product(ts) => ts.iter().for_each(|t| go(t, out)),
                _ => {}
            }
        }
        let mut out = Vec::new();
        go(&self.0, &mut out);
        out.sort();
        out
    }

    /// Canonical prefix serialization, e.g. `(* (pow r -2) (+ 1 (* C0 (pow (poly r4m1) -1))))`.
    pub fn to_prefix(&self) -> String {
        let mut s = String::new();
        write_prefix(&self.0, &mut s);
        s
    }

    pub fn parse(text: &str) -> Result<Self, ScalarError> {
        let tokens = tokenize(text);
        let mut pos = 0;
        let node = parse_node(&tokens, &mut pos)?;
        if pos != tokens.len() {
            return Err(ScalarError::Parse(format!("trailing input in `{text}`")));
        }
        Ok(Self::wrap(node))
    }
}

fn write_rational(c: &BigRational, out: &mut String) {
    if c.is_integer() {
        out.push_str(&c.numer().to_string());
    } else {
        out.push_str(&format!("{}/{}", c.numer(), c.denom()));
    }
}

fn write_prefix(node: &Node, out: &mut String) {
    match node {
        Node::Const(c) => write_rational(c, out),
        Node::Param(p) => out.push_str(p),
        Node::Var => out.push('r'),
        Node::Radical(k, e) => {
            let base = match k {
                Radicand::Integer(v) => v.to_string(),
                _ => format!("(poly {})", k.tag()),
            };
            if *e == 2 && k.depends_on_r() {
                out.push_str(&base);
            } else if e % 2 == 0 {
                out.push_str(&format!("(pow {} {})", base, e / 2));
            } else {
                out.push_str(&format!("(pow {} {}/2)", base, e));
            }
        }
        Node::Pow(b, k) => {
            out.push_str("(pow ");
            write_prefix(b, out);
            out.push_str(&format!(" {k})"));
        }
        Node::Sum(ts) | Node::Product(ts) => {
            out.push_str(if matches!(node, Node::Sum(_)) { "(+" } else { "(*" });
            for t in ts {
                out.push(' ');
                write_prefix(t, out);
            }
            out.push(')');
        }
    }
}

fn tokenize(text: &str) -> Vec<String> {
    text.replace('(', " ( ").replace(')', " ) ").split_whitespace().map(str::to_string).collect()
}

fn parse_rational(tok: &str) -> Option<BigRational> {
    match tok.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.parse().ok()?;
            let d: BigInt = d.parse().ok()?;
            (!d.is_zero()).then(|| BigRational::new(n, d))
        }
        None => tok.parse::<BigInt>().ok().map(BigRational::from_integer),
    }
}

fn radicand_from_tag(tag: &str) -> Option<Radicand> {
    match tag {
        "r2m1" => Some(Radicand::RSquaredMinusOne),
        "r2p1" => Some(Radicand::RSquaredPlusOne),
        "r4m1" => Some(Radicand::RFourthMinusOne),
        _ => None,
    }
}

fn parse_node(tokens: &[String], pos: &mut usize) -> Result<Node, ScalarError> {
    let err = |m: &str| ScalarError::Parse(m.to_string());
    let tok = tokens.get(*pos).ok_or_else(|| err("unexpected end of input"))?.clone();
    *pos += 1;
    if tok != "(" {
        if tok == "r" {
            return Ok(Node::Var);
        }
        if let Some(c) = parse_rational(&tok) {
            return Ok(Node::Const(c));
        }
        if tok.chars().next().is_some_and(|c| c.is_alphabetic() || c == '_') {
            return Ok(Node::Param(Arc::from(tok.as_str())));
        }
        return Err(err(&format!("unexpected token `{tok}`")));
    }
    let head = tokens.get(*pos).ok_or_else(|| err("missing operator"))?.clone();
    *pos += 1;
    let node = match head.as_str() {
        "+" | "*" => {
            let mut items = Vec::new();
            while tokens.get(*pos).map(String::as_str) != Some(")") {
                items.push(parse_node(tokens, pos)?);
            }
            if head == "+" {
                sum(items)
            } else {
                product(items)
            }
        }
        "poly" => {
            let tag = tokens.get(*pos).ok_or_else(|| err("missing radicand"))?;
            *pos += 1;
            let k = radicand_from_tag(tag).ok_or_else(|| err("unknown radicand"))?;
            Node::Radical(k, 2)
        }
        "pow" => {
            let base = parse_node(tokens, pos)?;
            let exp = tokens.get(*pos).ok_or_else(|| err("missing exponent"))?;
            *pos += 1;
            let e = parse_rational(exp).ok_or_else(|| err("bad exponent"))?;
            let twice = &e * BigRational::from_integer(BigInt::from(2));
            if !twice.is_integer() {
                return Err(err("exponent must be a multiple of 1/2"));
            }
            let twice = twice.to_integer().to_i32().ok_or_else(|| err("exponent too large"))?;
            match base {
                Node::Radical(k, 2) => product(vec![Node::Radical(k, twice)]),
                Node::Const(c) if twice % 2 != 0 => {
                    let v = c
                        .to_integer()
                        .to_u32()
                        .filter(|_| c.is_integer() && c.is_positive())
                        .ok_or_else(|| err("surds need a positive integer base"))?;
                    product(vec![Node::Radical(Radicand::Integer(v), twice)])
                }
                other if twice % 2 == 0 => power(other, twice / 2),
                _ => return Err(err("half-integer power of a non-radicand")),
            }
        }
        other => return Err(err(&format!("unknown operator `{other}`"))),
    };
    if tokens.get(*pos).map(String::as_str) != Some(")") {
        return Err(err("expected `)`"));
    }
    *pos += 1;
    Ok(node)
}

impl fmt::Display for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_prefix())
    }
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ScalarField({})", self.to_prefix())
    }
}

impl From<i64> for ScalarField {
    fn from(v: i64) -> Self {
        ScalarField::integer(v)
    }
}

impl From<BigRational> for ScalarField {
    fn from(v: BigRational) -> Self {
        ScalarField::constant(v)
    }
}

macro_rules! binary_op {
    ($trait:ident, $method:ident, $body:expr) => {
        impl $trait<&ScalarField> for &ScalarField {
            type Output = ScalarField;
            fn $method(self, rhs: &ScalarField) -> ScalarField {
                let f: fn(&ScalarField, &ScalarField) -> ScalarField = $body;
                f(self, rhs)
            }
        }
        impl $trait<ScalarField> for ScalarField {
            type Output = ScalarField;
            fn $method(self, rhs: ScalarField) -> ScalarField {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&ScalarField> for ScalarField {
            type Output = ScalarField;
            fn $method(self, rhs: &ScalarField) -> ScalarField {
                (&self).$method(rhs)
            }
        }
        impl $trait<ScalarField> for &ScalarField {
            type Output = ScalarField;
            fn $method(self, rhs: ScalarField) -> ScalarField {
                self.$method(&rhs)
            }
        }
    };
}

binary_op!(Add, add, |a, b| ScalarField::wrap(sum(vec![(*a.0).clone(), (*b.0).clone()])));
binary_op!(Sub, sub, |a, b| ScalarField::wrap(sum(vec![
    (*a.0).clone(),
    product(vec![Node::integer(-1), (*b.0).clone()]),
])));
binary_op!(Mul, mul, |a, b| ScalarField::wrap(product(vec![(*a.0).clone(), (*b.0).clone()])));
binary_op!(Div, div, |a, b| ScalarField::wrap(product(vec![
    (*a.0).clone(),
    power((*b.0).clone(), -1),
])));

impl Neg for &ScalarField {
    type Output = ScalarField;
    fn neg(self) -> ScalarField {
        ScalarField::wrap(product(vec![Node::integer(-1), (*self.0).clone()]))
    }
}

impl Neg for ScalarField {
    type Output = ScalarField;
    fn neg(self) -> ScalarField {
        -&self
    }
}

impl std::iter::Sum for ScalarField {
    fn sum<I: Iterator<Item = ScalarField>>(iter: I) -> Self {
        ScalarField::wrap(sum(iter.map(|f| (*f.0).clone()).collect()))
    }
}

/// Sample points in `(1, ∞)` used to certify identities.
#[derive(Clone, Debug, PartialEq)]
pub struct Samples(Vec<f64>);

impl Samples {
    pub fn new(points: Vec<f64>) -> Self {
        Samples(points)
    }

    /// `n` deterministic, log-spaced points in `[lo, hi]`, nudged off any
    /// simple rational grid.
    pub fn spread(n: usize, lo: f64, hi: f64) -> Self {
        let (a, b) = (lo.ln(), hi.ln());
        let pts = (0..n)
            .map(|i| {
                let t = (i as f64 + 0.5 + 0.3 * ((i as f64) * 0.618_033_988_75).fract()) / n as f64;
                (a + (b - a) * t).exp()
            })
            .collect();
        Samples(pts)
    }

    /// `n` seeded uniform draws in `[lo, hi]`.
    pub fn random(seed: u64, n: usize, lo: f64, hi: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Samples((0..n).map(|_| rng.random_range(lo..hi)).collect())
    }

    /// The default certification set: 30 points in `[1.05, 20]`.
    pub fn standard() -> Self {
        Self::spread(30, 1.05, 20.0)
    }

    pub fn points(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl Default for Samples {
    fn default() -> Self {
        Self::standard()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r() -> ScalarField {
        ScalarField::r()
    }

    fn finite_difference(f: &ScalarField, x: f64) -> f64 {
        let h = 1e-5 * x;
        let p = |s: f64| f.evaluate(x + s * h).unwrap();
        (-p(2.0) + 8.0 * p(1.0) - 8.0 * p(-1.0) + p(-2.0)) / (12.0 * h)
    }

    fn calabi_a() -> ScalarField {
        ScalarField::radical(Radicand::Integer(2), -1)
            * ScalarField::radical(Radicand::RSquaredMinusOne, 1)
    }

    fn calabi_b() -> ScalarField {
        ScalarField::radical(Radicand::Integer(2), -1)
            * ScalarField::radical(Radicand::RSquaredPlusOne, 1)
    }

    fn calabi_f() -> ScalarField {
        r().recip() * ScalarField::radical(Radicand::RFourthMinusOne, 1)
    }

    #[test]
    fn evaluates_metric_coefficients() {
        let s2 = std::f64::consts::SQRT_2;
        let a = calabi_a().evaluate(s2).unwrap();
        assert!((a - std::f64::consts::FRAC_1_SQRT_2).abs() <= 1e-14 * a);
        assert_eq!(r().evaluate(3.0).unwrap(), 3.0);
        let f = calabi_f().evaluate(s2).unwrap();
        assert!((f - 1.5f64.sqrt()).abs() <= 1e-14 * f);
        let two_ab_over_c = (ScalarField::integer(2) * calabi_a() * calabi_b() / r()).evaluate(s2).unwrap();
        assert!((f - two_ab_over_c).abs() <= 1e-14 * f);
    }

    #[test]
    fn radicals_below_one_are_domain_errors() {
        let f = ScalarField::radical(Radicand::RFourthMinusOne, 1);
        assert!(matches!(f.evaluate(0.5), Err(ScalarError::Domain { .. })));
        assert!(matches!(f.evaluate(1.0), Err(ScalarError::Domain { .. })));
        // radical-free expressions are fine at r <= 1
        let g = r() * r() + ScalarField::integer(3);
        assert_eq!(g.evaluate(0.5).unwrap(), 3.25);
        assert!(matches!(r().recip().evaluate(0.0), Err(ScalarError::Domain { .. })));
    }

    #[test]
    fn unbound_parameters_are_reported() {
        let f = ScalarField::param("C0") * r();
        assert_eq!(f.evaluate(2.0), Err(ScalarError::UnboundParameter("C0".into())));
        let mut b = Bindings::new();
        b.insert("C0".into(), 1.5);
        assert_eq!(f.evaluate_with(2.0, &b).unwrap(), 3.0);
    }

    #[test]
    fn power_rule_example() {
        // d/dr(-n/r^2) = 2n/r^3, checked for a concrete n and symbolically
        let n = ScalarField::param("n");
        let f = -(&n) * r().pow(-2);
        let expected = ScalarField::integer(2) * &n * r().pow(-3);
        assert!((f.derivative() - expected).is_structurally_zero());
        assert!(ScalarField::rational(7, 3).derivative().is_structurally_zero());
    }

    #[test]
    fn chain_rule_example() {
        let f = ScalarField::radical(Radicand::RFourthMinusOne, -3);
        let expected = ScalarField::integer(-6) * r().pow(3) * ScalarField::radical(Radicand::RFourthMinusOne, -5);
        assert!((f.derivative() - &expected).is_zero(&Samples::standard()));
        let fd = finite_difference(&f, 2.0);
        let exact = expected.evaluate(2.0).unwrap();
        assert!((fd - exact).abs() <= 1e-8 * exact.abs());
    }

    #[test]
    fn is_zero_examples() {
        let s = Samples::standard();
        let (a, b, c, f) = (calabi_a(), calabi_b(), r(), calabi_f());
        assert!((&a * &a + &b * &b - &c * &c).is_zero(&s));
        assert!(!ScalarField::one().is_zero(&s));
        let four = ScalarField::integer(4);
        assert!((four * &a * &a * &b * &b - &c * &c * &f * &f).is_zero(&s));
    }

    #[test]
    fn self_difference_normalizes_to_zero() {
        let f = ScalarField::parse("(* -1 n (pow r -2) (+ 1 (* C0 (pow (poly r4m1) -1))))").unwrap();
        assert!((&f - &f).is_structurally_zero());
        let g = calabi_a() * calabi_b() + r().pow(3) / (r() + ScalarField::one());
        assert!((&g - &g).is_structurally_zero());
    }

    #[test]
    fn surds_fold() {
        let s = ScalarField::radical(Radicand::Integer(2), 1);
        assert_eq!((&s * &s).as_rational().cloned(), Some(BigRational::from_integer(2.into())));
    }

    #[test]
    fn prefix_format_is_canonical() {
        let f = -(ScalarField::param("n") * r().pow(-2))
            * (ScalarField::one()
                + ScalarField::param("C0") * ScalarField::radical(Radicand::RFourthMinusOne, -2));
        assert_eq!(f.to_prefix(), "(* -1 n (pow r -2) (+ 1 (* C0 (pow (poly r4m1) -1))))");
        assert_eq!(ScalarField::parse(&f.to_prefix()).unwrap(), f);
        assert_eq!(ScalarField::radical(Radicand::RFourthMinusOne, -3).to_prefix(), "(pow (poly r4m1) -3/2)");
    }

    #[test]
    fn shifted_evaluation_resolves_the_zero_section() {
        let f = ScalarField::radical(Radicand::RFourthMinusOne, -8);
        let u: f64 = 1e-9;
        let exact = (u * (2.0 + u) * ((1.0 + u) * (1.0 + u) + 1.0)).powi(-4);
        let v = f.evaluate_shifted(u).unwrap();
        assert!((v - exact).abs() <= 1e-14 * exact);
    }

    #[test]
    fn random_samples_are_seeded() {
        assert_eq!(Samples::random(3, 5, 1.1, 2.0), Samples::random(3, 5, 1.1, 2.0));
        assert_ne!(Samples::random(3, 5, 1.1, 2.0), Samples::random(4, 5, 1.1, 2.0));
    }
}
