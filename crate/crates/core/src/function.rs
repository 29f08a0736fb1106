//! Evaluable functions on the bivariate sample space.
//!
//! A [`StatFunction`] is a small expression tree over the coordinate
//! projections `pi1(x, y) = x`, `pi2(x, y) = y`, the product `p(x, y) = xy`
//! and constants, closed under sums, products, scalar multiples and integer
//! powers. Opaque closures are allowed too. Whenever the tree contains no
//! closure it can be expanded into a [`Polynomial`], which lets a law with
//! known moments integrate it exactly.

use std::collections::BTreeMap;
use std::fmt;
use std::ops;
use std::sync::Arc;

type Closure = dyn Fn(f64, f64) -> f64 + Send + Sync;

#[derive(Clone)]
enum Node {
    Const(f64),
    X,
    Y,
    Add(StatFunction, StatFunction),
    Mul(StatFunction, StatFunction),
    Scale(f64, StatFunction),
    Pow(StatFunction, u32),
    Custom(Arc<Closure>),
}

/// A real-valued function of an observation `(x, y)`, carrying a label for
/// diagnostics. Cheap to clone and shareable across threads.
#[derive(Clone)]
pub struct StatFunction {
    node: Arc<Node>,
    label: Arc<str>,
}

impl StatFunction {
    fn from_node(node: Node, label: impl Into<Arc<str>>) -> Self {
        Self {
            node: Arc::new(node),
            label: label.into(),
        }
    }

    pub fn constant(c: f64) -> Self {
        Self::from_node(Node::Const(c), format!("{c}"))
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    /// `pi1(x, y) = x`.
    pub fn pi1() -> Self {
        Self::from_node(Node::X, "pi1")
    }

    /// `pi2(x, y) = y`.
    pub fn pi2() -> Self {
        Self::from_node(Node::Y, "pi2")
    }

    /// `p(x, y) = x * y`.
    pub fn p() -> Self {
        Self::from_node(Node::Mul(Self::pi1(), Self::pi2()), "p")
    }

    /// Wraps an arbitrary closure. Such functions can only be integrated by
    /// Monte Carlo.
    pub fn custom<F>(label: &str, f: F) -> Self
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        Self::from_node(Node::Custom(Arc::new(f)), label)
    }

    pub fn with_label(mut self, label: &str) -> Self {
        self.label = label.into();
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn scale(&self, c: f64) -> Self {
        Self::from_node(
            Node::Scale(c, self.clone()),
            format!("{c}*({})", self.label),
        )
    }

    pub fn powi(&self, k: u32) -> Self {
        Self::from_node(Node::Pow(self.clone(), k), format!("({})^{k}", self.label))
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        match &*self.node {
            Node::Const(c) => *c,
            Node::X => x,
            Node::Y => y,
            Node::Add(a, b) => a.eval(x, y) + b.eval(x, y),
            Node::Mul(a, b) => a.eval(x, y) * b.eval(x, y),
            Node::Scale(c, a) => c * a.eval(x, y),
            Node::Pow(a, k) => a.eval(x, y).powi(*k as i32),
            Node::Custom(f) => f(x, y),
        }
    }

    /// Expands into monomials, or `None` when a closure is involved.
    pub fn to_polynomial(&self) -> Option<Polynomial> {
        Some(match &*self.node {
            Node::Const(c) => Polynomial::constant(*c),
            Node::X => Polynomial::monomial(1.0, 1, 0),
            Node::Y => Polynomial::monomial(1.0, 0, 1),
            Node::Add(a, b) => &a.to_polynomial()? + &b.to_polynomial()?,
            Node::Mul(a, b) => &a.to_polynomial()? * &b.to_polynomial()?,
            Node::Scale(c, a) => a.to_polynomial()?.scale(*c),
            Node::Pow(a, k) => a.to_polynomial()?.powi(*k),
            Node::Custom(_) => return None,
        })
    }

    /// True when the function is a known constant (after expansion).
    pub fn as_constant(&self) -> Option<f64> {
        let poly = self.to_polynomial()?;
        if poly.degree() == 0 {
            Some(poly.coefficient(0, 0))
        } else {
            None
        }
    }
}

impl fmt::Debug for StatFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("StatFunction").field(&self.label).finish()
    }
}

impl fmt::Display for StatFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

impl ops::Add for &StatFunction {
    type Output = StatFunction;
    fn add(self, rhs: &StatFunction) -> StatFunction {
        StatFunction::from_node(
            Node::Add(self.clone(), rhs.clone()),
            format!("{} + {}", self.label, rhs.label),
        )
    }
}

impl ops::Sub for &StatFunction {
    type Output = StatFunction;
    fn sub(self, rhs: &StatFunction) -> StatFunction {
        StatFunction::from_node(
            Node::Add(self.clone(), rhs.scale(-1.0)),
            format!("{} - ({})", self.label, rhs.label),
        )
    }
}

impl ops::Mul for &StatFunction {
    type Output = StatFunction;
    fn mul(self, rhs: &StatFunction) -> StatFunction {
        StatFunction::from_node(
            Node::Mul(self.clone(), rhs.clone()),
            format!("({})*({})", self.label, rhs.label),
        )
    }
}

impl ops::Neg for &StatFunction {
    type Output = StatFunction;
    fn neg(self) -> StatFunction {
        self.scale(-1.0)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl ops::$tr for StatFunction {
            type Output = StatFunction;
            fn $m(self, rhs: StatFunction) -> StatFunction {
                ops::$tr::$m(&self, &rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl ops::Neg for StatFunction {
    type Output = StatFunction;
    fn neg(self) -> StatFunction {
        self.scale(-1.0)
    }
}

/// Bivariate polynomial `sum c_ij x^i y^j`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Polynomial {
    terms: BTreeMap<(u32, u32), f64>,
}

impl Polynomial {
    pub fn constant(c: f64) -> Self {
        Self::monomial(c, 0, 0)
    }

    pub fn monomial(c: f64, i: u32, j: u32) -> Self {
        let mut terms = BTreeMap::new();
        if c != 0.0 {
            terms.insert((i, j), c);
        }
        Self { terms }
    }

    pub fn coefficient(&self, i: u32, j: u32) -> f64 {
        self.terms.get(&(i, j)).copied().unwrap_or(0.0)
    }

    /// Iterates `((i, j), c)` over nonzero coefficients.
    pub fn terms(&self) -> impl Iterator<Item = ((u32, u32), f64)> + '_ {
        self.terms.iter().map(|(k, v)| (*k, *v))
    }

    /// Total degree; 0 for constants (including the zero polynomial).
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|(i, j)| i + j).max().unwrap_or(0)
    }

    pub fn scale(mut self, c: f64) -> Self {
        if c == 0.0 {
            return Self::default();
        }
        for v in self.terms.values_mut() {
            *v *= c;
        }
        self
    }

    pub fn powi(&self, k: u32) -> Self {
        let mut out = Self::constant(1.0);
        for _ in 0..k {
            out = &out * self;
        }
        out
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.terms
            .iter()
            .map(|(&(i, j), c)| c * x.powi(i as i32) * y.powi(j as i32))
            .sum()
    }

    fn insert_add(&mut self, key: (u32, u32), c: f64) {
        let e = self.terms.entry(key).or_insert(0.0);
        *e += c;
        if *e == 0.0 {
            self.terms.remove(&key);
        }
    }
}

impl ops::Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (&k, &c) in &rhs.terms {
            out.insert_add(k, c);
        }
        out
    }
}

impl ops::Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        let mut out = Polynomial::default();
        for (&(i1, j1), &a) in &self.terms {
            for (&(i2, j2), &b) in &rhs.terms {
                out.insert_add((i1 + i2, j1 + j2), a * b);
            }
        }
        out
    }
}
