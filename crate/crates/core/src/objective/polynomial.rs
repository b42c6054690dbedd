//! Sparse multivariate polynomials over the flat coordinates of a profile.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::simplex::DomainShape;

use super::Objective;

/// `coefficient · Π x_k^{p_k}` with exponents sorted by flat index.
#[derive(Clone, Debug, PartialEq)]
pub struct Monomial {
    pub coefficient: f64,
    exponents: Vec<(usize, u32)>,
}

impl Monomial {
    /// Builds a monomial from `(flat index, power)` pairs. Repeated indices are
    /// combined and zero powers dropped.
    pub fn new(coefficient: f64, exponents: impl IntoIterator<Item = (usize, u32)>) -> Self {
        let mut map = BTreeMap::new();
        for (k, p) in exponents {
            *map.entry(k).or_insert(0u32) += p;
        }
        Self {
            coefficient,
            exponents: map.into_iter().filter(|&(_, p)| p > 0).collect(),
        }
    }

    pub fn constant(coefficient: f64) -> Self {
        Self {
            coefficient,
            exponents: Vec::new(),
        }
    }

    pub fn exponents(&self) -> &[(usize, u32)] {
        &self.exponents
    }

    pub fn total_degree(&self) -> u32 {
        self.exponents.iter().map(|&(_, p)| p).sum()
    }

    fn power_product(&self, x: &[f64], skip: Option<usize>) -> f64 {
        self.exponents
            .iter()
            .enumerate()
            .filter(|(pos, _)| Some(*pos) != skip)
            .map(|(_, &(k, p))| x[k].powi(p as i32))
            .product()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.coefficient * self.power_product(x, None)
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        Monomial::new(
            self.coefficient * other.coefficient,
            self.exponents.iter().chain(&other.exponents).copied(),
        )
    }
}

/// Sum of monomials in canonical form: sorted by exponent vector, no two
/// monomials with the same exponents, no exact-zero coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct SparsePolynomial {
    shape: DomainShape,
    monomials: Vec<Monomial>,
}

impl SparsePolynomial {
    pub fn new(shape: DomainShape, monomials: impl IntoIterator<Item = Monomial>) -> Result<Self> {
        let mut merged: BTreeMap<Vec<(usize, u32)>, f64> = BTreeMap::new();
        for m in monomials {
            if let Some(&(k, _)) = m.exponents.iter().find(|&&(k, _)| k >= shape.dim()) {
                return Err(Error::ShapeMismatch {
                    expected: format!("variable index < {}", shape.dim()),
                    found: format!("{k}"),
                });
            }
            if !m.coefficient.is_finite() {
                return Err(Error::InvalidConfig("non-finite coefficient".into()));
            }
            *merged.entry(m.exponents).or_insert(0.0) += m.coefficient;
        }
        let monomials = merged
            .into_iter()
            .filter(|&(_, c)| c != 0.0)
            .map(|(exponents, coefficient)| Monomial { coefficient, exponents })
            .collect();
        Ok(Self { shape, monomials })
    }

    pub fn zero(shape: DomainShape) -> Self {
        Self {
            shape,
            monomials: Vec::new(),
        }
    }

    pub fn constant(shape: DomainShape, c: f64) -> Self {
        Self::new(shape, [Monomial::constant(c)]).expect("constant is always valid")
    }

    /// The single variable `x_{player, strategy}` (zero-based).
    pub fn variable(shape: DomainShape, player: usize, strategy: usize) -> Self {
        Self::new(shape, [Monomial::new(1.0, [(shape.index(player, strategy), 1)])]).expect("index within shape")
    }

    pub fn monomials(&self) -> &[Monomial] {
        &self.monomials
    }

    pub fn degree(&self) -> u32 {
        self.monomials.iter().map(Monomial::total_degree).max().unwrap_or(0)
    }

    pub fn nonneg_coefficients(&self) -> bool {
        self.monomials.iter().all(|m| m.coefficient >= 0.0)
    }

    pub fn is_homogeneous(&self) -> bool {
        let mut degrees = self.monomials.iter().map(Monomial::total_degree);
        match degrees.next() {
            Some(d) => degrees.all(|e| e == d),
            None => true,
        }
    }

    pub fn min_coefficient(&self) -> Option<f64> {
        self.monomials
            .iter()
            .map(|m| m.coefficient)
            .min_by(|a, b| a.total_cmp(b))
    }

    /// Coefficient of the monomial with the given exponents (0 if absent).
    pub fn coefficient_of(&self, exponents: &[(usize, u32)]) -> f64 {
        let key = Monomial::new(1.0, exponents.iter().copied()).exponents;
        self.monomials
            .binary_search_by(|m| m.exponents.cmp(&key))
            .map(|pos| self.monomials[pos].coefficient)
            .unwrap_or(0.0)
    }

    pub fn add(&self, other: &SparsePolynomial) -> SparsePolynomial {
        self.combine(other, 1.0)
    }

    pub fn sub(&self, other: &SparsePolynomial) -> SparsePolynomial {
        self.combine(other, -1.0)
    }

    fn combine(&self, other: &SparsePolynomial, sign: f64) -> SparsePolynomial {
        assert_eq!(self.shape, other.shape, "polynomial shapes differ");
        let terms = self
            .monomials
            .iter()
            .cloned()
            .chain(other.monomials.iter().map(|m| Monomial {
                coefficient: sign * m.coefficient,
                exponents: m.exponents.clone(),
            }));
        Self::new(self.shape, terms).expect("operands are valid")
    }

    pub fn scale(&self, factor: f64) -> SparsePolynomial {
        let terms = self.monomials.iter().map(|m| Monomial {
            coefficient: factor * m.coefficient,
            exponents: m.exponents.clone(),
        });
        Self::new(self.shape, terms).expect("operands are valid")
    }

    pub fn mul(&self, other: &SparsePolynomial) -> SparsePolynomial {
        assert_eq!(self.shape, other.shape, "polynomial shapes differ");
        let terms = self
            .monomials
            .iter()
            .flat_map(|a| other.monomials.iter().map(move |b| a.mul(b)));
        Self::new(self.shape, terms).expect("operands are valid")
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.monomials.iter().map(|m| m.eval(x)).sum()
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.shape.dim()];
        for m in &self.monomials {
            for (pos, &(k, p)) in m.exponents.iter().enumerate() {
                let own = p as f64 * x[k].powi(p as i32 - 1);
                g[k] += m.coefficient * own * m.power_product(x, Some(pos));
            }
        }
        g
    }

    pub fn hessian(&self, x: &[f64]) -> DMatrix<f64> {
        let n = self.shape.dim();
        let mut h = DMatrix::zeros(n, n);
        for m in &self.monomials {
            let e = &m.exponents;
            for a in 0..e.len() {
                let (k, p) = e[a];
                // diagonal
                if p >= 2 {
                    let own = (p * (p - 1)) as f64 * x[k].powi(p as i32 - 2);
                    h[(k, k)] += m.coefficient * own * m.power_product(x, Some(a));
                }
                for b in a + 1..e.len() {
                    let (l, q) = e[b];
                    let rest: f64 = e
                        .iter()
                        .enumerate()
                        .filter(|&(pos, _)| pos != a && pos != b)
                        .map(|(_, &(r, s))| x[r].powi(s as i32))
                        .product();
                    let v =
                        m.coefficient * p as f64 * x[k].powi(p as i32 - 1) * q as f64 * x[l].powi(q as i32 - 1) * rest;
                    h[(k, l)] += v;
                    h[(l, k)] += v;
                }
            }
        }
        h
    }

    /// Parses the line-oriented text format. `shape` fixes N×M; without it
    /// the shape is inferred from the largest indices used (M at least 2).
    pub fn parse(text: &str, shape: Option<DomainShape>) -> Result<Self> {
        let (parsed, directive) = parse_terms(text, 0)?;
        let shape = match shape.or(directive) {
            Some(s) => s,
            None => infer_shape(&parsed)?,
        };
        build_from_parsed(parsed, shape)
    }

    /// Renders the polynomial in the text format (1-indexed players and
    /// strategies), one monomial per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for m in &self.monomials {
            write!(out, "{:?}", m.coefficient).unwrap();
            for &(k, p) in &m.exponents {
                let (i, j) = self.shape.split(k);
                write!(out, " {}:{}^{}", i + 1, j + 1, p).unwrap();
            }
            out.push('\n');
        }
        out
    }
}

impl Objective for SparsePolynomial {
    fn shape(&self) -> DomainShape {
        self.shape
    }

    fn value_at(&self, x: &[f64]) -> Result<f64> {
        self.shape.check_len(x.len())?;
        Ok(self.eval(x))
    }

    fn gradient_at(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.shape.check_len(x.len())?;
        Ok(self.gradient(x))
    }

    fn hessian_at(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        self.shape.check_len(x.len())?;
        Ok(self.hessian(x))
    }
}

/// One parsed monomial with zero-based `(player, strategy, power)` factors.
pub(crate) type ParsedTerm = (f64, Vec<(usize, usize, u32)>);

/// Parses monomial lines; returns the terms and an optional `shape N M`
/// directive. `line_offset` shifts reported line numbers.
pub(crate) fn parse_terms(text: &str, line_offset: usize) -> Result<(Vec<ParsedTerm>, Option<DomainShape>)> {
    let mut terms = Vec::new();
    let mut directive = None;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1 + line_offset;
        let err = |message: String| Error::Parse { line: line_no, message };
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let head = tokens.next().expect("non-empty line");
        if head == "shape" {
            let dims: Vec<usize> = tokens
                .map(|t| t.parse::<usize>().map_err(|e| err(format!("bad shape '{t}': {e}"))))
                .collect::<Result<_>>()?;
            if dims.len() != 2 {
                return Err(err("shape directive needs N and M".into()));
            }
            directive = Some(DomainShape::new(dims[0], dims[1]).map_err(|e| err(e.to_string()))?);
            continue;
        }
        let coeff: f64 = head
            .parse()
            .map_err(|_| err(format!("expected a coefficient, found '{head}'")))?;
        if !coeff.is_finite() {
            return Err(err("coefficient must be finite".into()));
        }
        let mut factors = Vec::new();
        for tok in tokens {
            let (var, pow) = match tok.split_once('^') {
                Some((v, p)) => (v, p.parse::<u32>().map_err(|_| err(format!("bad power in '{tok}'")))?),
                None => (tok, 1),
            };
            let (i, j) = var
                .split_once(':')
                .ok_or_else(|| err(format!("expected <player>:<strategy>, found '{tok}'")))?;
            let i: usize = i.parse().map_err(|_| err(format!("bad player in '{tok}'")))?;
            let j: usize = j.parse().map_err(|_| err(format!("bad strategy in '{tok}'")))?;
            if i == 0 || j == 0 {
                return Err(err(format!("indices are 1-based, found '{tok}'")));
            }
            if pow == 0 {
                return Err(err(format!("power must be positive in '{tok}'")));
            }
            factors.push((i - 1, j - 1, pow));
        }
        terms.push((coeff, factors));
    }
    Ok((terms, directive))
}

pub(crate) fn infer_shape(terms: &[ParsedTerm]) -> Result<DomainShape> {
    let n = terms
        .iter()
        .flat_map(|(_, f)| f.iter().map(|&(i, _, _)| i + 1))
        .max()
        .unwrap_or(1);
    let m = terms
        .iter()
        .flat_map(|(_, f)| f.iter().map(|&(_, j, _)| j + 1))
        .max()
        .unwrap_or(2)
        .max(2);
    DomainShape::new(n, m)
}

pub(crate) fn build_from_parsed(terms: Vec<ParsedTerm>, shape: DomainShape) -> Result<SparsePolynomial> {
    let mut monomials = Vec::with_capacity(terms.len());
    for (coeff, factors) in terms {
        let mut exps = Vec::with_capacity(factors.len());
        for (i, j, p) in factors {
            if i >= shape.num_players || j >= shape.num_strategies {
                return Err(Error::ShapeMismatch {
                    expected: format!("indices within {shape}"),
                    found: format!("{}:{}", i + 1, j + 1),
                });
            }
            exps.push((shape.index(i, j), p));
        }
        monomials.push(Monomial::new(coeff, exps));
    }
    SparsePolynomial::new(shape, monomials)
}

/// Coefficient of `Π x_k^{e_k}` in `(Σ_k x_k + 1)^d`, i.e.
/// `d! / (e_1! ⋯ e_r! (d − Σe)!)`; zero when `Σe > d`.
pub fn multinomial_weight(exponents: &[(usize, u32)], d: u32) -> f64 {
    let total: u32 = exponents.iter().map(|&(_, p)| p).sum();
    if total > d {
        return 0.0;
    }
    // product of binomials C(remaining, e_k)
    let mut remaining = d;
    let mut w = 1.0;
    for &(_, p) in exponents {
        w *= binomial(remaining, p);
        remaining -= p;
    }
    w
}

fn binomial(n: u32, k: u32) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, t| acc * (n - t) as f64 / (t + 1) as f64)
}

/// Full expansion of `(Σ_k x_k + 1)^d` over all coordinates of `shape`.
pub fn simplex_power_expansion(shape: DomainShape, d: u32) -> SparsePolynomial {
    let n = shape.dim();
    let mut terms = Vec::new();
    let mut current: Vec<(usize, u32)> = Vec::new();
    fn recurse(var: usize, n: usize, budget: u32, d: u32, current: &mut Vec<(usize, u32)>, terms: &mut Vec<Monomial>) {
        if var == n {
            let w = multinomial_weight(current, d);
            terms.push(Monomial::new(w, current.iter().copied()));
            return;
        }
        recurse(var + 1, n, budget, d, current, terms);
        for p in 1..=budget {
            current.push((var, p));
            recurse(var + 1, n, budget - p, d, current, terms);
            current.pop();
        }
    }
    recurse(0, n, d, d, &mut current, &mut terms);
    SparsePolynomial::new(shape, terms).expect("expansion indices are in range")
}
