//! Finite abelian groups `Z_{n_1} x ... x Z_{n_k}`, their characters and the
//! Fourier transform under the uniform probability measure.
//!
//! Elements of `G` and of the dual group are both stored as their position in
//! the canonical mixed-radix order (first factor most significant), so `Ord`
//! on [`Element`] and [`DualElement`] is the lexicographic order on residue
//! vectors. The dual group is identified with `G` itself: the character for
//! `gamma` is `u_gamma(x) = exp(2 pi i sum_j gamma_j x_j / n_j)`.

use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::TAU;
use core::fmt;
use core::str::FromStr;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

/// Hard cap on `|G|` unless a caller asks for a different one.
pub const DEFAULT_MAX_GROUP_SIZE: usize = 1 << 20;

/// A group element, identified by its canonical index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Element(usize);

/// A dual group element (the frequency `gamma` of a character).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DualElement(usize);

impl Element {
    pub const IDENTITY: Element = Element(0);

    pub fn index(self) -> usize {
        self.0
    }
}

impl DualElement {
    pub const ZERO: DualElement = DualElement(0);

    pub(crate) fn from_index(index: usize) -> Self {
        DualElement(index)
    }

    pub fn index(self) -> usize {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

/// Validated description of `Z_{n_1} x ... x Z_{n_k}`.
#[derive(Clone)]
pub struct GroupSpec {
    orders: Vec<u64>,
    strides: Vec<usize>,
    size: usize,
    exponent: u64,
    weights: Vec<u64>,
    roots: Vec<Complex64>,
}

impl fmt::Debug for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GroupSpec")
            .field("orders", &self.orders)
            .field("size", &self.size)
            .finish()
    }
}

impl PartialEq for GroupSpec {
    fn eq(&self, other: &Self) -> bool {
        self.orders == other.orders
    }
}

impl Eq for GroupSpec {}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, n) in self.orders.iter().enumerate() {
            if i > 0 {
                f.write_str("x")?;
            }
            write!(f, "Z{n}")?;
        }
        Ok(())
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

/// `exp(2 pi i k / n)`, exact at multiples of a quarter turn.
fn unit_root(k: u64, n: u64) -> Complex64 {
    let k = k % n;
    if (4 * k).is_multiple_of(n) {
        return match 4 * k / n {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
    }
    let angle = TAU * (k as f64) / (n as f64);
    Complex64::new(angle.cos(), angle.sin())
}

impl GroupSpec {
    pub fn new(orders: &[u64]) -> Result<Self> {
        Self::with_max_size(orders, DEFAULT_MAX_GROUP_SIZE)
    }

    pub fn with_max_size(orders: &[u64], max_size: usize) -> Result<Self> {
        if orders.is_empty() {
            return Err(Error::EmptyGroup);
        }
        let mut size: u128 = 1;
        for &n in orders {
            if n < 2 {
                return Err(Error::OrderTooSmall(n));
            }
            size = size.saturating_mul(n as u128);
            if size > max_size as u128 {
                return Err(Error::GroupTooLarge {
                    size,
                    max: max_size,
                });
            }
        }
        let size = size as usize;
        let mut strides = vec![1usize; orders.len()];
        for j in (0..orders.len().saturating_sub(1)).rev() {
            strides[j] = strides[j + 1] * orders[j + 1] as usize;
        }
        let exponent = orders.iter().fold(1u64, |l, &n| l / gcd(l, n) * n);
        let weights = orders.iter().map(|&n| exponent / n).collect();
        let roots = (0..exponent).map(|k| unit_root(k, exponent)).collect();
        Ok(Self {
            orders: orders.to_vec(),
            strides,
            size,
            exponent,
            weights,
            roots,
        })
    }

    /// Parses `Z4`, `Z2^3`, `Z8xZ3` (factors joined by `x`, `^` repeats a factor).
    pub fn parse(input: &str) -> Result<Self> {
        let syntax = |reason| Error::GroupSyntax {
            input: input.to_string(),
            reason,
        };
        let trimmed = input.trim();
        if trimmed.is_empty() {
            return Err(syntax("empty group string"));
        }
        let mut orders = Vec::new();
        for factor in trimmed.split('x') {
            let factor = factor.trim();
            let body = factor
                .strip_prefix('Z')
                .ok_or_else(|| syntax("each factor must start with `Z`"))?;
            let body = body.strip_prefix('_').unwrap_or(body);
            let (order, repeat) = match body.split_once('^') {
                Some((o, r)) => (o, r.parse::<u32>().map_err(|_| syntax("bad exponent"))?),
                None => (body, 1),
            };
            let order = order.parse::<u64>().map_err(|_| syntax("bad order"))?;
            if repeat == 0 {
                return Err(syntax("exponent must be positive"));
            }
            if repeat > 64 {
                return Err(syntax("exponent too large"));
            }
            orders.extend(core::iter::repeat_n(order, repeat as usize));
        }
        Self::new(&orders)
    }

    pub fn orders(&self) -> &[u64] {
        &self.orders
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn rank(&self) -> usize {
        self.orders.len()
    }

    /// Least common multiple of the factor orders.
    pub fn exponent(&self) -> u64 {
        self.exponent
    }

    /// True when every factor has order 2 (the group is `F_2^n`).
    pub fn is_elementary_2(&self) -> bool {
        self.orders.iter().all(|&n| n == 2)
    }

    fn residue(&self, index: usize, j: usize) -> u64 {
        ((index / self.strides[j]) as u64) % self.orders[j]
    }

    pub fn residues_of(&self, index: usize) -> Vec<u64> {
        (0..self.rank()).map(|j| self.residue(index, j)).collect()
    }

    fn index_of(&self, residues: &[u64]) -> Result<usize> {
        if residues.len() != self.rank() {
            return Err(Error::DimensionMismatch {
                expected: self.rank(),
                got: residues.len(),
            });
        }
        let mut index = 0;
        for (j, (&r, &n)) in residues.iter().zip(&self.orders).enumerate() {
            if r >= n {
                return Err(Error::ResidueOutOfRange {
                    residue: r,
                    order: n,
                });
            }
            index += r as usize * self.strides[j];
        }
        Ok(index)
    }

    fn check_index(&self, index: usize) -> Result<usize> {
        if index < self.size {
            Ok(index)
        } else {
            Err(Error::IndexOutOfRange {
                index,
                size: self.size,
            })
        }
    }

    pub fn element(&self, residues: &[u64]) -> Result<Element> {
        self.index_of(residues).map(Element)
    }

    pub fn dual_element(&self, residues: &[u64]) -> Result<DualElement> {
        self.index_of(residues).map(DualElement)
    }

    pub fn element_at(&self, index: usize) -> Result<Element> {
        self.check_index(index).map(Element)
    }

    pub fn dual_at(&self, index: usize) -> Result<DualElement> {
        self.check_index(index).map(DualElement)
    }

    pub fn residues(&self, x: Element) -> Vec<u64> {
        self.residues_of(x.0)
    }

    pub fn dual_residues(&self, gamma: DualElement) -> Vec<u64> {
        self.residues_of(gamma.0)
    }

    /// All elements in canonical order.
    pub fn elements(&self) -> impl Iterator<Item = Element> + '_ {
        (0..self.size).map(Element)
    }

    /// All dual elements in canonical order.
    pub fn duals(&self) -> impl Iterator<Item = DualElement> + '_ {
        (0..self.size).map(DualElement)
    }

    fn combine(&self, a: usize, b: usize, sign_b: i64) -> usize {
        let mut out = 0;
        for j in 0..self.rank() {
            let n = self.orders[j] as i64;
            let r = (self.residue(a, j) as i64 + sign_b * self.residue(b, j) as i64).rem_euclid(n);
            out += r as usize * self.strides[j];
        }
        out
    }

    pub fn add(&self, a: DualElement, b: DualElement) -> DualElement {
        DualElement(self.combine(a.0, b.0, 1))
    }

    pub fn sub(&self, a: DualElement, b: DualElement) -> DualElement {
        DualElement(self.combine(a.0, b.0, -1))
    }

    pub fn neg(&self, a: DualElement) -> DualElement {
        DualElement(self.combine(0, a.0, -1))
    }

    /// `k * a` for any integer `k`.
    pub fn scale(&self, a: DualElement, k: i64) -> DualElement {
        let mut out = 0;
        for j in 0..self.rank() {
            let n = self.orders[j] as i128;
            let r = (k as i128 * self.residue(a.0, j) as i128).rem_euclid(n);
            out += r as usize * self.strides[j];
        }
        DualElement(out)
    }

    pub fn add_elements(&self, x: Element, y: Element) -> Element {
        Element(self.combine(x.0, y.0, 1))
    }

    /// Additive order of `a` in the dual group.
    pub fn order_of(&self, a: DualElement) -> u64 {
        (0..self.rank()).fold(1u64, |l, j| {
            let n = self.orders[j];
            let r = self.residue(a.0, j);
            let ord = n / gcd(n, r);
            l / gcd(l, ord) * ord
        })
    }

    /// Phase numerator `sum_j gamma_j x_j (N / n_j) mod N` with `N` the exponent.
    pub fn phase(&self, gamma: DualElement, x: Element) -> u64 {
        let n = self.exponent;
        (0..self.rank()).fold(0u64, |acc, j| {
            let step = (self.residue(gamma.0, j) * self.weights[j]) % n;
            (acc + (step * self.residue(x.0, j)) % n) % n
        })
    }

    /// Phases of `u_gamma(x)` for every `x` in canonical order.
    pub fn phase_row(&self, gamma: DualElement) -> Vec<u64> {
        let n = self.exponent;
        let steps: Vec<u64> = (0..self.rank())
            .map(|j| (self.residue(gamma.0, j) * self.weights[j]) % n)
            .collect();
        let mut row = Vec::with_capacity(self.size);
        let mut counter = vec![0u64; self.rank()];
        let mut phase = 0u64;
        for _ in 0..self.size {
            row.push(phase);
            // Odometer increment; a wrapped digit contributes n_j * step_j = 0 mod N.
            for j in (0..self.rank()).rev() {
                counter[j] += 1;
                phase = (phase + steps[j]) % n;
                if counter[j] < self.orders[j] {
                    break;
                }
                counter[j] = 0;
            }
        }
        row
    }

    /// `exp(2 pi i k / N)` from the precomputed table.
    pub fn root(&self, phase: u64) -> Complex64 {
        self.roots[(phase % self.exponent) as usize]
    }

    /// The character value `u_gamma(x)`.
    pub fn character(&self, gamma: DualElement, x: Element) -> Complex64 {
        self.root(self.phase(gamma, x))
    }

    /// `u_gamma` evaluated on all of `G`.
    pub fn character_values(&self, gamma: DualElement) -> Vec<Complex64> {
        self.phase_row(gamma)
            .into_iter()
            .map(|p| self.root(p))
            .collect()
    }

    pub(crate) fn check_len(&self, len: usize) -> Result<()> {
        if len == self.size {
            Ok(())
        } else {
            Err(Error::LengthMismatch {
                expected: self.size,
                got: len,
            })
        }
    }

    /// `f_hat(gamma) = E_x[f(x) conj(u_gamma(x))]`, by direct summation.
    pub fn fourier_transform(&self, f: &[f64]) -> Result<FourierTable> {
        self.check_len(f.len())?;
        let scale = 1.0 / self.size as f64;
        let coefficients = self
            .duals()
            .map(|gamma| self.coefficient(f, gamma) * scale)
            .collect();
        Ok(FourierTable { coefficients })
    }

    /// Unnormalized `sum_x f(x) conj(u_gamma(x))` for a single frequency.
    pub(crate) fn coefficient(&self, f: &[f64], gamma: DualElement) -> Complex64 {
        let n = self.exponent;
        self.phase_row(gamma)
            .into_iter()
            .zip(f)
            .fold(Complex64::new(0.0, 0.0), |acc, (p, &v)| {
                acc + self.root((n - p) % n) * v
            })
    }

    /// `Spec_delta(f) = { gamma : |f_hat(gamma)| > delta }`, in canonical order.
    pub fn spectrum(&self, f: &[f64], delta: f64) -> Result<Vec<DualElement>> {
        if !(delta >= 0.0) {
            return Err(Error::ParameterOutOfRange {
                name: "delta",
                value: delta,
                range: "[0, inf)",
            });
        }
        Ok(self.fourier_transform(f)?.spectrum(delta))
    }
}

impl FromStr for GroupSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}

/// Fourier coefficients indexed by dual element.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierTable {
    coefficients: Vec<Complex64>,
}

impl FourierTable {
    pub fn get(&self, gamma: DualElement) -> Complex64 {
        self.coefficients[gamma.0]
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn iter(&self) -> impl Iterator<Item = (DualElement, Complex64)> + '_ {
        self.coefficients
            .iter()
            .enumerate()
            .map(|(i, &c)| (DualElement(i), c))
    }

    pub fn spectrum(&self, delta: f64) -> Vec<DualElement> {
        self.iter()
            .filter(|(_, c)| c.norm() > delta)
            .map(|(g, _)| g)
            .collect()
    }

    /// `sum_gamma |f_hat(gamma)|^2`.
    pub fn energy(&self) -> f64 {
        self.coefficients.iter().map(|c| c.norm_sqr()).sum()
    }

    /// `f(x) = sum_gamma f_hat(gamma) u_gamma(x)`.
    pub fn inverse(&self, group: &GroupSpec) -> Result<Vec<Complex64>> {
        group.check_len(self.coefficients.len())?;
        let mut out = vec![Complex64::new(0.0, 0.0); group.size()];
        for (gamma, c) in self.iter() {
            for (slot, p) in out.iter_mut().zip(group.phase_row(gamma)) {
                *slot += c * group.root(p);
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn approx(a: Complex64, re: f64, im: f64) -> bool {
        (a.re - re).abs() < 1e-12 && (a.im - im).abs() < 1e-12
    }

    #[test]
    fn make_group_examples() {
        let g = GroupSpec::new(&[4]).unwrap();
        assert_eq!(g.size(), 4);
        assert_eq!(g.orders(), &[4]);

        let g = GroupSpec::new(&[2, 2]).unwrap();
        assert_eq!(g.size(), 4);
        let order: Vec<Vec<u64>> = g.elements().map(|x| g.residues(x)).collect();
        assert_eq!(order, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);

        assert_eq!(GroupSpec::new(&[8, 3]).unwrap().size(), 24);
    }

    #[test]
    fn make_group_rejects_bad_input() {
        assert_eq!(GroupSpec::new(&[4, 1]), Err(Error::OrderTooSmall(1)));
        assert_eq!(GroupSpec::new(&[]), Err(Error::EmptyGroup));
        assert!(matches!(
            GroupSpec::new(&[1 << 11, 1 << 10]),
            Err(Error::GroupTooLarge { .. })
        ));
        assert!(GroupSpec::with_max_size(&[8, 8], 32).is_err());
    }

    #[test]
    fn parses_group_strings() {
        assert_eq!(GroupSpec::parse("Z4").unwrap().orders(), &[4]);
        assert_eq!(GroupSpec::parse("Z2^3").unwrap().orders(), &[2, 2, 2]);
        assert_eq!(GroupSpec::parse("Z8xZ3").unwrap().orders(), &[8, 3]);
        assert_eq!(GroupSpec::parse("Z2^2xZ5").unwrap().orders(), &[2, 2, 5]);
        assert!(GroupSpec::parse("Y4").is_err());
        assert!(GroupSpec::parse("Z").is_err());
        assert!(GroupSpec::parse("Z1").is_err());
        assert_eq!(GroupSpec::parse("Z8xZ3").unwrap().to_string(), "Z8xZ3");
    }

    #[test]
    fn character_examples() {
        let g = GroupSpec::new(&[4]).unwrap();
        let one = g.dual_element(&[1]).unwrap();
        let two = g.dual_element(&[2]).unwrap();
        let x = g.element(&[1]).unwrap();
        assert!(approx(g.character(one, x), 0.0, 1.0));
        let sq = g.character(one, x) * g.character(one, x);
        assert!(approx(sq, -1.0, 0.0));
        assert!(approx(g.character(two, x), -1.0, 0.0));
        for x in g.elements() {
            assert!(approx(g.character(DualElement::ZERO, x), 1.0, 0.0));
        }
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let g = GroupSpec::new(&[4, 2]).unwrap();
        assert_eq!(
            g.dual_element(&[1]),
            Err(Error::DimensionMismatch {
                expected: 2,
                got: 1
            })
        );
        assert!(matches!(
            g.element(&[4, 0]),
            Err(Error::ResidueOutOfRange { .. })
        ));
    }

    #[test]
    fn phase_row_matches_pointwise_phase() {
        let g = GroupSpec::new(&[6, 4, 3]).unwrap();
        for gamma in g.duals() {
            let row = g.phase_row(gamma);
            for x in g.elements() {
                assert_eq!(row[x.index()], g.phase(gamma, x));
            }
        }
    }

    #[test]
    fn group_law() {
        let g = GroupSpec::new(&[8, 3]).unwrap();
        let a = g.dual_element(&[5, 2]).unwrap();
        let b = g.dual_element(&[6, 2]).unwrap();
        assert_eq!(g.dual_residues(g.add(a, b)), vec![3, 1]);
        assert_eq!(g.dual_residues(g.neg(a)), vec![3, 1]);
        assert_eq!(g.sub(a, a), DualElement::ZERO);
        assert_eq!(g.scale(a, 3), g.add(g.add(a, a), a));
        assert_eq!(g.scale(a, -1), g.neg(a));
        assert_eq!(g.order_of(a), 24);
        assert_eq!(g.order_of(g.dual_element(&[4, 0]).unwrap()), 2);
    }

    #[test]
    fn fourier_examples() {
        let g = GroupSpec::new(&[4]).unwrap();
        let t = g.fourier_transform(&[2.0, 0.0, 2.0, 0.0]).unwrap();
        let expected = [1.0, 0.0, 1.0, 0.0];
        for (gamma, c) in t.iter() {
            assert!(approx(c, expected[gamma.index()], 0.0));
        }

        let z2 = GroupSpec::new(&[2]).unwrap();
        let t = z2.fourier_transform(&[2.0, 0.0]).unwrap();
        assert!(approx(t.coefficients()[0], 1.0, 0.0));
        assert!(approx(t.coefficients()[1], 1.0, 0.0));

        let g = GroupSpec::new(&[3, 2]).unwrap();
        let t = g.fourier_transform(&[1.0; 6]).unwrap();
        for (gamma, c) in t.iter() {
            let want = if gamma.is_zero() { 1.0 } else { 0.0 };
            assert!(approx(c, want, 0.0));
        }
    }

    #[test]
    fn spectrum_examples() {
        let g = GroupSpec::new(&[4]).unwrap();
        let f = [2.0, 0.0, 2.0, 0.0];
        let spec = g.spectrum(&f, 0.5).unwrap();
        assert_eq!(spec, vec![g.dual_at(0).unwrap(), g.dual_at(2).unwrap()]);
        assert!(g.spectrum(&f, 1.0).unwrap().is_empty());
        assert_eq!(g.spectrum(&[1.0; 4], 0.5).unwrap(), vec![DualElement::ZERO]);
        assert!(g.spectrum(&f, -0.1).is_err());
    }

    #[test]
    fn length_mismatch() {
        let g = GroupSpec::new(&[4]).unwrap();
        assert!(matches!(
            g.fourier_transform(&[1.0, 1.0]),
            Err(Error::LengthMismatch {
                expected: 4,
                got: 2
            })
        ));
    }
}
