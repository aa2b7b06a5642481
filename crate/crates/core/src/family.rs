//! Bounded test functionals `+-Re u_gamma`, `+-Im u_gamma` and families of them.
//!
//! A [`Family`] realizes every distinct unsigned functional once as a table of
//! values over `G`; signed members share rows of that table.

use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::group::{DualElement, Element, GroupSpec};

/// Slack allowed on `||phi||_inf <= 1` for rounding in the root table.
const SUP_NORM_SLACK: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Part {
    Re,
    Im,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn from_value(v: f64) -> Self {
        if v < 0.0 {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    pub fn times(self, other: Sign) -> Sign {
        if self == other {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }
}

/// `sign * Re u_gamma` or `sign * Im u_gamma`.
///
/// The derived order is the canonical enumeration order: by `gamma`, then
/// `Re` before `Im`, then `+` before `-`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Functional {
    pub gamma: DualElement,
    pub part: Part,
    pub sign: Sign,
}

impl Functional {
    pub fn re(gamma: DualElement) -> Self {
        Self {
            gamma,
            part: Part::Re,
            sign: Sign::Plus,
        }
    }

    pub fn im(gamma: DualElement) -> Self {
        Self {
            gamma,
            part: Part::Im,
            sign: Sign::Plus,
        }
    }

    pub fn negated(self) -> Self {
        Self {
            sign: self.sign.flip(),
            ..self
        }
    }

    pub fn with_sign(self, sign: Sign) -> Self {
        Self { sign, ..self }
    }

    pub fn unsigned(self) -> Self {
        self.with_sign(Sign::Plus)
    }

    pub fn value_at(&self, group: &GroupSpec, x: Element) -> f64 {
        let u = group.character(self.gamma, x);
        let v = match self.part {
            Part::Re => u.re,
            Part::Im => u.im,
        };
        self.sign.value() * v
    }

    /// The functional as a vector over `G` in canonical order.
    pub fn realize(&self, group: &GroupSpec) -> Vec<f64> {
        let s = self.sign.value();
        group
            .phase_row(self.gamma)
            .into_iter()
            .map(|p| {
                let u = group.root(p);
                s * match self.part {
                    Part::Re => u.re,
                    Part::Im => u.im,
                }
            })
            .collect()
    }
}

impl fmt::Display for Functional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = match self.sign {
            Sign::Plus => "+",
            Sign::Minus => "-",
        };
        let part = match self.part {
            Part::Re => "Re",
            Part::Im => "Im",
        };
        write!(f, "{sign}{part} u_{}", self.gamma.index())
    }
}

/// `<f, g> = E_mu[f g]`.
pub fn inner_product(f: &[f64], g: &[f64]) -> f64 {
    f.iter().zip(g).map(|(a, b)| a * b).sum::<f64>() / f.len() as f64
}

/// `<f, phi>` for a single functional.
pub fn inner(group: &GroupSpec, f: &[f64], phi: &Functional) -> Result<f64> {
    group.check_len(f.len())?;
    Ok(inner_product(f, &phi.realize(group)))
}

/// A finite, deterministically ordered collection of functionals on `G`.
#[derive(Clone, Debug)]
pub struct Family<'g> {
    group: &'g GroupSpec,
    members: Vec<Functional>,
    closed_under_negation: bool,
    // Distinct unsigned functionals and their values, row-major.
    basis: Vec<Functional>,
    table: Vec<f64>,
    // For each member, (row in `basis`, sign).
    rows: Vec<(usize, f64)>,
}

impl<'g> Family<'g> {
    /// Builds a family from explicit members, checking `||phi||_inf <= 1`.
    pub fn new(group: &'g GroupSpec, members: Vec<Functional>) -> Result<Self> {
        for phi in &members {
            group.dual_at(phi.gamma.index())?;
        }
        let mut basis: Vec<Functional> = members.iter().map(|m| m.unsigned()).collect();
        basis.sort();
        basis.dedup();
        let n = group.size();
        let mut table = Vec::with_capacity(basis.len() * n);
        for phi in &basis {
            table.extend(phi.realize(group));
        }
        let rows: Vec<(usize, f64)> = members
            .iter()
            .map(|m| {
                let row = basis
                    .binary_search(&m.unsigned())
                    .expect("basis covers members");
                (row, m.sign.value())
            })
            .collect();
        for (index, &(row, _)) in rows.iter().enumerate() {
            let norm = table[row * n..(row + 1) * n]
                .iter()
                .fold(0.0f64, |a, v| a.max(v.abs()));
            if norm > 1.0 + SUP_NORM_SLACK {
                return Err(Error::FunctionalTooLarge { index, norm });
            }
        }
        let mut signed: Vec<Functional> = members.clone();
        signed.sort();
        let closed_under_negation = members
            .iter()
            .all(|m| signed.binary_search(&m.negated()).is_ok());
        Ok(Self {
            group,
            members,
            closed_under_negation,
            basis,
            table,
            rows,
        })
    }

    /// `{Re u_gamma, Im u_gamma : gamma in G^}` in canonical order.
    pub fn characters(group: &'g GroupSpec) -> Result<Self> {
        let members = group
            .duals()
            .flat_map(|g| [Functional::re(g), Functional::im(g)])
            .collect();
        Self::new(group, members)
    }

    /// `{+-Re u_gamma, +-Im u_gamma}`.
    pub fn characters_signed(group: &'g GroupSpec) -> Result<Self> {
        Self::characters(group)?.symmetrized()
    }

    /// `{Re u_gamma : gamma in lambda}`.
    pub fn real_parts(group: &'g GroupSpec, lambda: &[DualElement]) -> Result<Self> {
        Self::new(group, lambda.iter().map(|&g| Functional::re(g)).collect())
    }

    /// `{Im u_gamma : gamma in lambda}`.
    pub fn imaginary_parts(group: &'g GroupSpec, lambda: &[DualElement]) -> Result<Self> {
        Self::new(group, lambda.iter().map(|&g| Functional::im(g)).collect())
    }

    /// Adds the negation of every member, keeping canonical order.
    pub fn symmetrized(&self) -> Result<Self> {
        let mut members: Vec<Functional> = self
            .members
            .iter()
            .flat_map(|m| [m.with_sign(Sign::Plus), m.with_sign(Sign::Minus)])
            .collect();
        members.sort();
        members.dedup();
        Self::new(self.group, members)
    }

    pub fn group(&self) -> &'g GroupSpec {
        self.group
    }

    pub fn members(&self) -> &[Functional] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn is_closed_under_negation(&self) -> bool {
        self.closed_under_negation
    }

    pub(crate) fn basis(&self) -> &[Functional] {
        &self.basis
    }

    pub(crate) fn basis_row(&self, row: usize) -> &[f64] {
        let n = self.group.size();
        &self.table[row * n..(row + 1) * n]
    }

    /// Row index in the basis table and sign for member `i`.
    pub(crate) fn member_row(&self, i: usize) -> (usize, f64) {
        self.rows[i]
    }

    /// Values of member `i` over `G`.
    pub fn values(&self, i: usize) -> Vec<f64> {
        let (row, s) = self.rows[i];
        self.basis_row(row).iter().map(|v| s * v).collect()
    }

    /// `<f, phi_b>` for every unsigned basis functional.
    pub(crate) fn basis_pairings(&self, f: &[f64]) -> Vec<f64> {
        (0..self.basis.len())
            .map(|row| inner_product(f, self.basis_row(row)))
            .collect()
    }

    /// `<f, phi>` for every member, in enumeration order.
    pub fn pairings(&self, f: &[f64]) -> Result<Vec<f64>> {
        self.group.check_len(f.len())?;
        let basis = self.basis_pairings(f);
        Ok(self.rows.iter().map(|&(row, s)| s * basis[row]).collect())
    }

    /// `<f, member i>`.
    pub fn inner(&self, f: &[f64], i: usize) -> Result<f64> {
        self.group.check_len(f.len())?;
        let (row, s) = self.rows[i];
        Ok(s * inner_product(f, self.basis_row(row)))
    }

    /// `||f||_F = max_phi |<phi, f>|`.
    pub fn seminorm(&self, f: &[f64]) -> Result<f64> {
        if self.members.is_empty() {
            return Err(Error::EmptyFamily);
        }
        Ok(self
            .pairings(f)?
            .into_iter()
            .fold(0.0f64, |a, v| a.max(v.abs())))
    }

    /// `||f - g||_F`.
    pub fn distance(&self, f: &[f64], g: &[f64]) -> Result<f64> {
        self.group.check_len(g.len())?;
        let diff: Vec<f64> = f.iter().zip(g).map(|(a, b)| a - b).collect();
        self.seminorm(&diff)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    #[test]
    fn inner_examples() {
        let z2 = GroupSpec::new(&[2]).unwrap();
        let one = z2.dual_at(1).unwrap();
        let f = [2.0, 0.0];
        assert!((inner(&z2, &f, &Functional::re(one)).unwrap() - 1.0).abs() < 1e-15);

        let g = GroupSpec::new(&[3, 2]).unwrap();
        let f = [0.5, 1.5, 2.0, 0.0, 1.0, 1.0];
        let zero = DualElement::ZERO;
        assert!((inner(&g, &f, &Functional::re(zero)).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(inner(&g, &f, &Functional::im(zero)).unwrap(), 0.0);
    }

    #[test]
    fn seminorm_examples() {
        let z2 = GroupSpec::new(&[2]).unwrap();
        let fam = Family::characters(&z2).unwrap();
        assert!((fam.seminorm(&[2.0, 0.0]).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(fam.distance(&[1.0, 1.0], &[1.0, 1.0]).unwrap(), 0.0);

        let z4 = GroupSpec::new(&[4]).unwrap();
        let fam = Family::characters(&z4).unwrap();
        let h = [1.0, -1.0, 1.0, -1.0];
        assert!((fam.seminorm(&h).unwrap() - 1.0).abs() < 1e-15);
        let pairings = fam.pairings(&h).unwrap();
        let best = pairings
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).unwrap())
            .unwrap()
            .0;
        assert_eq!(fam.members()[best], Functional::re(z4.dual_at(2).unwrap()));

        let empty = Family::new(&z4, vec![]).unwrap();
        assert_eq!(empty.seminorm(&h), Err(Error::EmptyFamily));
    }

    #[test]
    fn enumeration_order_and_closure() {
        let g = GroupSpec::new(&[3]).unwrap();
        let fam = Family::characters_signed(&g).unwrap();
        assert!(fam.is_closed_under_negation());
        assert!(!Family::characters(&g).unwrap().is_closed_under_negation());
        let m = fam.members();
        assert_eq!(m.len(), 12);
        assert_eq!(m[0], Functional::re(DualElement::ZERO));
        assert_eq!(m[1], Functional::re(DualElement::ZERO).negated());
        assert_eq!(m[2], Functional::im(DualElement::ZERO));
        assert!(m.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn sup_norm_is_at_most_one() {
        let g = GroupSpec::new(&[7, 3]).unwrap();
        let fam = Family::characters_signed(&g).unwrap();
        for i in 0..fam.len() {
            assert!(fam.values(i).iter().all(|v| v.abs() <= 1.0 + 1e-12));
        }
    }

    fn group_and_function() -> impl Strategy<Value = (Vec<u64>, Vec<f64>, Vec<f64>)> {
        prop::collection::vec(2u64..6, 1..=3).prop_flat_map(|orders| {
            let n: u64 = orders.iter().product();
            (
                Just(orders),
                prop::collection::vec(-3.0f64..3.0, n as usize),
                prop::collection::vec(-3.0f64..3.0, n as usize),
            )
        })
    }

    proptest! {
        #[test]
        fn pairings_match_fourier_coefficients((orders, f, _) in group_and_function()) {
            let g = GroupSpec::new(&orders).unwrap();
            let table = g.fourier_transform(&f).unwrap();
            for gamma in g.duals() {
                let re = inner(&g, &f, &Functional::re(gamma)).unwrap();
                let im = inner(&g, &f, &Functional::im(gamma)).unwrap();
                let c = table.get(gamma);
                prop_assert!((re * re + im * im - c.norm_sqr()).abs() <= 1e-10);
                prop_assert!((re - c.re).abs() <= 1e-10);
                prop_assert!((im + c.im).abs() <= 1e-10);
            }
        }

        #[test]
        fn seminorm_is_a_seminorm((orders, f, h) in group_and_function(), a in -4.0f64..4.0) {
            let g = GroupSpec::new(&orders).unwrap();
            let fam = Family::characters(&g).unwrap();
            let scaled: Vec<f64> = f.iter().map(|v| a * v).collect();
            let sum: Vec<f64> = f.iter().zip(&h).map(|(x, y)| x + y).collect();
            let nf = fam.seminorm(&f).unwrap();
            let nh = fam.seminorm(&h).unwrap();
            prop_assert!((fam.seminorm(&scaled).unwrap() - a.abs() * nf).abs() <= 1e-10);
            prop_assert!(fam.seminorm(&sum).unwrap() <= nf + nh + 1e-10);
        }
    }
}
