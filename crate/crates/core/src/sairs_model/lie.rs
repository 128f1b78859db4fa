//! Lie brackets of the regime vector fields.
//!
//! The regime fields are quadratic polynomials in `(S, A, I)`, so brackets of
//! any depth are again polynomial fields. [`PolyField`] keeps them in exact
//! polynomial form; evaluating a bracket and its Jacobian then needs no
//! numerical differentiation.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use super::{EpidemicParams, EpidemicState3, ModelError, Subsystem};
use crate::linalg::{self, Mat3, Vec3};

/// Singular values below this fraction of the largest count as zero.
pub const RANK_TOL: f64 = 1e-8;

/// A smooth vector field on `R^3` with an analytic Jacobian.
pub trait VectorField {
    fn eval(&self, x: &Vec3) -> Vec3;
    fn jacobian(&self, x: &Vec3) -> Mat3;
}

impl VectorField for Subsystem {
    fn eval(&self, x: &Vec3) -> Vec3 {
        self.drift3(&EpidemicState3::from_array(*x))
    }

    fn jacobian(&self, x: &Vec3) -> Mat3 {
        self.jacobian3(&EpidemicState3::from_array(*x))
    }
}

/// `[u, v](x) = J_v(x) u(x) - J_u(x) v(x)`.
pub fn lie_bracket<U: VectorField + ?Sized, V: VectorField + ?Sized>(u: &U, v: &V, x: &Vec3) -> Vec3 {
    let jv_u = linalg::mat_vec(&v.jacobian(x), &u.eval(x));
    let ju_v = linalg::mat_vec(&u.jacobian(x), &v.eval(x));
    linalg::sub(&jv_u, &ju_v)
}

/// Polynomial in three variables, keyed by exponent triple.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Poly {
    terms: BTreeMap<[u8; 3], f64>,
}

impl Poly {
    fn add_term(&mut self, exp: [u8; 3], coef: f64) {
        if coef == 0.0 {
            return;
        }
        let entry = self.terms.entry(exp).or_insert(0.0);
        *entry += coef;
        if *entry == 0.0 {
            self.terms.remove(&exp);
        }
    }

    fn from_terms(terms: &[([u8; 3], f64)]) -> Self {
        let mut p = Self::default();
        for &(exp, coef) in terms {
            p.add_term(exp, coef);
        }
        p
    }

    fn mul(&self, other: &Self) -> Self {
        let mut out = Self::default();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                out.add_term([ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2]], ca * cb);
            }
        }
        out
    }

    fn add_scaled(&mut self, other: &Self, scale: f64) {
        for (&e, &c) in &other.terms {
            self.add_term(e, scale * c);
        }
    }

    fn diff(&self, var: usize) -> Self {
        let mut out = Self::default();
        for (&e, &c) in &self.terms {
            if e[var] == 0 {
                continue;
            }
            let mut d = e;
            d[var] -= 1;
            out.add_term(d, c * f64::from(e[var]));
        }
        out
    }

    pub fn eval(&self, x: &Vec3) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                c * libm::pow(x[0], e[0].into()) * libm::pow(x[1], e[1].into()) * libm::pow(x[2], e[2].into())
            })
            .sum()
    }

    pub fn degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|e| u32::from(e[0]) + u32::from(e[1]) + u32::from(e[2]))
            .max()
            .unwrap_or(0)
    }
}

/// Vector field with polynomial components.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PolyField {
    components: [Poly; 3],
}

const S: [u8; 3] = [1, 0, 0];
const A: [u8; 3] = [0, 1, 0];
const I: [u8; 3] = [0, 0, 1];
const ONE: [u8; 3] = [0, 0, 0];
const SA: [u8; 3] = [1, 1, 0];
const SI: [u8; 3] = [1, 0, 1];

impl PolyField {
    /// The regime drift as an exact polynomial field.
    pub fn from_subsystem(p: &Subsystem) -> Self {
        let s_eq = Poly::from_terms(&[
            (ONE, p.mu + p.gamma),
            (SA, -p.beta_a),
            (SI, -p.beta_i),
            (S, -(p.mu + p.nu + p.gamma)),
            (A, -p.gamma),
            (I, -p.gamma),
        ]);
        let a_eq = Poly::from_terms(&[(SA, p.beta_a), (SI, p.beta_i), (A, -(p.alpha + p.delta_a + p.mu))]);
        let i_eq = Poly::from_terms(&[(A, p.alpha), (I, -(p.delta_i + p.mu))]);
        Self {
            components: [s_eq, a_eq, i_eq],
        }
    }

    /// Exact bracket `[self, other]`.
    pub fn bracket(&self, other: &Self) -> Self {
        let mut out = Self::default();
        for (j, comp) in out.components.iter_mut().enumerate() {
            for k in 0..3 {
                comp.add_scaled(&self.components[k].mul(&other.components[j].diff(k)), 1.0);
                comp.add_scaled(&other.components[k].mul(&self.components[j].diff(k)), -1.0);
            }
        }
        out
    }

    pub fn degree(&self) -> u32 {
        self.components.iter().map(Poly::degree).max().unwrap_or(0)
    }
}

impl VectorField for PolyField {
    fn eval(&self, x: &Vec3) -> Vec3 {
        [
            self.components[0].eval(x),
            self.components[1].eval(x),
            self.components[2].eval(x),
        ]
    }

    fn jacobian(&self, x: &Vec3) -> Mat3 {
        let mut j = [[0.0; 3]; 3];
        for (row, comp) in j.iter_mut().zip(&self.components) {
            for (k, v) in row.iter_mut().enumerate() {
                *v = comp.diff(k).eval(x);
            }
        }
        j
    }
}

/// Fields `u_r`, then left-nested brackets `[u_i, w]` of increasing depth
/// (`depth = 0` gives the fields alone, `1` adds `[u_i, u_j]`, `2` adds
/// `[u_i, [u_j, u_k]]`, ...), evaluated at `x`.
pub fn lie_span_vectors(params: &EpidemicParams, x: &EpidemicState3, depth: usize) -> Result<Vec<Vec3>, ModelError> {
    params.validate()?;
    let base: Vec<PolyField> = params.subsystems().iter().map(PolyField::from_subsystem).collect();
    let point = x.to_array();
    let mut out: Vec<Vec3> = base.iter().map(|f| f.eval(&point)).collect();
    let mut level: Vec<PolyField> = Vec::new();
    for d in 1..=depth {
        let next: Vec<PolyField> = if d == 1 {
            let mut first = Vec::new();
            for i in 0..base.len() {
                for j in i + 1..base.len() {
                    first.push(base[i].bracket(&base[j]));
                }
            }
            first
        } else {
            base.iter()
                .flat_map(|u| level.iter().map(move |w| u.bracket(w)))
                .collect()
        };
        out.extend(next.iter().map(|f| f.eval(&point)));
        level = next;
    }
    Ok(out)
}

/// Numerical rank of [`lie_span_vectors`] with relative tolerance
/// [`RANK_TOL`]. Rank 3 means the bracket condition holds at `x`.
pub fn lie_span_rank(params: &EpidemicParams, x: &EpidemicState3, depth: usize) -> Result<usize, ModelError> {
    let vectors = lie_span_vectors(params, x, depth)?;
    let sv = linalg::singular_values_3(&vectors);
    if sv[0] == 0.0 {
        return Ok(0);
    }
    Ok(sv.iter().filter(|&&s| s > RANK_TOL * sv[0]).count())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn params() -> EpidemicParams {
        EpidemicParams {
            beta_a: vec![0.05, 0.9],
            beta_i: vec![0.05, 0.9],
            delta_a: 0.07,
            delta_i: 0.07,
            alpha: 0.5,
            gamma: 0.02,
            nu: 0.01,
            mu: 1.0 / (60.0 * 365.0),
        }
    }

    #[test]
    fn poly_field_matches_subsystem() {
        let sub = params().subsystem(1).unwrap();
        let poly = PolyField::from_subsystem(&sub);
        let x = [0.4, 0.1, 0.2];
        let (a, b) = (poly.eval(&x), sub.eval(&x));
        for k in 0..3 {
            assert!((a[k] - b[k]).abs() < 1e-15);
        }
        let (ja, jb) = (poly.jacobian(&x), sub.jacobian(&x));
        for r in 0..3 {
            for c in 0..3 {
                assert!((ja[r][c] - jb[r][c]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn self_bracket_vanishes() {
        let sub = params().subsystem(0).unwrap();
        assert_eq!(lie_bracket(&sub, &sub, &[0.5, 0.1, 0.1]), [0.0; 3]);
        let poly = PolyField::from_subsystem(&sub);
        assert_eq!(poly.bracket(&poly), PolyField::default());
    }

    #[test]
    fn polynomial_bracket_matches_jacobian_formula() {
        let p = params();
        let (u, v) = (p.subsystem(0).unwrap(), p.subsystem(1).unwrap());
        let bracket = PolyField::from_subsystem(&u).bracket(&PolyField::from_subsystem(&v));
        assert!(bracket.degree() <= 3);
        let x = [0.3, 0.2, 0.15];
        let direct = lie_bracket(&u, &v, &x);
        let exact = bracket.eval(&x);
        for k in 0..3 {
            assert!((direct[k] - exact[k]).abs() < 1e-15);
        }
    }

    #[test]
    fn fields_alone_span_at_most_two() {
        let p = params();
        let x = EpidemicState3::new(0.4, 0.1, 0.2);
        assert!(lie_span_rank(&p, &x, 0).unwrap() <= 2);
        assert_eq!(lie_span_rank(&p, &x, 2).unwrap(), 3);
    }
}
