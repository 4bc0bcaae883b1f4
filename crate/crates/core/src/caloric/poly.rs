//! Exact arithmetic for polynomials in the space variables and time.
//! Heat polynomials, solid harmonics and the biharmonic caloric atoms all
//! reduce to this representation, so their derivatives are closed-form.

use crate::caloric::MultiIndex;
use crate::domain::SpacePoint;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub coef: f64,
    pub powers: [u8; 3],
    #[serde(default)]
    pub t_power: u8,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct Polynomial {
    terms: Vec<Monomial>,
}

impl Polynomial {
    pub fn new(terms: Vec<Monomial>) -> Self {
        let mut p = Self { terms };
        p.canonicalize();
        p
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        Self::new(vec![Monomial {
            coef: c,
            powers: [0; 3],
            t_power: 0,
        }])
    }

    pub fn terms(&self) -> &[Monomial] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn canonicalize(&mut self) {
        self.terms
            .sort_by_key(|m| (m.t_power, m.powers[0], m.powers[1], m.powers[2]));
        let mut merged: Vec<Monomial> = Vec::with_capacity(self.terms.len());
        for term in self.terms.drain(..) {
            match merged.last_mut() {
                Some(last) if last.powers == term.powers && last.t_power == term.t_power => {
                    last.coef += term.coef;
                }
                _ => merged.push(term),
            }
        }
        merged.retain(|m| m.coef != 0.0);
        self.terms = merged;
    }

    pub fn eval(&self, x: &SpacePoint, t: f64) -> f64 {
        let mut acc = 0.0;
        for m in &self.terms {
            let mut v = m.coef;
            for (xi, &p) in x.iter().zip(&m.powers) {
                if p > 0 {
                    v *= xi.powi(p as i32);
                }
            }
            if m.t_power > 0 {
                v *= t.powi(m.t_power as i32);
            }
            acc += v;
        }
        acc
    }

    /// Exact partial derivative d^j_t d^alpha_x.
    pub fn derivative(&self, d: &MultiIndex) -> Polynomial {
        let mut terms = Vec::with_capacity(self.terms.len());
        'terms: for m in &self.terms {
            let mut coef = m.coef;
            let mut powers = m.powers;
            for axis in 0..3 {
                for _ in 0..d.alpha[axis] {
                    if powers[axis] == 0 {
                        continue 'terms;
                    }
                    coef *= powers[axis] as f64;
                    powers[axis] -= 1;
                }
            }
            let mut t_power = m.t_power;
            for _ in 0..d.j {
                if t_power == 0 {
                    continue 'terms;
                }
                coef *= t_power as f64;
                t_power -= 1;
            }
            terms.push(Monomial {
                coef,
                powers,
                t_power,
            });
        }
        Polynomial::new(terms)
    }

    pub fn laplacian(&self, n: usize) -> Polynomial {
        let mut out = Polynomial::zero();
        for axis in 0..n {
            let mut alpha = [0usize; 3];
            alpha[axis] = 2;
            out = out.add(&self.derivative(&MultiIndex { alpha, j: 0 }));
        }
        out
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let mut terms = self.terms.clone();
        terms.extend_from_slice(&other.terms);
        Polynomial::new(terms)
    }

    pub fn scale(&self, c: f64) -> Polynomial {
        Polynomial::new(
            self.terms
                .iter()
                .map(|m| Monomial { coef: m.coef * c, ..*m })
                .collect(),
        )
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                terms.push(Monomial {
                    coef: a.coef * b.coef,
                    powers: [
                        a.powers[0] + b.powers[0],
                        a.powers[1] + b.powers[1],
                        a.powers[2] + b.powers[2],
                    ],
                    t_power: a.t_power + b.t_power,
                });
            }
        }
        Polynomial::new(terms)
    }

    /// Multiply by t.
    pub fn mul_t(&self) -> Polynomial {
        Polynomial::new(
            self.terms
                .iter()
                .map(|m| Monomial {
                    t_power: m.t_power + 1,
                    ..*m
                })
                .collect(),
        )
    }

    /// Total spatial degree if every term shares it and no term carries t.
    pub fn homogeneous_spatial_degree(&self) -> Option<usize> {
        let mut degree = None;
        for m in &self.terms {
            if m.t_power != 0 {
                return None;
            }
            let d = m.powers.iter().map(|&p| p as usize).sum();
            match degree {
                None => degree = Some(d),
                Some(prev) if prev != d => return None,
                _ => {}
            }
        }
        degree
    }
}

/// One-dimensional heat polynomial H_m along the given axis:
/// H_m(x, t) = m! sum_{2q <= m} t^q x^{m-2q} / (q! (m-2q)!).
pub fn heat_polynomial_1d(m: usize, axis: usize) -> Polynomial {
    let fact = |v: usize| -> f64 { (1..=v).map(|i| i as f64).product::<f64>().max(1.0) };
    let mut terms = Vec::new();
    for q in 0..=m / 2 {
        let mut powers = [0u8; 3];
        powers[axis] = (m - 2 * q) as u8;
        terms.push(Monomial {
            coef: fact(m) / (fact(q) * fact(m - 2 * q)),
            powers,
            t_power: q as u8,
        });
    }
    Polynomial::new(terms)
}

/// Real part of (x + i y)^m as a polynomial.
pub fn circular_cos(m: usize) -> Polynomial {
    circular_pair(m).0
}

/// Imaginary part of (x + i y)^m.
pub fn circular_sin(m: usize) -> Polynomial {
    circular_pair(m).1
}

fn circular_pair(m: usize) -> (Polynomial, Polynomial) {
    let x = Polynomial::new(vec![Monomial {
        coef: 1.0,
        powers: [1, 0, 0],
        t_power: 0,
    }]);
    let y = Polynomial::new(vec![Monomial {
        coef: 1.0,
        powers: [0, 1, 0],
        t_power: 0,
    }]);
    let mut re = Polynomial::constant(1.0);
    let mut im = Polynomial::zero();
    for _ in 0..m {
        let new_re = re.mul(&x).add(&im.mul(&y).scale(-1.0));
        let new_im = re.mul(&y).add(&im.mul(&x));
        re = new_re;
        im = new_im;
    }
    (re, im)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn heat_polynomial_low_orders() {
        // H_2(x, t) = x^2 + 2t, H_3 = x^3 + 6xt
        let h2 = heat_polynomial_1d(2, 0);
        assert_eq!(h2.eval(&[1.5, 0.0, 0.0], 0.25), 1.5 * 1.5 + 0.5);
        let h3 = heat_polynomial_1d(3, 0);
        assert_eq!(h3.eval(&[2.0, 0.0, 0.0], 0.5), 8.0 + 6.0);
    }

    #[test]
    fn heat_polynomials_are_caloric() {
        for m in 0..=8 {
            let h = heat_polynomial_1d(m, 0);
            let dt = h.derivative(&MultiIndex {
                alpha: [0; 3],
                j: 1,
            });
            let dxx = h.derivative(&MultiIndex {
                alpha: [2, 0, 0],
                j: 0,
            });
            let residual = dt.add(&dxx.scale(-1.0));
            assert!(residual.is_zero(), "H_{m} residual {residual:?}");
        }
    }

    #[test]
    fn derivative_and_laplacian() {
        // p = x^2 y + t y
        let p = Polynomial::new(vec![
            Monomial {
                coef: 1.0,
                powers: [2, 1, 0],
                t_power: 0,
            },
            Monomial {
                coef: 1.0,
                powers: [0, 1, 0],
                t_power: 1,
            },
        ]);
        let dx = p.derivative(&MultiIndex {
            alpha: [1, 0, 0],
            j: 0,
        });
        assert_eq!(dx.eval(&[3.0, 2.0, 0.0], 7.0), 2.0 * 3.0 * 2.0);
        let lap = p.laplacian(2);
        assert_eq!(lap.eval(&[3.0, 2.0, 0.0], 0.0), 2.0 * 2.0);
    }

    #[test]
    fn circular_harmonics_match_trig() {
        for m in 1..=5usize {
            for &theta in &[0.3f64, 1.2, 2.9] {
                let d = [theta.cos(), theta.sin(), 0.0];
                let c = circular_cos(m).eval(&d, 0.0);
                let s = circular_sin(m).eval(&d, 0.0);
                assert!((c - (m as f64 * theta).cos()).abs() < 1e-13);
                assert!((s - (m as f64 * theta).sin()).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn homogeneous_degree_detection() {
        assert_eq!(
            circular_cos(4).homogeneous_spatial_degree(),
            Some(4)
        );
        let mixed = Polynomial::new(vec![
            Monomial {
                coef: 1.0,
                powers: [1, 0, 0],
                t_power: 0,
            },
            Monomial {
                coef: 1.0,
                powers: [0, 0, 0],
                t_power: 0,
            },
        ]);
        assert_eq!(mixed.homogeneous_spatial_degree(), None);
    }
}
