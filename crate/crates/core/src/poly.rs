//! Sparse multivariate polynomials over neuron outputs.

use std::collections::BTreeMap;

/// A monomial as the sorted multiset of its variable indices; `[]` is the
/// constant term and `[i, i]` is `z_i^2`.
pub type Monomial = Vec<usize>;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Polynomial {
    terms: BTreeMap<Monomial, f64>,
}

impl Polynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        let mut p = Self::zero();
        p.add_term(Vec::new(), c);
        p
    }

    /// `constant + sum(coef * z_var)`.
    pub fn linear<I: IntoIterator<Item = (usize, f64)>>(constant: f64, terms: I) -> Self {
        let mut p = Self::constant(constant);
        for (var, coef) in terms {
            p.add_term(vec![var], coef);
        }
        p
    }

    pub fn add_term(&mut self, mut monomial: Monomial, coef: f64) {
        use std::collections::btree_map::Entry;
        monomial.sort_unstable();
        match self.terms.entry(monomial) {
            Entry::Vacant(slot) => {
                if coef != 0.0 {
                    slot.insert(coef);
                }
            }
            Entry::Occupied(mut slot) => {
                *slot.get_mut() += coef;
                if *slot.get() == 0.0 {
                    slot.remove();
                }
            }
        }
    }

    pub fn add(&mut self, other: &Polynomial) {
        for (m, &c) in &other.terms {
            self.add_term(m.clone(), c);
        }
    }

    pub fn scaled(&self, factor: f64) -> Polynomial {
        let mut out = Polynomial::zero();
        for (m, &c) in &self.terms {
            out.add_term(m.clone(), c * factor);
        }
        out
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        let mut out = Polynomial::zero();
        for (a, &ca) in &self.terms {
            for (b, &cb) in &other.terms {
                let mut m = a.clone();
                m.extend_from_slice(b);
                out.add_term(m, ca * cb);
            }
        }
        out
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, f64)> {
        self.terms.iter().map(|(m, &c)| (m, c))
    }

    pub fn coefficient(&self, monomial: &[usize]) -> f64 {
        let mut key = monomial.to_vec();
        key.sort_unstable();
        self.terms.get(&key).copied().unwrap_or(0.0)
    }

    /// Highest monomial degree; 0 for constants and the zero polynomial.
    pub fn degree(&self) -> usize {
        self.terms.keys().map(Vec::len).max().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, z: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(m, &c)| c * m.iter().map(|&v| z[v]).product::<f64>())
            .sum()
    }

    /// Partial derivative with respect to `z_var`.
    pub fn partial(&self, var: usize) -> Polynomial {
        let mut out = Polynomial::zero();
        for (m, &c) in &self.terms {
            let power = m.iter().filter(|&&v| v == var).count();
            if power == 0 {
                continue;
            }
            let mut reduced = m.clone();
            let pos = reduced.iter().position(|&v| v == var).expect("var present");
            reduced.remove(pos);
            out.add_term(reduced, c * power as f64);
        }
        out
    }
}
