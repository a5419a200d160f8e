//! Polynomials in finitely many variables with coefficients in Q(q,t),
//! used as the common landing spot for tableau generating functions and
//! symmetric-function expansions.

use std::collections::HashMap;

use crate::qt::QtRational;

/// A polynomial in `nvars` variables over Q(q,t), stored sparsely by
/// exponent vector.
#[derive(Clone, Debug, Default)]
pub struct VarPoly {
    pub nvars: usize,
    pub terms: HashMap<Vec<u16>, QtRational>,
}

impl VarPoly {
    pub fn zero(nvars: usize) -> Self {
        VarPoly {
            nvars,
            terms: HashMap::new(),
        }
    }

    pub fn add_term(&mut self, exps: Vec<u16>, c: QtRational) {
        debug_assert_eq!(exps.len(), self.nvars);
        if c.is_zero() {
            return;
        }
        use std::collections::hash_map::Entry;
        match self.terms.entry(exps) {
            Entry::Occupied(mut o) => {
                let v = o.get().add(&c);
                if v.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = v;
                }
            }
            Entry::Vacant(v) => {
                v.insert(c);
            }
        }
    }

    pub fn merge(mut self, other: VarPoly) -> VarPoly {
        debug_assert_eq!(self.nvars, other.nvars);
        for (e, c) in other.terms {
            self.add_term(e, c);
        }
        self
    }

    pub fn coeff(&self, exps: &[u16]) -> QtRational {
        self.terms.get(exps).cloned().unwrap_or_else(QtRational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Structural equality of polynomials (coefficients are canonical).
    pub fn equals(&self, other: &VarPoly) -> bool {
        if self.nvars != other.nvars || self.terms.len() != other.terms.len() {
            return false;
        }
        self.terms
            .iter()
            .all(|(e, c)| other.terms.get(e).map(|d| c == d).unwrap_or(false))
    }

    pub fn mul(&self, other: &VarPoly) -> VarPoly {
        debug_assert_eq!(self.nvars, other.nvars);
        let mut out = VarPoly::zero(self.nvars);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e: Vec<u16> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.add_term(e, c1.mul(c2));
            }
        }
        out
    }
}
