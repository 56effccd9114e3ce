use crate::expr::{CanonExpr, Monomial, UnknownSym};

/// Finite linear ansatz for generator components.
///
/// Point components range over `x_basis × {1, y, …, y^y_degree}`; evolutionary
/// components over `evo_x_basis × {jet monomials of total degree ≤ jet_degree
/// in y, …, y^(jet_order)}`. An explicit `monomials` list overrides both.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnsatzSpec {
    pub x_basis: Vec<CanonExpr>,
    pub y_degree: u32,
    pub evo_x_basis: Vec<CanonExpr>,
    pub jet_degree: u32,
    /// Highest jet order in evolutionary components; `None` means `n − 1`.
    pub jet_order: Option<u32>,
    pub monomials: Option<Vec<CanonExpr>>,
}

fn trig_basis() -> Vec<CanonExpr> {
    vec![
        CanonExpr::one(),
        CanonExpr::sin(1),
        CanonExpr::cos(1),
        CanonExpr::sin(2),
        CanonExpr::cos(2),
    ]
}

impl Default for AnsatzSpec {
    /// `{1, x, sin x, cos x, sin 2x, cos 2x}` with y-degree ≤ 2 for point
    /// components; `{1, x} × {1, sin x, cos x, sin 2x, cos 2x}` with total
    /// degree ≤ 3 for evolutionary components.
    fn default() -> Self {
        let x_basis = vec![
            CanonExpr::one(),
            CanonExpr::x(),
            CanonExpr::sin(1),
            CanonExpr::cos(1),
            CanonExpr::sin(2),
            CanonExpr::cos(2),
        ];
        let evo_x_basis = [CanonExpr::one(), CanonExpr::x()]
            .iter()
            .flat_map(|p| {
                trig_basis()
                    .into_iter()
                    .map(move |t| p.mul(&t).expect("unknown-free"))
            })
            .collect();
        AnsatzSpec {
            x_basis,
            y_degree: 2,
            evo_x_basis,
            jet_degree: 3,
            jet_order: None,
            monomials: None,
        }
    }
}

impl AnsatzSpec {
    pub fn empty() -> Self {
        AnsatzSpec {
            x_basis: Vec::new(),
            y_degree: 0,
            evo_x_basis: Vec::new(),
            jet_degree: 0,
            jet_order: None,
            monomials: Some(Vec::new()),
        }
    }

    /// Ansatz spanned by exactly the given expressions.
    pub fn explicit(monomials: Vec<CanonExpr>) -> Self {
        AnsatzSpec {
            monomials: Some(monomials),
            ..AnsatzSpec::default()
        }
    }

    pub fn with_x_basis(mut self, basis: Vec<CanonExpr>) -> Self {
        self.x_basis = basis;
        self
    }

    /// Candidate terms for point components (x and y only).
    pub fn point_terms(&self) -> Vec<CanonExpr> {
        if let Some(m) = &self.monomials {
            return m
                .iter()
                .filter(|e| e.max_jet_order().unwrap_or(0) == 0)
                .cloned()
                .collect();
        }
        let mut out = Vec::new();
        for d in 0..=self.y_degree {
            let yd = CanonExpr::monomial(Monomial::jet_power(0, d));
            for b in &self.x_basis {
                out.push(b.mul(&yd).expect("unknown-free basis"));
            }
        }
        dedup(out)
    }

    /// Candidate terms for evolutionary components of an order-`n` equation.
    pub fn evolutionary_terms(&self, ode_order: u32) -> Vec<CanonExpr> {
        let top = self.jet_order.unwrap_or(ode_order.saturating_sub(1));
        if let Some(m) = &self.monomials {
            return m
                .iter()
                .filter(|e| e.max_jet_order().unwrap_or(0) <= top)
                .cloned()
                .collect();
        }
        let mut jets = Vec::new();
        jet_monomials(0, top, self.jet_degree, Monomial::one(), &mut jets);
        jets.sort();
        let mut out = Vec::new();
        for j in jets {
            let jm = CanonExpr::monomial(j);
            for b in &self.evo_x_basis {
                out.push(b.mul(&jm).expect("unknown-free basis"));
            }
        }
        dedup(out)
    }
}

fn jet_monomials(order: u32, top: u32, budget: u32, acc: Monomial, out: &mut Vec<Monomial>) {
    if order > top {
        out.push(acc);
        return;
    }
    for e in 0..=budget {
        let mut m = acc.clone();
        if e > 0 {
            m.jet.insert(order, e);
        }
        jet_monomials(order + 1, top, budget - e, m, out);
    }
}

fn dedup(v: Vec<CanonExpr>) -> Vec<CanonExpr> {
    let mut out: Vec<CanonExpr> = Vec::with_capacity(v.len());
    for e in v {
        if !e.is_zero() && !out.contains(&e) {
            out.push(e);
        }
    }
    out
}

/// `Σ prefix_i · terms[i]` with fresh unknowns `prefix0, prefix1, …`.
pub fn instantiate(terms: &[CanonExpr], prefix: &str) -> (CanonExpr, Vec<UnknownSym>) {
    let mut expr = CanonExpr::zero();
    let mut syms = Vec::with_capacity(terms.len());
    for (i, t) in terms.iter().enumerate() {
        let s = UnknownSym::new(format!("{prefix}{i}"));
        expr = expr.add(&t.times_unknown(&s).expect("ansatz terms are unknown-free"));
        syms.push(s);
    }
    (expr, syms)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_sizes() {
        let a = AnsatzSpec::default();
        assert_eq!(a.point_terms().len(), 18);
        // 10 x-functions × 10 monomials in (y, y') of degree ≤ 3
        assert_eq!(a.evolutionary_terms(2).len(), 100);
        assert!(AnsatzSpec::empty().point_terms().is_empty());
    }

    #[test]
    fn instantiate_names_unknowns() {
        let (e, syms) = instantiate(&[CanonExpr::one(), CanonExpr::y()], "q");
        assert_eq!(syms.len(), 2);
        assert_eq!(e.to_string(), "(q0) + (q1)*y");
    }
}
