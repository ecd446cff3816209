use std::collections::BTreeMap;

use num_complex::Complex64 as C64;

use crate::numeric::factorial;

/// Exponent vector of a monomial `y^m = Π_j y_j^{m_j}`.
pub type MultiIndex = Vec<u32>;

/// Vector-valued polynomial in `nvars` complex variables, stored sparsely.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiPoly {
    nvars: usize,
    dim_out: usize,
    terms: BTreeMap<MultiIndex, Vec<C64>>,
}

fn is_zero(v: &[C64]) -> bool {
    v.iter().all(|z| z.re == 0.0 && z.im == 0.0)
}

fn degree_of(m: &[u32]) -> usize {
    m.iter().map(|&x| x as usize).sum()
}

/// All multi-indices in `nvars` variables with total degree `≤ max_degree`,
/// graded then lexicographic.
pub(crate) fn multi_indices(nvars: usize, max_degree: usize) -> Vec<MultiIndex> {
    fn rec(prefix: &mut Vec<u32>, left: usize, remaining: u32, out: &mut Vec<MultiIndex>) {
        if left == 0 {
            out.push(prefix.clone());
            return;
        }
        for e in 0..=remaining {
            prefix.push(e);
            rec(prefix, left - 1, remaining - e, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), nvars, max_degree as u32, &mut out);
    out.sort_by(|a, b| degree_of(a).cmp(&degree_of(b)).then(a.cmp(b)));
    out
}

impl MultiPoly {
    pub fn zero(nvars: usize, dim_out: usize) -> Self {
        MultiPoly {
            nvars,
            dim_out,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, value: Vec<C64>) -> Self {
        let mut p = Self::zero(nvars, value.len());
        p.add_term(vec![0; nvars], value);
        p
    }

    pub fn from_terms(
        nvars: usize,
        dim_out: usize,
        terms: impl IntoIterator<Item = (MultiIndex, Vec<C64>)>,
    ) -> Self {
        let mut p = Self::zero(nvars, dim_out);
        for (m, v) in terms {
            assert_eq!(m.len(), nvars, "multi-index length");
            assert_eq!(v.len(), dim_out, "coefficient length");
            p.add_term(m, v);
        }
        p
    }

    /// Scalar Taylor polynomial of `exp(κ·y)` through `degree`.
    pub fn exp_linear(kappa: &[C64], degree: usize) -> Self {
        let mut p = Self::zero(kappa.len(), 1);
        for m in multi_indices(kappa.len(), degree) {
            let mut c = C64::new(1.0, 0.0);
            for (j, &e) in m.iter().enumerate() {
                c *= kappa[j].powu(e) / factorial(e as usize);
            }
            p.add_term(m, vec![c]);
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &[C64])> {
        self.terms.iter().map(|(m, v)| (m, v.as_slice()))
    }

    pub fn coeff(&self, m: &[u32]) -> Option<&[C64]> {
        self.terms.get(m).map(|v| v.as_slice())
    }

    pub fn degree(&self) -> usize {
        self.terms.keys().map(|m| degree_of(m)).max().unwrap_or(0)
    }

    /// Terms of total degree exactly `s`.
    pub fn homogeneous(&self, s: usize) -> impl Iterator<Item = (&MultiIndex, &[C64])> {
        self.terms
            .iter()
            .filter(move |(m, _)| degree_of(m) == s)
            .map(|(m, v)| (m, v.as_slice()))
    }

    pub fn has_degree(&self, s: usize) -> bool {
        self.homogeneous(s).next().is_some()
    }

    fn add_term(&mut self, m: MultiIndex, v: Vec<C64>) {
        let slot = self
            .terms
            .entry(m.clone())
            .or_insert_with(|| vec![C64::new(0.0, 0.0); v.len()]);
        for (a, b) in slot.iter_mut().zip(&v) {
            *a += b;
        }
        if is_zero(slot) {
            self.terms.remove(&m);
        }
    }

    pub fn add(&self, other: &MultiPoly) -> MultiPoly {
        assert_eq!(self.nvars, other.nvars);
        assert_eq!(self.dim_out, other.dim_out);
        let mut p = self.clone();
        for (m, v) in &other.terms {
            p.add_term(m.clone(), v.clone());
        }
        p
    }

    pub fn scale(&self, c: C64) -> MultiPoly {
        let mut p = Self::zero(self.nvars, self.dim_out);
        for (m, v) in &self.terms {
            p.add_term(m.clone(), v.iter().map(|z| z * c).collect());
        }
        p
    }

    /// Scalar polynomial times a constant vector.
    pub fn scale_vec(&self, v: &[C64]) -> MultiPoly {
        assert_eq!(self.dim_out, 1);
        let mut p = Self::zero(self.nvars, v.len());
        for (m, c) in &self.terms {
            p.add_term(m.clone(), v.iter().map(|z| z * c[0]).collect());
        }
        p
    }

    /// Product truncated at `max_degree`. A scalar factor broadcasts.
    pub fn mul(&self, other: &MultiPoly, max_degree: usize) -> MultiPoly {
        assert_eq!(self.nvars, other.nvars);
        let dim = match (self.dim_out, other.dim_out) {
            (a, b) if a == b => a,
            (1, b) => b,
            (a, 1) => a,
            (a, b) => panic!("incompatible output dimensions {a} and {b}"),
        };
        let mut p = Self::zero(self.nvars, dim);
        for (ma, va) in &self.terms {
            for (mb, vb) in &other.terms {
                let m: MultiIndex = ma.iter().zip(mb).map(|(a, b)| a + b).collect();
                if degree_of(&m) > max_degree {
                    continue;
                }
                let v: Vec<C64> = (0..dim)
                    .map(|j| {
                        let a = if va.len() == 1 { va[0] } else { va[j] };
                        let b = if vb.len() == 1 { vb[0] } else { vb[j] };
                        a * b
                    })
                    .collect();
                p.add_term(m, v);
            }
        }
        p
    }

    /// Re-express in `nvars_total` variables, this polynomial's variables
    /// occupying slots `offset..offset+nvars`.
    pub fn embed(&self, nvars_total: usize, offset: usize) -> MultiPoly {
        assert!(offset + self.nvars <= nvars_total);
        let mut p = Self::zero(nvars_total, self.dim_out);
        for (m, v) in &self.terms {
            let mut e = vec![0; nvars_total];
            e[offset..offset + self.nvars].copy_from_slice(m);
            p.add_term(e, v.clone());
        }
        p
    }

    /// `∂/∂y_j`.
    pub fn derivative(&self, j: usize) -> MultiPoly {
        let mut p = Self::zero(self.nvars, self.dim_out);
        for (m, v) in &self.terms {
            if m[j] == 0 {
                continue;
            }
            let f = m[j] as f64;
            let mut e = m.clone();
            e[j] -= 1;
            p.add_term(e, v.iter().map(|z| z * f).collect());
        }
        p
    }

    /// Stack scalar polynomials into a vector-valued one.
    pub fn stack(parts: &[MultiPoly]) -> MultiPoly {
        let nvars = parts[0].nvars;
        let dim = parts.len();
        let mut p = Self::zero(nvars, dim);
        for (j, part) in parts.iter().enumerate() {
            assert_eq!(part.dim_out, 1);
            for (m, v) in &part.terms {
                let mut e = vec![C64::new(0.0, 0.0); dim];
                e[j] = v[0];
                p.add_term(m.clone(), e);
            }
        }
        p
    }

    /// Scalar polynomial holding output component `j`.
    pub fn component(&self, j: usize) -> MultiPoly {
        let mut p = Self::zero(self.nvars, 1);
        for (m, v) in &self.terms {
            p.add_term(m.clone(), vec![v[j]]);
        }
        p
    }

    pub fn truncated(&self, max_degree: usize) -> MultiPoly {
        let mut p = self.clone();
        p.terms.retain(|m, _| degree_of(m) <= max_degree);
        p
    }

    pub fn conj(&self) -> MultiPoly {
        let mut p = self.clone();
        for v in p.terms.values_mut() {
            for z in v.iter_mut() {
                *z = z.conj();
            }
        }
        p
    }

    /// Pointwise evaluation.
    pub fn eval(&self, y: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.dim_out];
        for (m, v) in &self.terms {
            let mut mono = C64::new(1.0, 0.0);
            for (yj, &e) in y.iter().zip(m) {
                mono *= yj.powu(e);
            }
            for (o, c) in out.iter_mut().zip(v) {
                *o += c * mono;
            }
        }
        out
    }

    /// Largest coefficient difference against another polynomial.
    pub fn max_difference(&self, other: &MultiPoly) -> f64 {
        let mut worst: f64 = 0.0;
        for (m, v) in &self.terms {
            match other.terms.get(m) {
                Some(w) => {
                    for (a, b) in v.iter().zip(w) {
                        worst = worst.max((a - b).norm());
                    }
                }
                None => worst = worst.max(v.iter().map(|z| z.norm()).fold(0.0, f64::max)),
            }
        }
        for (m, w) in &other.terms {
            if !self.terms.contains_key(m) {
                worst = worst.max(w.iter().map(|z| z.norm()).fold(0.0, f64::max));
            }
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multi_indices_are_graded() {
        let m = multi_indices(2, 2);
        assert_eq!(
            m,
            vec![
                vec![0, 0],
                vec![0, 1],
                vec![1, 0],
                vec![0, 2],
                vec![1, 1],
                vec![2, 0]
            ]
        );
    }

    #[test]
    fn exp_linear_matches_pointwise_exp() {
        let kappa = [C64::new(0.0, 1.0), C64::new(0.5, 0.0)];
        let p = MultiPoly::exp_linear(&kappa, 20);
        let y = [C64::new(0.1, 0.0), C64::new(-0.2, 0.0)];
        let exact = (kappa[0] * y[0] + kappa[1] * y[1]).exp();
        assert!((p.eval(&y)[0] - exact).norm() < 1e-15);
    }

    #[test]
    fn derivative_and_product() {
        // (1 + y)^2 = 1 + 2y + y^2
        let p = MultiPoly::from_terms(
            1,
            1,
            vec![(vec![0], vec![C64::new(1.0, 0.0)]), (vec![1], vec![C64::new(1.0, 0.0)])],
        );
        let sq = p.mul(&p, 5);
        assert_eq!(sq.coeff(&[1]).unwrap()[0], C64::new(2.0, 0.0));
        let d = sq.derivative(0);
        assert_eq!(d.coeff(&[0]).unwrap()[0], C64::new(2.0, 0.0));
        assert_eq!(d.coeff(&[1]).unwrap()[0], C64::new(2.0, 0.0));
        assert_eq!(sq.mul(&p, 2).degree(), 2);
    }
}
