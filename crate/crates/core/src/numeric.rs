use num_complex::Complex64 as C64;

/// Neumaier-compensated accumulator for a single real sum.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct Compensated {
    sum: f64,
    comp: f64,
}

impl Compensated {
    #[inline]
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub(crate) fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Compensated accumulator for complex sums.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct CompensatedC {
    re: Compensated,
    im: Compensated,
}

impl CompensatedC {
    #[inline]
    pub(crate) fn add(&mut self, z: C64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    #[inline]
    pub(crate) fn value(&self) -> C64 {
        C64::new(self.re.value(), self.im.value())
    }
}

pub(crate) fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, j| acc * j as f64)
}

pub(crate) fn ln_factorial(n: usize) -> f64 {
    (1..=n).map(|j| (j as f64).ln()).sum()
}

/// Ordinary least squares for `y ≈ X b`; returns coefficients and R².
pub(crate) fn least_squares(rows: &[Vec<f64>], y: &[f64]) -> Option<(Vec<f64>, f64)> {
    let p = rows.first()?.len();
    let n = rows.len();
    if n < p {
        return None;
    }
    let x = nalgebra::DMatrix::from_fn(n, p, |i, j| rows[i][j]);
    let yv = nalgebra::DVector::from_column_slice(y);
    let svd = x.clone().svd(true, true);
    let b = svd.solve(&yv, 1e-14).ok()?;
    let fitted = &x * &b;
    let mean = y.iter().sum::<f64>() / n as f64;
    let ss_tot: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    let ss_res: f64 = y
        .iter()
        .zip(fitted.iter())
        .map(|(a, b)| (a - b).powi(2))
        .sum();
    let r2 = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    Some((b.iter().copied().collect(), r2))
}
