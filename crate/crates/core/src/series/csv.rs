use std::fmt::Write as _;

use num_complex::Complex64 as C64;

use super::{FTSeries, Mode, SeriesError};

impl FTSeries {
    /// CSV with header `k,nu_1..nu_d,re_1..re_n,im_1..im_n`, rows in key order.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k");
        for i in 1..=self.dim_d {
            let _ = write!(out, ",nu_{i}");
        }
        for i in 1..=self.dim_n {
            let _ = write!(out, ",re_{i}");
        }
        for i in 1..=self.dim_n {
            let _ = write!(out, ",im_{i}");
        }
        out.push('\n');
        for (k, nu, v) in self.iter() {
            let _ = write!(out, "{k}");
            for x in &nu.0 {
                let _ = write!(out, ",{x}");
            }
            for z in v {
                let _ = write!(out, ",{:e}", z.re);
            }
            for z in v {
                let _ = write!(out, ",{:e}", z.im);
            }
            out.push('\n');
        }
        out
    }

    /// Inverse of [`FTSeries::to_csv`]; the truncation order is the largest
    /// `k` present unless `max_order` is given.
    pub fn from_csv(text: &str, max_order: Option<usize>) -> Result<FTSeries, SeriesError> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or(SeriesError::Csv {
            line: 1,
            reason: "empty input".into(),
        })?;
        let cols: Vec<&str> = header.split(',').collect();
        let d = cols.iter().filter(|c| c.starts_with("nu_")).count();
        let n = cols.iter().filter(|c| c.starts_with("re_")).count();
        if cols.first() != Some(&"k") || cols.len() != 1 + d + 2 * n || n == 0 {
            return Err(SeriesError::Csv {
                line: 1,
                reason: format!("unexpected header {header:?}"),
            });
        }
        let mut rows = Vec::new();
        for (i, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let bad = |reason: String| SeriesError::Csv { line: i + 1, reason };
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != cols.len() {
                return Err(bad(format!("expected {} fields, found {}", cols.len(), f.len())));
            }
            let k: usize = f[0].parse().map_err(|e| bad(format!("order: {e}")))?;
            let nu = f[1..=d]
                .iter()
                .map(|s| s.parse::<i32>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| bad(format!("momentum: {e}")))?;
            let nums = f[1 + d..]
                .iter()
                .map(|s| s.parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| bad(format!("value: {e}")))?;
            let v: Vec<C64> = (0..n).map(|j| C64::new(nums[j], nums[n + j])).collect();
            rows.push((k, Mode(nu), v));
        }
        let kmax = max_order.unwrap_or_else(|| rows.iter().map(|r| r.0).max().unwrap_or(0));
        let mut s = FTSeries::zero(d, n, kmax);
        for (k, nu, v) in rows {
            s.set(k, nu, v)?;
        }
        Ok(s)
    }
}
