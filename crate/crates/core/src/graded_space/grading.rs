use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Truncation parameters of a graded space of real trigonometric
/// polynomials on `[0, 2π)`.
///
/// Elements carry Fourier modes up to degree `K`; the norm family is
/// `‖·‖_0 ..= ‖·‖_N`; sups are taken over `M = q·(2K+1)` equispaced grid
/// points. The sine/cosine tables for the grid are computed once here and
/// shared by every element through an [`Arc`].
pub struct GradingSpec<T> {
    degree: usize,
    max_level: usize,
    oversampling: usize,
    grid_len: usize,
    // row-major, `grid_len × degree`, entry (i, k-1) = cos(k θ_i)
    cos_table: Vec<T>,
    sin_table: Vec<T>,
    thetas: Vec<T>,
}

impl<T: Scalar> GradingSpec<T> {
    pub const MIN_OVERSAMPLING: usize = 4;

    pub fn new(degree: usize, max_level: usize, oversampling: usize) -> Result<Arc<Self>> {
        if degree < 1 {
            return Err(Error::InvalidGrading(format!("K must be >= 1, got {degree}")));
        }
        if oversampling < Self::MIN_OVERSAMPLING {
            return Err(Error::InvalidGrading(format!("q must be >= {}, got {oversampling}", Self::MIN_OVERSAMPLING)));
        }
        let grid_len = oversampling * (2 * degree + 1);
        let mut cos_table = Vec::with_capacity(grid_len * degree);
        let mut sin_table = Vec::with_capacity(grid_len * degree);
        let mut thetas = Vec::with_capacity(grid_len);
        for i in 0..grid_len {
            thetas.push(T::lit(std::f64::consts::TAU * i as f64 / grid_len as f64));
            for k in 1..=degree {
                // Reduce k·i modulo M so the angle stays in [0, 2π) and the
                // table is exactly periodic.
                let phase = std::f64::consts::TAU * ((k * i) % grid_len) as f64 / grid_len as f64;
                cos_table.push(T::lit(phase.cos()));
                sin_table.push(T::lit(phase.sin()));
            }
        }
        Ok(Arc::new(Self { degree, max_level, oversampling, grid_len, cos_table, sin_table, thetas }))
    }

    /// Max Fourier degree `K`.
    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Max norm level `N`.
    pub fn max_level(&self) -> usize {
        self.max_level
    }

    /// Number of norm levels, `N + 1`.
    pub fn level_count(&self) -> usize {
        self.max_level + 1
    }

    pub fn oversampling(&self) -> usize {
        self.oversampling
    }

    /// Number of grid points `M = q·(2K+1)`.
    pub fn grid_len(&self) -> usize {
        self.grid_len
    }

    /// Number of real coefficients, `2K+1`.
    pub fn coeff_len(&self) -> usize {
        2 * self.degree + 1
    }

    pub fn thetas(&self) -> &[T] {
        &self.thetas
    }

    pub fn check_level(&self, level: usize) -> Result<()> {
        if level > self.max_level {
            Err(Error::LevelRange { level, max: self.max_level })
        } else {
            Ok(())
        }
    }

    /// Same truncation parameters (the tables are then identical too).
    pub fn same_as(&self, other: &Self) -> bool {
        std::ptr::eq(self, other)
            || (self.degree == other.degree
                && self.max_level == other.max_level
                && self.oversampling == other.oversampling)
    }

    pub fn label(&self) -> String {
        format!("K={} N={} q={}", self.degree, self.max_level, self.oversampling)
    }

    fn table_row(&self, i: usize) -> (&[T], &[T]) {
        let k = self.degree;
        (&self.cos_table[i * k..(i + 1) * k], &self.sin_table[i * k..(i + 1) * k])
    }

    /// `M/2` when the grid is symmetric under `θ ↦ θ + π`. Mode `m` picks up
    /// a factor `(−1)^m` under that shift, so the first half of the grid
    /// determines the second.
    fn half_grid(&self) -> Option<usize> {
        self.grid_len.is_multiple_of(2).then_some(self.grid_len / 2)
    }

    /// Values on the grid of the polynomial with coefficients
    /// `[a_0, a_1..a_K, b_1..b_K]`.
    pub(crate) fn synthesize(&self, coeffs: &[T]) -> Vec<T> {
        let k = self.degree;
        let (a, b) = (&coeffs[1..=k], &coeffs[k + 1..]);
        let half = self.half_grid();
        let mut out = vec![T::zero(); self.grid_len];
        for i in 0..half.unwrap_or(self.grid_len) {
            let (c, s) = self.table_row(i);
            // Index m holds mode m + 1.
            let (mut odd, mut even) = (T::zero(), T::zero());
            for m in (0..k).step_by(2) {
                odd = odd + a[m] * c[m] + b[m] * s[m];
            }
            for m in (1..k).step_by(2) {
                even = even + a[m] * c[m] + b[m] * s[m];
            }
            out[i] = coeffs[0] + even + odd;
            if let Some(h) = half {
                out[i + h] = coeffs[0] + even - odd;
            }
        }
        out
    }

    /// `max_grid |x^{(j)}|` for `j = 0..=n`, all derivatives synthesized in
    /// the same sweep.
    pub(crate) fn derivative_sups(&self, coeffs: &[T], n: usize) -> Vec<T> {
        let k = self.degree;
        let (a, b) = (&coeffs[1..=k], &coeffs[k + 1..]);
        // powers[j * k + m] = (m + 1)^j
        let mut powers = vec![T::one(); (n + 1) * k];
        for j in 1..=n {
            for m in 0..k {
                powers[j * k + m] = powers[(j - 1) * k + m] * T::from_usize_lossy(m + 1);
            }
        }
        let half = self.half_grid();
        let mut sups = vec![T::zero(); n + 1];
        let (mut p, mut q) = (vec![T::zero(); k], vec![T::zero(); k]);
        for i in 0..half.unwrap_or(self.grid_len) {
            let (c, s) = self.table_row(i);
            for m in 0..k {
                p[m] = a[m] * c[m] + b[m] * s[m];
                // d/dθ maps (a cos + b sin) to m·(b cos − a sin).
                q[m] = b[m] * c[m] - a[m] * s[m];
            }
            for (j, sup) in sups.iter_mut().enumerate() {
                let row = &powers[j * k..(j + 1) * k];
                let terms = if j % 2 == 0 { &p } else { &q };
                let (mut odd, mut even) = (T::zero(), T::zero());
                for m in (0..k).step_by(2) {
                    odd = odd + row[m] * terms[m];
                }
                for m in (1..k).step_by(2) {
                    even = even + row[m] * terms[m];
                }
                let (base, sign) = match j {
                    0 => (coeffs[0], T::one()),
                    _ if j % 4 < 2 => (T::zero(), T::one()),
                    _ => (T::zero(), -T::one()),
                };
                *sup = sup.max((base + sign * (even + odd)).abs());
                if half.is_some() {
                    *sup = sup.max((base + sign * (even - odd)).abs());
                }
            }
        }
        sups
    }

    /// Discrete Fourier projection of grid values onto degree `K`.
    ///
    /// Exact for trigonometric polynomials of degree below `M/2`, which
    /// covers products of two degree-`K` elements since `q >= 4`.
    pub(crate) fn analyze(&self, values: &[T]) -> Vec<T> {
        debug_assert_eq!(values.len(), self.grid_len);
        let k = self.degree;
        let half = self.half_grid();
        let mut out = vec![T::zero(); 2 * k + 1];
        let mut mean = T::zero();
        for i in 0..half.unwrap_or(self.grid_len) {
            // Folded samples for even and odd modes.
            let (even, odd) = match half {
                Some(h) => (values[i] + values[i + h], values[i] - values[i + h]),
                None => (values[i], values[i]),
            };
            mean = mean + even;
            let (c, s) = self.table_row(i);
            for m in 0..k {
                let g = if m % 2 == 0 { odd } else { even };
                out[1 + m] = out[1 + m] + g * c[m];
                out[1 + k + m] = out[1 + k + m] + g * s[m];
            }
        }
        let m_len = T::from_usize_lossy(self.grid_len);
        let two_over = T::lit(2.0) / m_len;
        out[0] = mean / m_len;
        for v in out.iter_mut().skip(1) {
            *v = *v * two_over;
        }
        out
    }
}

impl<T> fmt::Debug for GradingSpec<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GradingSpec")
            .field("K", &self.degree)
            .field("N", &self.max_level)
            .field("q", &self.oversampling)
            .field("M", &self.grid_len)
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_size_is_oversampled() {
        let spec = GradingSpec::<f64>::new(16, 4, 4).unwrap();
        assert_eq!(spec.grid_len(), 4 * 33);
        assert_eq!(spec.coeff_len(), 33);
        assert_eq!(spec.level_count(), 5);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(GradingSpec::<f64>::new(0, 2, 4).is_err());
        assert!(GradingSpec::<f64>::new(3, 2, 3).is_err());
    }

    #[test]
    fn synthesis_and_analysis_invert() {
        let spec = GradingSpec::<f64>::new(5, 1, 4).unwrap();
        let coeffs: Vec<f64> = (0..11).map(|i| (i as f64 * 0.37).sin()).collect();
        let back = spec.analyze(&spec.synthesize(&coeffs));
        for (x, y) in coeffs.iter().zip(&back) {
            assert!((x - y).abs() < 1e-14);
        }
    }

    #[test]
    fn folded_and_plain_grids_agree_with_pointwise_sums() {
        // q = 4 gives an even grid (folded sweep), q = 5 an odd one.
        for q in [4, 5] {
            let spec = GradingSpec::<f64>::new(6, 3, q).unwrap();
            let coeffs: Vec<f64> = (0..13).map(|i| (i as f64 * 0.61 + 0.2).cos()).collect();
            let direct = |theta: f64, j: u32| -> f64 {
                // j-th derivative of a_m cos mθ + b_m sin mθ, summed by hand
                let mut v = if j == 0 { coeffs[0] } else { 0.0 };
                for m in 1..=6 {
                    let (a, b, w) = (coeffs[m], coeffs[6 + m], m as f64);
                    let shift = j as f64 * std::f64::consts::FRAC_PI_2;
                    v += w.powi(j as i32) * (a * (w * theta + shift).cos() + b * (w * theta + shift).sin());
                }
                v
            };
            let grid = spec.synthesize(&coeffs);
            for (i, &theta) in spec.thetas().iter().enumerate() {
                assert!((grid[i] - direct(theta, 0)).abs() < 1e-13);
            }
            let sups = spec.derivative_sups(&coeffs, 3);
            for (j, &sup) in sups.iter().enumerate() {
                let want = spec.thetas().iter().fold(0.0f64, |m, &t| m.max(direct(t, j as u32).abs()));
                assert!((sup - want).abs() < 1e-11 * want.max(1.0), "q={q} level {j}");
            }
            let back = spec.analyze(&grid);
            for (x, y) in coeffs.iter().zip(&back) {
                assert!((x - y).abs() < 1e-14);
            }
        }
    }
}
