//! Laurent polynomials in time used by the sweep.
//!
//! A single view contributes `a·t² + b·t + c + d/t + e/t²`; the product over
//! three views has thirteen terms, `Σ a_k t^k + c + Σ d_k t^-k` for
//! `k = 1..=6`.

use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

/// `a·t² + b·t + c + d/t + e/t²`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ViewPoly {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
}

impl ViewPoly {
    pub const ZERO: ViewPoly = ViewPoly {
        a: 0.0,
        b: 0.0,
        c: 0.0,
        d: 0.0,
        e: 0.0,
    };

    pub fn constant(c: f64) -> Self {
        ViewPoly { c, ..Self::ZERO }
    }

    /// Coefficients ordered by power, `t^-2` first.
    #[inline]
    pub fn by_power(&self) -> [f64; 5] {
        [self.e, self.d, self.c, self.b, self.a]
    }

    #[inline]
    pub fn from_powers(p: [f64; 5]) -> Self {
        ViewPoly {
            e: p[0],
            d: p[1],
            c: p[2],
            b: p[3],
            a: p[4],
        }
    }

    /// Adds `coef·t^power` for `power` in `-2..=2`.
    #[inline]
    pub(crate) fn add_term(&mut self, power: i32, coef: f64) {
        match power {
            2 => self.a += coef,
            1 => self.b += coef,
            0 => self.c += coef,
            -1 => self.d += coef,
            -2 => self.e += coef,
            _ => unreachable!("view polynomial power {power} out of range"),
        }
    }

    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        let r = 1.0 / t;
        (self.a * t + self.b) * t + self.c + (self.d + self.e * r) * r
    }

    pub fn is_zero(&self) -> bool {
        self.by_power().iter().all(|&c| c == 0.0)
    }
}

impl Sub for ViewPoly {
    type Output = ViewPoly;
    fn sub(self, o: ViewPoly) -> ViewPoly {
        let (x, y) = (self.by_power(), o.by_power());
        ViewPoly::from_powers(std::array::from_fn(|i| x[i] - y[i]))
    }
}

/// `Σ_{k=1..6} a_k t^k + c + Σ_{k=1..6} d_k t^-k`, stored by power from
/// `t^-6` (index 0) to `t^6` (index 12).
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct GeneralFormPoly(pub [f64; 13]);

impl GeneralFormPoly {
    pub const ZERO: GeneralFormPoly = GeneralFormPoly([0.0; 13]);

    pub fn constant(c: f64) -> Self {
        let mut p = Self::ZERO;
        p.0[6] = c;
        p
    }

    /// Coefficient of `t^k`, `k` in `1..=6`.
    pub fn a(&self, k: usize) -> f64 {
        self.0[6 + k]
    }

    /// Constant term.
    pub fn c(&self) -> f64 {
        self.0[6]
    }

    /// Coefficient of `t^-k`, `k` in `1..=6`.
    pub fn d(&self, k: usize) -> f64 {
        self.0[6 - k]
    }

    /// Coefficient of `t^power`, `power` in `-6..=6`.
    pub fn coef(&self, power: i32) -> f64 {
        self.0[(power + 6) as usize]
    }

    /// Exact product of three view polynomials.
    pub fn product3(x: &ViewPoly, y: &ViewPoly, z: &ViewPoly) -> Self {
        let (x, y, z) = (x.by_power(), y.by_power(), z.by_power());
        let mut xy = [0.0; 9];
        for (i, &xi) in x.iter().enumerate() {
            if xi == 0.0 {
                continue;
            }
            for (j, &yj) in y.iter().enumerate() {
                xy[i + j] += xi * yj;
            }
        }
        let mut out = [0.0; 13];
        for (i, &v) in xy.iter().enumerate() {
            if v == 0.0 {
                continue;
            }
            for (j, &zj) in z.iter().enumerate() {
                out[i + j] += v * zj;
            }
        }
        GeneralFormPoly(out)
    }

    pub fn eval(&self, t: f64) -> f64 {
        let c = &self.0;
        let mut pos = 0.0;
        for k in (7..13).rev() {
            pos = (pos + c[k]) * t;
        }
        let r = 1.0 / t;
        let mut neg = 0.0;
        for &ck in &c[0..6] {
            neg = (neg + ck) * r;
        }
        pos + c[6] + neg
    }

    /// Numerator of the derivative after multiplying through by `t^7`:
    /// a degree-12 polynomial with coefficients indexed by power.
    pub fn derivative_numerator(&self) -> [f64; 13] {
        let mut n = [0.0; 13];
        for k in 1..=6 {
            n[k + 6] = k as f64 * self.a(k);
            n[6 - k] = -(k as f64) * self.d(k);
        }
        n
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0.0)
    }
}

/// Horner evaluation of an ordinary polynomial with coefficients by power.
pub fn horner(coeffs: &[f64], t: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c)
}

impl Add for GeneralFormPoly {
    type Output = Self;
    fn add(mut self, o: Self) -> Self {
        self += o;
        self
    }
}

impl Sub for GeneralFormPoly {
    type Output = Self;
    fn sub(mut self, o: Self) -> Self {
        self -= o;
        self
    }
}

impl AddAssign for GeneralFormPoly {
    fn add_assign(&mut self, o: Self) {
        for (a, b) in self.0.iter_mut().zip(o.0) {
            *a += b;
        }
    }
}

impl SubAssign for GeneralFormPoly {
    fn sub_assign(&mut self, o: Self) {
        for (a, b) in self.0.iter_mut().zip(o.0) {
            *a -= b;
        }
    }
}

impl Neg for GeneralFormPoly {
    type Output = Self;
    fn neg(self) -> Self {
        GeneralFormPoly(self.0.map(|c| -c))
    }
}

impl Mul<f64> for GeneralFormPoly {
    type Output = Self;
    fn mul(self, k: f64) -> Self {
        GeneralFormPoly(self.0.map(|c| c * k))
    }
}

/// Running sum of general-form polynomials with per-coefficient error
/// compensation, so long add/remove sequences do not drift.
#[derive(Debug, Clone, Default)]
pub struct PolyAccumulator {
    sum: [f64; 13],
    comp: [f64; 13],
}

impl PolyAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, p: &GeneralFormPoly) {
        for i in 0..13 {
            let x = p.0[i];
            let s = self.sum[i] + x;
            if self.sum[i].abs() >= x.abs() {
                self.comp[i] += (self.sum[i] - s) + x;
            } else {
                self.comp[i] += (x - s) + self.sum[i];
            }
            self.sum[i] = s;
        }
    }

    pub fn sub(&mut self, p: &GeneralFormPoly) {
        self.add(&-*p);
    }

    pub fn value(&self) -> GeneralFormPoly {
        GeneralFormPoly(std::array::from_fn(|i| self.sum[i] + self.comp[i]))
    }
}
