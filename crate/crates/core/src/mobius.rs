//! Möbius and anti-Möbius maps as 2×2 complex matrices.
//!
//! Every image point appearing in the Green's function series is `W(x)` for a
//! composition `W` of circle inversions. Such a `W` is `z ↦ N(z)` or `z ↦ N(z̄)`
//! with `N` a Möbius matrix, so `log|W(x) - y|` and all of its derivatives
//! have closed forms. Keeping the matrix (instead of iterating points) makes
//! derivatives of the deep image terms exact and cheap.

use num_complex::Complex64 as C;

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct ImageMap {
    a: C,
    b: C,
    c: C,
    d: C,
    /// `ad - bc`, tracked multiplicatively so it stays accurate when the
    /// matrix is close to singular after normalization.
    det: C,
    /// Whether the map acts on `z̄`.
    conj: bool,
}

impl ImageMap {
    pub fn identity() -> Self {
        let one = C::new(1.0, 0.0);
        let zero = C::new(0.0, 0.0);
        Self { a: one, b: zero, c: zero, d: one, det: one, conj: false }
    }

    /// Reflection across `|z - center| = r`, `z ↦ center + r² / conj(z - center)`.
    /// Left unnormalized so the fused kernel sees `v = z̄ - c̄` exactly.
    pub fn inversion(center: C, r: f64) -> Self {
        Self {
            a: center,
            b: C::new(r * r - center.norm_sqr(), 0.0),
            c: C::new(1.0, 0.0),
            d: -center.conj(),
            det: C::new(-r * r, 0.0),
            conj: true,
        }
    }

    /// `self ∘ inner`, rescaled so the largest entry has unit modulus.
    pub fn compose(&self, inner: &ImageMap) -> Self {
        let (ia, ib, ic, id, idet) = if self.conj {
            (inner.a.conj(), inner.b.conj(), inner.c.conj(), inner.d.conj(), inner.det.conj())
        } else {
            (inner.a, inner.b, inner.c, inner.d, inner.det)
        };
        let a = self.a * ia + self.b * ic;
        let b = self.a * ib + self.b * id;
        let c = self.c * ia + self.d * ic;
        let d = self.c * ib + self.d * id;
        let s = a.norm().max(b.norm()).max(c.norm()).max(d.norm());
        Self {
            a: a / s,
            b: b / s,
            c: c / s,
            d: d / s,
            det: self.det * idet / (s * s),
            conj: self.conj ^ inner.conj,
        }
    }

    pub fn is_anti(&self) -> bool {
        self.conj
    }

    #[cfg(test)]
    pub fn apply(&self, z: C) -> C {
        let z = if self.conj { z.conj() } else { z };
        (self.a * z + self.b) / (self.c * z + self.d)
    }

    /// Ingredients of `x ↦ log|W(x) - y|`, written as `Re(log u - log v)`
    /// with `u = p x + q`, `v = C x + D` for the holomorphic part of `W`.
    pub fn kernel(&self, x: C, y: C) -> LogKernel {
        let (a, b, c, d, det, w) = if self.conj {
            (self.a.conj(), self.b.conj(), self.c.conj(), self.d.conj(), self.det.conj(), y.conj())
        } else {
            (self.a, self.b, self.c, self.d, self.det, y)
        };
        let p = a - w * c;
        let q = b - w * d;
        LogKernel { u: p * x + q, v: c * x + d, p, c, det }
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct LogKernel {
    u: C,
    v: C,
    p: C,
    c: C,
    det: C,
}

impl LogKernel {
    pub fn is_singular(&self) -> bool {
        self.u.norm_sqr() == 0.0 || !self.u.is_finite()
    }

    /// `log|W(x) - y|`.
    pub fn value(&self) -> f64 {
        self.u.norm().ln() - self.v.norm().ln()
    }

    /// `log|W(x) - y| + log|v(x)|`. For a single inversion about `c` this is
    /// `log|W(x) - y| + log|x - c|`, which stays finite at `x = c`.
    pub fn fused_value(&self) -> f64 {
        self.u.norm().ln()
    }

    /// `n`-th complex `x`-derivative (`n >= 1`) of the holomorphic function
    /// whose real part is [`Self::value`].
    pub fn dx(&self, n: u32) -> C {
        let pp = self.p / self.u;
        let qq = self.c / self.v;
        let diff = self.det / (self.u * self.v);
        // P^n - Q^n = (P - Q) Σ P^j Q^{n-1-j}, with P - Q computed from det.
        let mut sum = C::new(0.0, 0.0);
        let mut pj = C::new(1.0, 0.0);
        for j in 0..n {
            sum += pj * qq.powu(n - 1 - j);
            pj *= pp;
        }
        signed_factorial(n - 1) * diff * sum
    }

    /// Same as [`Self::dx`] for [`Self::fused_value`].
    pub fn fused_dx(&self, n: u32) -> C {
        signed_factorial(n - 1) * (self.p / self.u).powu(n)
    }

    /// `n`-th complex `x`-derivative (`n >= 0`) of `E = ∂_w log u = -v/u`,
    /// `w` being `y` or `ȳ`. Shared by the fused and unfused kernels.
    pub fn dy_dx(&self, n: u32) -> C {
        if n == 0 {
            return -self.v / self.u;
        }
        let fact: f64 = (1..=n).map(f64::from).product();
        let sign = if (n - 1) % 2 == 0 { 1.0 } else { -1.0 };
        sign * fact * self.det * self.p.powu(n - 1) / self.u.powu(n + 1)
    }
}

/// `(-1)^k k!` as a complex scalar.
fn signed_factorial(k: u32) -> C {
    let f: f64 = (1..=k).map(f64::from).product();
    C::new(if k % 2 == 0 { f } else { -f }, 0.0)
}

/// `i^m`.
pub(crate) fn i_pow(m: u32) -> C {
    match m % 4 {
        0 => C::new(1.0, 0.0),
        1 => C::new(0.0, 1.0),
        2 => C::new(-1.0, 0.0),
        _ => C::new(0.0, -1.0),
    }
}

/// `∂1^{m1} ∂2^{m2} Re F` from the complex derivative `F^{(m1+m2)}`.
pub(crate) fn real_partial(f_m: C, m2: u32) -> f64 {
    (i_pow(m2) * f_m).re
}
