//! Fixed-width floating-point expansions.
//!
//! The shifted Chebyshev coefficients are the result of heavy cancellation:
//! their rounding errors get amplified by `sum_k |a_k| x^k / |P(x)|`, which
//! reaches ~1e28 at degree 25 on a ratio-2 interval. Plain f64 (and even
//! double-double) storage is not enough to keep the evaluated polynomial
//! inside its guaranteed sup-norm band, so coefficients are carried as short
//! nonoverlapping expansions (Shewchuk-style), four limbs ≈ 212 bits.
//!
//! All primitive transforms (`two_sum`, `two_prod`, `grow`, `scale`) are
//! exact; precision is only lost when an intermediate result is compressed
//! back to [`LIMBS`] limbs, which drops a relative 2^-212 tail.

pub(crate) const LIMBS: usize = 4;
const BUF: usize = 4 * LIMBS;

/// A nonoverlapping expansion, limbs ordered by increasing magnitude.
/// The represented value is the exact sum of the limbs.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct Ex {
    limb: [f64; LIMBS],
    len: u8,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bv = s - a;
    let av = s - bv;
    (s, (a - av) + (b - bv))
}

/// Requires |a| >= |b| (or a == 0).
#[inline]
fn fast_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// Adds the scalar `b` to the expansion in `buf[..len]`, in place.
/// Exact (Shewchuk GROW-EXPANSION with zero elimination).
fn grow(buf: &mut [f64; BUF], len: usize, b: f64) -> usize {
    let mut q = b;
    let mut out = 0;
    for i in 0..len {
        let (qn, h) = two_sum(q, buf[i]);
        if h != 0.0 {
            buf[out] = h;
            out += 1;
        }
        q = qn;
    }
    if q != 0.0 || out == 0 {
        buf[out] = q;
        out += 1;
    }
    out
}

impl Ex {
    pub const ZERO: Ex = Ex {
        limb: [0.0; LIMBS],
        len: 0,
    };

    pub fn from_f64(x: f64) -> Ex {
        let mut e = Ex::ZERO;
        if x != 0.0 {
            e.limb[0] = x;
            e.len = 1;
        }
        e
    }

    /// Exact for |v| < 2^159; Chebyshev coefficients stay far below that.
    pub fn from_i128(v: i128) -> Ex {
        let mut buf = [0.0f64; BUF];
        let mut len = 0;
        let mut rest = v;
        for _ in 0..3 {
            if rest == 0 {
                break;
            }
            let h = rest as f64;
            len = grow(&mut buf, len, h);
            rest -= h as i128;
        }
        Ex::compress(&buf[..len])
    }

    /// The nearest f64 to the represented value.
    pub fn approx(self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.len as usize {
            s += self.limb[i];
        }
        s
    }

    pub fn is_finite(self) -> bool {
        self.limb[..self.len as usize].iter().all(|l| l.is_finite())
    }

    pub fn neg(mut self) -> Ex {
        for l in &mut self.limb[..self.len as usize] {
            *l = -*l;
        }
        self
    }

    /// ln of the absolute value, accurate to a few ulps even when the limbs
    /// cancel the head; returns -inf for zero.
    pub fn ln_abs(self) -> f64 {
        if self.len == 0 {
            return f64::NEG_INFINITY;
        }
        let hi = self.limb[self.len as usize - 1];
        let mut rest = 0.0;
        for i in 0..self.len as usize - 1 {
            rest += self.limb[i];
        }
        hi.abs().ln() + (rest / hi).ln_1p()
    }

    pub fn signum(self) -> f64 {
        if self.len == 0 {
            0.0
        } else {
            self.limb[self.len as usize - 1].signum()
        }
    }

    pub fn add(self, other: Ex) -> Ex {
        let mut buf = [0.0f64; BUF];
        let mut len = self.len as usize;
        buf[..len].copy_from_slice(&self.limb[..len]);
        for i in 0..other.len as usize {
            len = grow(&mut buf, len, other.limb[i]);
        }
        Ex::compress(&buf[..len])
    }

    pub fn sub(self, other: Ex) -> Ex {
        self.add(other.neg())
    }

    /// Expansion times scalar (exact product, then compressed).
    pub fn scale(self, b: f64) -> Ex {
        let n = self.len as usize;
        if n == 0 || b == 0.0 {
            return Ex::ZERO;
        }
        let mut buf = [0.0f64; BUF];
        let mut out = 0;
        let (mut q, h) = two_prod(self.limb[0], b);
        if h != 0.0 {
            buf[out] = h;
            out += 1;
        }
        for i in 1..n {
            let (ti, t) = two_prod(self.limb[i], b);
            let (q2, h) = two_sum(q, t);
            if h != 0.0 {
                buf[out] = h;
                out += 1;
            }
            let (qn, h) = fast_two_sum(ti, q2);
            if h != 0.0 {
                buf[out] = h;
                out += 1;
            }
            q = qn;
        }
        if q != 0.0 || out == 0 {
            buf[out] = q;
            out += 1;
        }
        Ex::compress(&buf[..out])
    }

    pub fn mul(self, other: Ex) -> Ex {
        let mut acc = Ex::ZERO;
        for i in 0..other.len as usize {
            acc = acc.add(self.scale(other.limb[i]));
        }
        acc
    }

    /// Long division by repeated correction; ~265 bits before compression.
    pub fn div(self, den: Ex) -> Ex {
        let d0 = den.approx();
        let mut rem = self;
        let mut q = Ex::ZERO;
        for _ in 0..5 {
            let qi = rem.approx() / d0;
            if qi == 0.0 {
                break;
            }
            if !qi.is_finite() {
                return Ex::from_f64(qi);
            }
            q = q.add(Ex::from_f64(qi));
            rem = rem.sub(den.scale(qi));
        }
        q
    }

    /// Renormalize a valid expansion and keep the `LIMBS` largest limbs
    /// (Shewchuk COMPRESS followed by truncation of the tail).
    fn compress(e: &[f64]) -> Ex {
        let m = e.len();
        if m == 0 {
            return Ex::ZERO;
        }
        let mut g = [0.0f64; BUF];
        let mut q = e[m - 1];
        let mut bottom = m - 1;
        for i in (0..m - 1).rev() {
            let (qn, small) = fast_two_sum(q, e[i]);
            if small != 0.0 {
                g[bottom] = qn;
                bottom -= 1;
                q = small;
            } else {
                q = qn;
            }
        }
        g[bottom] = q;

        let mut h = [0.0f64; BUF];
        let mut hlen = 0;
        let mut q = g[bottom];
        for gi in &g[bottom + 1..m] {
            let (qn, small) = fast_two_sum(*gi, q);
            if small != 0.0 {
                h[hlen] = small;
                hlen += 1;
            }
            q = qn;
        }
        h[hlen] = q;
        hlen += 1;

        let keep = hlen.min(LIMBS);
        let mut out = Ex::ZERO;
        out.limb[..keep].copy_from_slice(&h[hlen - keep..hlen]);
        out.len = keep as u8;
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs().max(a.abs()).max(f64::MIN_POSITIVE)
    }

    #[test]
    fn i128_round_trip() {
        for v in [0i128, 1, -1, 2_i128.pow(100) + 12345, -(3i128.pow(70))] {
            let e = Ex::from_i128(v);
            // head limb carries the magnitude
            assert!(close(e.approx(), v as f64, 1e-15), "v={v}");
        }
        // exactness below 2^53
        assert_eq!(Ex::from_i128(9007199254740991).approx(), 9007199254740991.0);
    }

    #[test]
    fn small_identities() {
        // the expansion holds 0.1 + 0.2 exactly, so subtracting both returns zero
        let a = Ex::from_f64(0.1).add(Ex::from_f64(0.2));
        assert_eq!(a.approx(), 0.1 + 0.2);
        let b = a.sub(Ex::from_f64(0.2)).sub(Ex::from_f64(0.1));
        assert_eq!(b.approx(), 0.0);
    }

    #[test]
    fn division_recovers_thirds() {
        let third = Ex::from_f64(1.0).div(Ex::from_f64(3.0));
        let one = third.scale(3.0);
        assert!((one.approx() - 1.0).abs() < 1e-60);
        assert_eq!(Ex::from_f64(-7.5).div(Ex::from_f64(-7.5)).approx(), 1.0);
    }

    #[test]
    fn ln_abs_handles_cancellation() {
        // 1 + 2^-80 stored exactly; ln should see the tiny excess
        let e = Ex::from_f64(1.0).add(Ex::from_f64(2f64.powi(-80)));
        assert!(close(e.ln_abs(), 2f64.powi(-80), 1e-10));
        assert_eq!(Ex::ZERO.ln_abs(), f64::NEG_INFINITY);
    }

    proptest! {
        #[test]
        fn add_matches_f64_when_exact(a in -1e15f64..1e15, b in -1e15f64..1e15) {
            let s = Ex::from_f64(a).add(Ex::from_f64(b));
            // the head of the expansion is the correctly rounded sum
            prop_assert_eq!(s.approx(), a + b);
        }

        #[test]
        fn mul_head_is_rounded_product(a in -1e120f64..1e120, b in -1e120f64..1e120) {
            let p = Ex::from_f64(a).mul(Ex::from_f64(b));
            prop_assert_eq!(p.approx(), a * b);
        }

        #[test]
        fn limbs_stay_ordered_and_nonoverlapping(
            xs in prop::collection::vec(-1e100f64..1e100, 1..6)
        ) {
            let mut acc = Ex::ZERO;
            for x in &xs {
                acc = acc.add(Ex::from_f64(*x));
            }
            let limbs = &acc.limb[..acc.len as usize];
            for w in limbs.windows(2) {
                prop_assert!(w[0].abs() < w[1].abs() || w[0] == 0.0);
            }
        }

        #[test]
        fn div_then_mul_round_trips(a in 1e-30f64..1e30, d in 1e-30f64..1e30) {
            let q = Ex::from_f64(a).div(Ex::from_f64(d));
            let back = q.mul(Ex::from_f64(d));
            prop_assert!(close(back.approx(), a, 1e-25));
        }
    }
}
