//! Counter-based random stream with a platform-independent sample sequence.
//!
//! Every randomized corruption draws from a [`RandomStream`] seeded per
//! (image, spec). The generator is a splitmix64-style counter mix: output `i`
//! is a bijective scramble of `seed + (i+1)·GOLDEN`, so the sequence depends
//! only on the seed, never on threading or platform.
//!
//! The Gaussian and Poisson layers deliberately avoid libm: `ln`, `exp` and
//! `sin/cos` are fixed polynomial evaluations in plain IEEE arithmetic, so
//! the full sample sequence (not just the integer stream) is bit-identical
//! across platforms.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// Deterministic counter-based random stream.
#[derive(Debug, Clone)]
pub struct RandomStream {
    seed: u64,
    counter: u64,
    spare_gaussian: Option<f64>,
}

impl RandomStream {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            counter: 0,
            spare_gaussian: None,
        }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.counter = self.counter.wrapping_add(1);
        let mut z = self.seed.wrapping_add(self.counter.wrapping_mul(GOLDEN));
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, 1)` with 53-bit resolution.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / 9007199254740992.0)
    }

    /// Uniform in `(0, 1]`; safe as a logarithm argument.
    #[inline]
    pub fn next_f64_open(&mut self) -> f64 {
        ((self.next_u64() >> 11) + 1) as f64 * (1.0 / 9007199254740992.0)
    }

    /// Uniform integer in `[0, n)` via the high-multiply trick.
    #[inline]
    pub fn next_below(&mut self, n: u64) -> u64 {
        debug_assert!(n > 0);
        ((self.next_u64() as u128 * n as u128) >> 64) as u64
    }

    /// Standard normal sample (Box-Muller, one spare cached).
    pub fn next_gaussian(&mut self) -> f64 {
        if let Some(z) = self.spare_gaussian.take() {
            return z;
        }
        let u1 = self.next_f64_open();
        let u2 = self.next_f64();
        let r = (-2.0 * det_ln(u1)).sqrt();
        let (s, c) = det_sin_cos_2pi(u2);
        self.spare_gaussian = Some(r * s);
        r * c
    }

    /// Poisson sample: product-of-uniforms inversion below mean 10,
    /// transformed rejection (PTRS) above.
    pub fn next_poisson(&mut self, lambda: f64) -> u64 {
        debug_assert!(lambda >= 0.0);
        if lambda <= 0.0 {
            return 0;
        }
        if lambda < 10.0 {
            self.poisson_inversion(lambda)
        } else {
            self.poisson_ptrs(lambda)
        }
    }

    fn poisson_inversion(&mut self, lambda: f64) -> u64 {
        let limit = det_exp(-lambda);
        let mut product = self.next_f64_open();
        let mut k = 0u64;
        while product > limit {
            product *= self.next_f64_open();
            k += 1;
        }
        k
    }

    fn poisson_ptrs(&mut self, lambda: f64) -> u64 {
        let ln_lambda = det_ln(lambda);
        let b = 0.931 + 2.53 * lambda.sqrt();
        let a = -0.059 + 0.02483 * b;
        let inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
        let v_r = 0.9277 - 3.6224 / (b - 2.0);
        loop {
            let u = self.next_f64() - 0.5;
            let v = self.next_f64_open();
            let us = 0.5 - u.abs();
            let k = ((2.0 * a / us + b) * u + lambda + 0.43).floor();
            if us >= 0.07 && v <= v_r {
                return k as u64;
            }
            if k < 0.0 || (us < 0.013 && v > us) {
                continue;
            }
            let lhs = det_ln(v * inv_alpha / (a / (us * us) + b));
            let rhs = k * ln_lambda - lambda - ln_factorial(k as u64);
            if lhs <= rhs {
                return k as u64;
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Portable elementary functions
//
// Plain IEEE adds/multiplies and sqrt are exactly specified, so polynomial
// evaluation in a fixed order gives bit-identical results everywhere. Each
// routine is accurate to ~1e-13 relative, far beyond what the statistical
// contracts need.
// ---------------------------------------------------------------------------

const LN2_HI: f64 = 6.931471803691238165e-01;
const LN2_LO: f64 = 1.908214929270587700e-10;
const LN2: f64 = std::f64::consts::LN_2;
const SQRT2: f64 = std::f64::consts::SQRT_2;

/// Natural logarithm for finite positive normal inputs.
pub fn det_ln(x: f64) -> f64 {
    debug_assert!(x > 0.0 && x.is_finite());
    let bits = x.to_bits();
    let mut exponent = ((bits >> 52) & 0x7FF) as i64 - 1023;
    let mut m = f64::from_bits((bits & 0x000F_FFFF_FFFF_FFFF) | 0x3FF0_0000_0000_0000);
    if m > SQRT2 {
        m *= 0.5;
        exponent += 1;
    }
    // ln(m) = 2 atanh(t), t = (m-1)/(m+1), |t| <= 0.1716
    let t = (m - 1.0) / (m + 1.0);
    let s = t * t;
    let series = 1.0
        + s * (1.0 / 3.0
            + s * (1.0 / 5.0
                + s * (1.0 / 7.0
                    + s * (1.0 / 9.0
                        + s * (1.0 / 11.0 + s * (1.0 / 13.0 + s * (1.0 / 15.0 + s / 17.0)))))));
    2.0 * t * series + exponent as f64 * LN2
}

/// Exponential for |x| < 700.
pub fn det_exp(x: f64) -> f64 {
    debug_assert!(x.is_finite() && x.abs() < 700.0);
    let k = (x / LN2).round();
    let r = (x - k * LN2_HI) - k * LN2_LO;
    // Taylor to r^13; |r| <= ln2/2 keeps the tail below 1e-17.
    let mut term = 1.0;
    let mut sum = 1.0;
    for n in 1..=13 {
        term *= r / n as f64;
        sum += term;
    }
    let ki = k as i64;
    if ki >= -1022 && ki <= 1023 {
        sum * f64::from_bits(((1023 + ki) as u64) << 52)
    } else if ki < -1022 {
        // Underflow territory: split the scale to stay in normal range.
        sum * f64::from_bits(((1023 - 511) as u64) << 52)
            * f64::from_bits(((1023 + ki + 511) as u64) << 52)
    } else {
        f64::INFINITY
    }
}

/// Simultaneous sine and cosine of `2π·u` for `u ∈ [0, 1)`.
pub fn det_sin_cos_2pi(u: f64) -> (f64, f64) {
    debug_assert!((0.0..1.0).contains(&u));
    let a = u * 4.0;
    let quadrant = a.floor() as u32 & 3;
    let f = a - a.floor();
    // Mirror within the quadrant so the polynomial argument stays <= π/4.
    let (sin_q, cos_q) = if f <= 0.5 {
        let z = f * std::f64::consts::FRAC_PI_2;
        (sin_poly(z), cos_poly(z))
    } else {
        let z = (1.0 - f) * std::f64::consts::FRAC_PI_2;
        (cos_poly(z), sin_poly(z))
    };
    match quadrant {
        0 => (sin_q, cos_q),
        1 => (cos_q, -sin_q),
        2 => (-sin_q, -cos_q),
        _ => (-cos_q, sin_q),
    }
}

fn sin_poly(z: f64) -> f64 {
    let z2 = z * z;
    z * (1.0
        + z2 * (-1.0 / 6.0
            + z2 * (1.0 / 120.0
                + z2 * (-1.0 / 5040.0
                    + z2 * (1.0 / 362880.0
                        + z2 * (-1.0 / 39916800.0 + z2 / 6227020800.0))))))
}

fn cos_poly(z: f64) -> f64 {
    let z2 = z * z;
    1.0 + z2
        * (-0.5
            + z2 * (1.0 / 24.0
                + z2 * (-1.0 / 720.0
                    + z2 * (1.0 / 40320.0
                        + z2 * (-1.0 / 3628800.0 + z2 / 479001600.0)))))
}

const LN_2PI: f64 = 1.837877066409345484;

/// ln(k!), tabulated for small k, Stirling series beyond.
pub fn ln_factorial(k: u64) -> f64 {
    static TABLE: std::sync::OnceLock<[f64; 128]> = std::sync::OnceLock::new();
    let table = TABLE.get_or_init(|| {
        let mut t = [0.0f64; 128];
        for i in 2..128 {
            t[i] = t[i - 1] + det_ln(i as f64);
        }
        t
    });
    if (k as usize) < table.len() {
        return table[k as usize];
    }
    let kf = k as f64;
    let inv = 1.0 / kf;
    let inv2 = inv * inv;
    (kf + 0.5) * det_ln(kf) - kf
        + 0.5 * LN_2PI
        + inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 / 1260.0))
}
