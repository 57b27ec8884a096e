//! Internal numeric workhorses: compensated summation, the standard normal
//! tail, adaptive Gauss-Kronrod quadrature, and a golden-section maximizer.

use crate::{Error, Result};

/// Neumaier-compensated accumulator. Running sums of `2^25` rank powers need
/// better than naive f64 addition to hold 1e-12 relative agreement with
/// closed forms.
#[derive(Debug, Clone, Copy, Default)]
pub struct Acc {
    sum: f64,
    comp: f64,
}

impl Acc {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Compensated sum of a slice.
pub fn sum(xs: &[f64]) -> f64 {
    let mut acc = Acc::new();
    for &x in xs {
        acc.add(x);
    }
    acc.total()
}

/// Standard normal upper tail Q(z) = P(Z > z).
#[inline]
pub fn q_function(z: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(z / std::f64::consts::SQRT_2)
}

/// Standard normal density.
#[inline]
pub fn std_normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Binary entropy in bits, with the 0 log 0 = 0 convention.
pub fn binary_entropy_bits(d: f64) -> f64 {
    let mut h = 0.0;
    if d > 0.0 {
        h -= d * d.log2();
    }
    if d < 1.0 {
        h -= (1.0 - d) * (1.0 - d).log2();
    }
    h
}

/// `(b^(s+1) - a^(s+1)) / ((b - a) (s + 1))` for `0 <= a < b`, the mean of
/// `t^s` over `[a, b]`. Uses an expm1 form when `a/b` is close to 1 so the
/// numerator difference does not cancel.
pub fn power_mean(a: f64, b: f64, s: f64) -> f64 {
    debug_assert!(a >= 0.0 && b > a);
    if a == 0.0 {
        return b.powf(s) / (s + 1.0);
    }
    let r = a / b;
    if r < 0.5 {
        (b.powf(s + 1.0) - a.powf(s + 1.0)) / ((b - a) * (s + 1.0))
    } else {
        // 1 - r^(s+1) and 1 - r via expm1 keep relative accuracy as r -> 1.
        let num = -f64::exp_m1((s + 1.0) * r.ln());
        let den = -f64::exp_m1(r.ln());
        b.powf(s) * num / (den * (s + 1.0))
    }
}

/// KL divergence `D(q || p)` in nats. Assumes `q` vanishes wherever `p` does;
/// entries of `q` that are zero contribute nothing.
pub fn kl_nats(q: &[f64], p: &[f64]) -> f64 {
    debug_assert_eq!(q.len(), p.len());
    let mut acc = Acc::new();
    for (&qi, &pi) in q.iter().zip(p) {
        if qi > 0.0 {
            acc.add(qi * (qi / pi).ln());
        }
    }
    acc.total().max(0.0)
}

// 15-point Kronrod nodes (positive half) with the embedded 7-point Gauss rule
// on the odd indices; standard QUADPACK constants.
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// One G7/K15 panel on `[a, b]`: returns the K15 value and the |K15 - G7|
/// error estimate.
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let fc = f(mid);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let fsum = f(mid - dx) + f(mid + dx);
        kron += fsum * WGK[j];
        if j % 2 == 1 {
            gauss += fsum * WG[j / 2];
        }
    }
    (kron * half, ((kron - gauss) * half).abs())
}

/// Adaptive Gauss-Kronrod integration of `f` over `[a, b]` to absolute
/// tolerance `abs_tol`, by repeated bisection of the panel with the largest
/// error estimate.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, abs_tol: f64) -> Result<f64> {
    const MAX_PANELS: usize = 4096;
    let (v, e) = gk15(f, a, b);
    let mut panels = vec![(a, b, v, e)];
    loop {
        let total_err: f64 = panels.iter().map(|p| p.3).sum();
        if total_err <= abs_tol {
            let mut acc = Acc::new();
            for p in &panels {
                acc.add(p.2);
            }
            return Ok(acc.total());
        }
        if panels.len() >= MAX_PANELS {
            return Err(Error::Inconsistent(format!(
                "quadrature error {total_err:e} above tolerance {abs_tol:e} after {MAX_PANELS} panels"
            )));
        }
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .map(|(i, _)| i)
            .unwrap();
        let (pa, pb, _, _) = panels.swap_remove(worst);
        let pm = 0.5 * (pa + pb);
        let (v1, e1) = gk15(f, pa, pm);
        let (v2, e2) = gk15(f, pm, pb);
        panels.push((pa, pm, v1, e1));
        panels.push((pm, pb, v2, e2));
    }
}

/// Golden-section search for the maximum of a unimodal `f` on `[lo, hi]`.
/// Returns `(argmax, max)` with the argument located to within `xtol`.
pub fn golden_max<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, xtol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > xtol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}
