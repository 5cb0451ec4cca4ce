//! Shapiro-Wilk normality test, Royston's AS R94 algorithm (the same
//! route R's `shapiro.test` takes): polynomial-corrected normal order
//! statistic coefficients and a normalizing transformation for the
//! p-value. Valid for 3 <= n <= 5000.

use crate::error::{Error, Result};
use crate::stats::special::{normal_quantile, normal_sf};
use crate::stats::{StatTestResult, TestMethod};

const C1: [f64; 6] = [0.0, 0.221157, -0.147981, -2.07119, 4.434685, -2.706056];
const C2: [f64; 6] = [0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633];
const C3: [f64; 4] = [0.544, -0.39978, 0.025054, -6.714e-4];
const C4: [f64; 4] = [1.3822, -0.77857, 0.062767, -0.0020322];
const C5: [f64; 4] = [-1.5861, -0.31082, -0.083751, 0.0038915];
const C6: [f64; 3] = [-0.4803, -0.082676, 0.0030302];
const G: [f64; 2] = [-2.273, 0.459];

pub fn shapiro_wilk(sample: &[f64]) -> Result<StatTestResult> {
    let n = sample.len();
    if n < 3 {
        return Err(Error::Validation(format!(
            "shapiro-wilk needs n >= 3, got {n}"
        )));
    }
    if n > 5000 {
        return Err(Error::Validation(format!(
            "shapiro-wilk supports n <= 5000, got {n}"
        )));
    }
    if sample.iter().any(|v| !v.is_finite()) {
        return Err(Error::Validation("non-finite sample value".into()));
    }

    let mut x = sample.to_vec();
    x.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let range = x[n - 1] - x[0];
    if range == 0.0 {
        return Err(Error::DegenerateSample(
            "all sample values identical".into(),
        ));
    }

    let nn2 = n / 2;
    let mut a = vec![0.0; nn2 + 1]; // 1-based like the published code
    if n == 3 {
        a[1] = std::f64::consts::FRAC_1_SQRT_2;
    } else {
        coefficients(&mut a, n);
    }

    let w = w_statistic(&x, &a, range);
    let p = p_value(w, n);
    Ok(StatTestResult {
        method: TestMethod::ShapiroWilk,
        statistic: w,
        p,
        p_adj: None,
        pair: None,
    })
}

fn coefficients(a: &mut [f64], n: usize) {
    let nn2 = n / 2;
    let an = n as f64;
    let an25 = an + 0.25;
    let mut summ2 = 0.0;
    for (i, slot) in a.iter_mut().enumerate().take(nn2 + 1).skip(1) {
        *slot = normal_quantile((i as f64 - 0.375) / an25);
        summ2 += *slot * *slot;
    }
    summ2 *= 2.0;
    let ssumm2 = summ2.sqrt();
    let rsn = 1.0 / an.sqrt();
    let a1 = poly(&C1, rsn) - a[1] / ssumm2;
    let (i1, fac) = if n > 5 {
        let a2 = -a[2] / ssumm2 + poly(&C2, rsn);
        let fac = ((summ2 - 2.0 * a[1] * a[1] - 2.0 * a[2] * a[2])
            / (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2))
            .sqrt();
        a[2] = a2;
        (3, fac)
    } else {
        let fac = ((summ2 - 2.0 * a[1] * a[1]) / (1.0 - 2.0 * a1 * a1)).sqrt();
        (2, fac)
    };
    a[1] = a1;
    for slot in a.iter_mut().take(nn2 + 1).skip(i1) {
        *slot /= -fac;
    }
}

/// W as the squared correlation between the sorted (range-scaled) data
/// and the symmetric coefficient vector, evaluated in the cancellation-
/// safe 1 - w1 form.
fn w_statistic(x: &[f64], a: &[f64], range: f64) -> f64 {
    let n = x.len();
    // Effective coefficient for sorted position i (0-based): the lower
    // half carries -a[idx], the upper half +a[idx], 0 in the middle.
    let coeff = |i: usize| -> f64 {
        let j = n - 1 - i;
        if i == j {
            0.0
        } else {
            let idx = i.min(j) + 1;
            if i > j {
                a[idx]
            } else {
                -a[idx]
            }
        }
    };
    let mut sa = 0.0;
    let mut sx = 0.0;
    for i in 0..n {
        sa += coeff(i);
        sx += x[i] / range;
    }
    sa /= n as f64;
    sx /= n as f64;
    let (mut ssa, mut ssx, mut sax) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let da = coeff(i) - sa;
        let dx = x[i] / range - sx;
        ssa += da * da;
        ssx += dx * dx;
        sax += da * dx;
    }
    let ssassx = (ssa * ssx).sqrt();
    let w1 = (ssassx - sax) * (ssassx + sax) / (ssa * ssx);
    (1.0 - w1).clamp(0.0, 1.0)
}

fn p_value(w: f64, n: usize) -> f64 {
    if w >= 1.0 {
        return 1.0;
    }
    if n == 3 {
        let pi6 = 6.0 / std::f64::consts::PI;
        let stqr = std::f64::consts::FRAC_PI_3; // asin(sqrt(3/4))
        return (pi6 * (w.sqrt().asin() - stqr)).clamp(0.0, 1.0);
    }
    let an = n as f64;
    let y = (1.0 - w).ln();
    if n <= 11 {
        let gamma = poly(&G, an);
        if y >= gamma {
            return 1e-99;
        }
        let y = -(gamma - y).ln();
        let m = poly(&C3, an);
        let s = poly(&C4, an).exp();
        normal_sf((y - m) / s)
    } else {
        let xx = an.ln();
        let m = poly(&C5, xx);
        let s = poly(&C6, xx).exp();
        normal_sf((y - m) / s)
    }
}

fn poly(coefs: &[f64], x: f64) -> f64 {
    coefs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}
