//! Cylinder special functions: Bessel J_n, Y_n, Hankel H_n^(1), and the
//! orthonormal circular harmonics e^{inθ}/√(2π).
//!
//! J_n is evaluated by Miller's downward recurrence normalized with
//! J_0 + 2Σ J_2k = 1, which stays stable for n ≫ x. Y_0/Y_1 use the
//! log-series for small arguments and the Hankel asymptotic expansion for
//! large ones; higher orders follow the (stable) upward recurrence.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Largest order accepted by the public entry points.
pub const MAX_ORDER: i32 = 200;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Crossover between the Y_0/Y_1 power series and the asymptotic expansion.
/// At x = 13 both sides carry ≲ 5e-11 relative error.
const Y_SERIES_CUTOFF: f64 = 13.0;

fn check_order(n: i32) -> Result<()> {
    if n.abs() > MAX_ORDER {
        return Err(Error::domain(format!(
            "Bessel order |{n}| exceeds supported maximum {MAX_ORDER}"
        )));
    }
    Ok(())
}

/// J_n(x) for integer n (any sign) and x ≥ 0.
pub fn bessel_j(n: i32, x: f64) -> Result<f64> {
    check_order(n)?;
    if !x.is_finite() {
        return Err(Error::domain(format!("bessel_j argument {x} is not finite")));
    }
    if x < 0.0 {
        return Err(Error::domain(format!("bessel_j argument {x} is negative")));
    }
    let m = n.unsigned_abs() as usize;
    let j = bessel_j_array(m, x);
    let sign = if n < 0 && n % 2 != 0 { -1.0 } else { 1.0 };
    Ok(sign * j[m])
}

/// J_0(x), …, J_{n_max}(x) in one pass. `x` must be finite and ≥ 0.
///
/// Two regimes: upward recurrence from asymptotic J_0, J_1 when every
/// requested order sits safely below x, Miller's downward recurrence with
/// sum normalization otherwise.
pub fn bessel_j_array(n_max: usize, x: f64) -> Vec<f64> {
    debug_assert!(x.is_finite() && x >= 0.0);
    let mut out = vec![0.0; n_max + 1];
    if x < 1e-6 {
        // Two-term series; (x/2)^n underflows harmlessly for large n.
        let half = 0.5 * x;
        let mut pow = 1.0;
        let mut fact = 1.0;
        for (n, slot) in out.iter_mut().enumerate() {
            if n > 0 {
                pow *= half;
                fact *= n as f64;
            }
            let lead = pow / fact;
            *slot = lead * (1.0 - half * half / (n as f64 + 1.0));
        }
        return out;
    }

    if x > Y_SERIES_CUTOFF && (n_max as f64) < 0.75 * x {
        // Forward recurrence is stable while n stays below x.
        let (j0, j1, _, _) = bessel_jy01_asymptotic(x);
        out[0] = j0;
        if n_max >= 1 {
            out[1] = j1;
            for n in 1..n_max {
                out[n + 1] = (2.0 * n as f64 / x) * out[n] - out[n - 1];
            }
        }
        return out;
    }

    // Miller's algorithm.
    let m0 = n_max.max(x.ceil() as usize);
    let start = m0 + 16 + (60.0 * (m0 as f64 + 1.0)).sqrt().ceil() as usize;
    let mut jp = 0.0_f64; // J_{m+1}, unnormalized
    let mut jc = 1e-305_f64; // J_m, unnormalized
    let mut sum = 0.0_f64;
    for m in (0..=start).rev() {
        if m <= n_max {
            out[m] = jc;
        }
        if m % 2 == 0 {
            sum += if m == 0 { jc } else { 2.0 * jc };
        }
        if m > 0 {
            let jn = (2.0 * m as f64 / x) * jc - jp;
            jp = jc;
            jc = jn;
            if jc.abs() > 1e250 {
                jp /= 1e250;
                jc /= 1e250;
                sum /= 1e250;
                for v in out.iter_mut() {
                    *v /= 1e250;
                }
            }
        }
    }
    for v in out.iter_mut() {
        *v /= sum;
    }
    out
}

/// dJ_n/dx from the recurrence J_n'(x) = J_{n-1}(x) - (n/x) J_n(x).
pub fn bessel_j_deriv(n: i32, x: f64) -> Result<f64> {
    check_order(n)?;
    if n == 0 {
        return Ok(-bessel_j(1, x)?);
    }
    if x == 0.0 {
        // J_1'(0) = 1/2, higher orders flat at the origin.
        return Ok(if n.abs() == 1 { 0.5_f64.copysign(n as f64) } else { 0.0 });
    }
    Ok(bessel_j(n - 1, x)? - (n as f64 / x) * bessel_j(n, x)?)
}

/// Y_n(x) for integer n (any sign) and x > 0.
///
/// Magnitudes grow factorially in n for n ≫ x; far outside the regime the
/// toolkit uses, the result saturates at ±∞ in f64.
pub fn bessel_y(n: i32, x: f64) -> Result<f64> {
    check_order(n)?;
    if !x.is_finite() || x <= 0.0 {
        return Err(Error::domain(format!(
            "bessel_y argument {x} outside domain x > 0 (logarithmic singularity)"
        )));
    }
    let (y0, y1) = bessel_y01(x);
    let m = n.unsigned_abs();
    let val = match m {
        0 => y0,
        1 => y1,
        _ => {
            let mut prev = y0;
            let mut cur = y1;
            for j in 1..m {
                let next = (2.0 * j as f64 / x) * cur - prev;
                prev = cur;
                cur = next;
                if !cur.is_finite() {
                    break;
                }
            }
            cur
        }
    };
    let sign = if n < 0 && n % 2 != 0 { -1.0 } else { 1.0 };
    Ok(sign * val)
}

/// H_n^(1)(x) = J_n(x) + i Y_n(x), x > 0.
pub fn hankel1(n: i32, x: f64) -> Result<Complex64> {
    Ok(Complex64::new(bessel_j(n, x)?, bessel_y(n, x)?))
}

/// d/dx H_n^(1)(x) via H_n' = H_{n-1} - (n/x) H_n.
pub fn hankel1_deriv(n: i32, x: f64) -> Result<Complex64> {
    if n == 0 {
        return Ok(-hankel1(1, x)?);
    }
    Ok(hankel1(n - 1, x)? - (n as f64 / x) * hankel1(n, x)?)
}

/// Orthonormal circular harmonic e^{inθ}/√(2π).
pub fn circular_harmonic(n: i32, theta: f64) -> Complex64 {
    Complex64::from_polar((2.0 * PI).powf(-0.5), n as f64 * theta)
}

/// (Y_0, Y_1).
fn bessel_y01(x: f64) -> (f64, f64) {
    if x <= Y_SERIES_CUTOFF {
        bessel_y01_series(x)
    } else {
        let (_, _, y0, y1) = bessel_jy01_asymptotic(x);
        (y0, y1)
    }
}

/// Power series for Y_0, Y_1 (A&S 9.1.11 rewritten with harmonic numbers),
/// compensated summation to hold cancellation near the crossover.
fn bessel_y01_series(x: f64) -> (f64, f64) {
    let j = bessel_j_array(1, x);
    let lg = (0.5 * x).ln() + EULER_GAMMA;
    let q = 0.25 * x * x;

    // Y_0 = (2/π)(ln(x/2)+γ) J_0 + (2/π) Σ_{k≥1} (-1)^{k+1} H_k q^k / (k!)²
    let mut sum0 = 0.0_f64;
    let mut c0 = 0.0_f64;
    let mut term = 1.0_f64; // q^k / (k!)² running value
    let mut hk = 0.0_f64;
    for k in 1..80 {
        let kf = k as f64;
        term *= q / (kf * kf);
        hk += 1.0 / kf;
        let add = if k % 2 == 1 { term * hk } else { -term * hk };
        let yy = add - c0;
        let t = sum0 + yy;
        c0 = (t - sum0) - yy;
        sum0 = t;
        if term * hk < 1e-18 * (1.0 + sum0.abs()) {
            break;
        }
    }
    let y0 = (2.0 / PI) * (lg * j[0] + sum0);

    // Y_1 = (2/π)(ln(x/2)+γ) J_1 - 2/(πx)
    //       - (1/π) Σ_{k≥0} (-1)^k (H_k + H_{k+1}) (x/2)^{2k+1} / (k!(k+1)!)
    let half = 0.5 * x;
    let mut sum1 = 0.0_f64;
    let mut c1 = 0.0_f64;
    let mut t1 = half; // (x/2)^{2k+1} / (k!(k+1)!)
    let mut hk = 0.0_f64;
    let mut hk1 = 1.0_f64;
    for k in 0..80 {
        let add = if k % 2 == 0 {
            t1 * (hk + hk1)
        } else {
            -t1 * (hk + hk1)
        };
        let yy = add - c1;
        let t = sum1 + yy;
        c1 = (t - sum1) - yy;
        sum1 = t;
        if t1 * (hk + hk1) < 1e-18 * (1.0 + sum1.abs()) {
            break;
        }
        let kf = (k + 1) as f64;
        t1 *= q / (kf * (kf + 1.0));
        hk += 1.0 / kf;
        hk1 += 1.0 / (kf + 1.0);
    }
    let y1 = (2.0 / PI) * (lg * j[1] - 1.0 / x) - sum1 / PI;

    (y0, y1)
}

/// Hankel asymptotic expansion for orders 0 and 1, x above the crossover:
/// C_ν(x) = sqrt(2/(πx)) [P_ν cos/sin ω + …], ω = x − νπ/2 − π/4.
fn bessel_jy01_asymptotic(x: f64) -> (f64, f64, f64, f64) {
    let (p0, q0) = hankel_pq(0.0, x);
    let (p1, q1) = hankel_pq(4.0, x);
    let amp = (2.0 / (PI * x)).sqrt();
    let w0 = x - PI / 4.0;
    let w1 = x - 3.0 * PI / 4.0;
    let j0 = amp * (p0 * w0.cos() - q0 * w0.sin());
    let y0 = amp * (p0 * w0.sin() + q0 * w0.cos());
    let j1 = amp * (p1 * w1.cos() - q1 * w1.sin());
    let y1 = amp * (p1 * w1.sin() + q1 * w1.cos());
    (j0, j1, y0, y1)
}

/// Accumulate the P/Q amplitude series with μ = 4ν², stopping at the
/// smallest term (classic optimal truncation of the divergent expansion).
fn hankel_pq(mu: f64, x: f64) -> (f64, f64) {
    let mut p = 1.0_f64;
    let mut q = 0.0_f64;
    let mut term = 1.0_f64; // a_k(ν) / x^k
    let mut prev = f64::INFINITY;
    for k in 1..60_u32 {
        let odd = (2 * k - 1) as f64;
        term *= (mu - odd * odd) / (8.0 * k as f64 * x);
        if term.abs() >= prev {
            break;
        }
        prev = term.abs();
        // i^k distributes (−1)^⌊k/2⌋ over the alternating P/Q split.
        let signed = if (k / 2) % 2 == 0 { term } else { -term };
        if k % 2 == 1 {
            q += signed;
        } else {
            p += signed;
        }
        if term.abs() < 1e-18 {
            break;
        }
    }
    (p, q)
}
