//! Special functions backing the distribution CDFs.
//!
//! Hand-rolled rather than pulled from a stats crate: the set needed here is
//! small (log-gamma, regularized incomplete beta and gamma), the algorithms
//! are classical (Lanczos approximation, Lentz continued fractions, power
//! series), and keeping them local pins the accuracy at the 1e-10 level the
//! goodness-of-fit statistics require.

use std::f64::consts::PI;

/// Lanczos coefficients, g = 7, n = 9 (published table, digits kept as-is).
#[allow(clippy::excessive_precision)]
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of the gamma function for z > 0.
pub fn ln_gamma(z: f64) -> f64 {
    assert!(z > 0.0, "ln_gamma requires z > 0, got {z}");
    if z < 0.5 {
        // Reflection: Gamma(z) Gamma(1-z) = pi / sin(pi z).
        return PI.ln() - (PI * z).sin().ln() - ln_gamma(1.0 - z);
    }
    let z = z - 1.0;
    let mut x = LANCZOS[0];
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        x += c / (z + i as f64);
    }
    let t = z + 7.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + x.ln()
}

/// Regularized incomplete beta function I_x(a, b).
///
/// Continued fraction (modified Lentz), switching to the symmetric form
/// `1 - I_{1-x}(b, a)` where that converges faster.
pub fn inc_beta(x: f64, a: f64, b: f64) -> f64 {
    assert!(a > 0.0 && b > 0.0, "inc_beta requires a, b > 0");
    assert!((0.0..=1.0).contains(&x), "inc_beta requires x in [0,1], got {x}");
    if x == 0.0 {
        return 0.0;
    }
    if x == 1.0 {
        return 1.0;
    }
    let ln_front =
        ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    if x < (a + 1.0) / (a + b + 2.0) {
        (ln_front.exp() * beta_cf(x, a, b)) / a
    } else {
        1.0 - (ln_front.exp() * beta_cf(1.0 - x, b, a)) / b
    }
}

/// Lentz evaluation of the incomplete-beta continued fraction.
fn beta_cf(x: f64, a: f64, b: f64) -> f64 {
    const MAX_ITER: usize = 300;
    const EPS: f64 = 1e-15;
    const TINY: f64 = 1e-30;

    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        // Even step.
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        // Odd step.
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            return h;
        }
    }
    h
}

/// Regularized lower incomplete gamma function P(a, x).
pub fn inc_gamma(a: f64, x: f64) -> f64 {
    assert!(a > 0.0 && x >= 0.0, "inc_gamma requires a > 0, x >= 0");
    if x == 0.0 {
        return 0.0;
    }
    if x < a + 1.0 {
        gamma_series(a, x)
    } else {
        1.0 - gamma_cf(a, x)
    }
}

/// Series representation of P(a, x), valid for x < a + 1.
fn gamma_series(a: f64, x: f64) -> f64 {
    const MAX_ITER: usize = 500;
    const EPS: f64 = 1e-16;
    let mut ap = a;
    let mut sum = 1.0 / a;
    let mut del = sum;
    for _ in 0..MAX_ITER {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if del.abs() < sum.abs() * EPS {
            break;
        }
    }
    sum * (-x + a * x.ln() - ln_gamma(a)).exp()
}

/// Continued fraction for Q(a, x) = 1 - P(a, x), valid for x >= a + 1.
fn gamma_cf(a: f64, x: f64) -> f64 {
    const MAX_ITER: usize = 500;
    const EPS: f64 = 1e-16;
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..=MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    (-x + a * x.ln() - ln_gamma(a)).exp() * h
}

/// Error function via the incomplete gamma function.
pub fn erf(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else if x > 0.0 {
        inc_gamma(0.5, x * x)
    } else {
        -inc_gamma(0.5, x * x)
    }
}

/// Standard normal CDF.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * (1.0 + erf(z / std::f64::consts::SQRT_2))
}

/// CDF of the standard Student-t distribution with `nu` degrees of freedom,
/// through the regularized incomplete beta function.
pub fn student_t_cdf(t: f64, nu: f64) -> f64 {
    assert!(nu > 0.0, "student_t_cdf requires nu > 0");
    if t == 0.0 {
        return 0.5;
    }
    let ib = inc_beta(nu / (nu + t * t), 0.5 * nu, 0.5);
    if t > 0.0 {
        1.0 - 0.5 * ib
    } else {
        0.5 * ib
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_gamma_integer_and_half_integer_values() {
        // Gamma(n) = (n-1)! gives an exact oracle for integers.
        let mut fact = 1.0f64;
        for n in 1..=15u32 {
            if n > 1 {
                fact *= (n - 1) as f64;
            }
            assert!(
                (ln_gamma(n as f64) - fact.ln()).abs() < 1e-12,
                "ln_gamma({n})"
            );
        }
        // Gamma(n + 1/2) = (2n)! sqrt(pi) / (4^n n!).
        let mut two_n_fact = 1.0f64;
        let mut n_fact = 1.0f64;
        for n in 0..=8u32 {
            if n > 0 {
                two_n_fact *= (2 * n - 1) as f64 * (2 * n) as f64;
                n_fact *= n as f64;
            }
            let exact = two_n_fact * PI.sqrt() / (4.0f64.powi(n as i32) * n_fact);
            let got = ln_gamma(n as f64 + 0.5);
            assert!(
                (got - exact.ln()).abs() < 1e-12,
                "ln_gamma({}): {got} vs {}",
                n as f64 + 0.5,
                exact.ln()
            );
        }
    }

    #[test]
    fn inc_beta_closed_forms() {
        // I_x(1, 1) = x, I_x(a, 1) = x^a, I_x(1, b) = 1 - (1-x)^b,
        // I_x(2, 2) = 3x^2 - 2x^3 (integral of 6 t (1 - t)).
        for i in 1..20 {
            let x = i as f64 / 20.0;
            assert!((inc_beta(x, 1.0, 1.0) - x).abs() < 1e-13);
            assert!((inc_beta(x, 3.5, 1.0) - x.powf(3.5)).abs() < 1e-13);
            assert!((inc_beta(x, 1.0, 2.5) - (1.0 - (1.0 - x).powf(2.5))).abs() < 1e-13);
            let quad = 3.0 * x * x - 2.0 * x * x * x;
            assert!((inc_beta(x, 2.0, 2.0) - quad).abs() < 1e-13);
        }
    }

    #[test]
    fn inc_beta_symmetry() {
        for &(a, b) in &[(0.5, 0.5), (1.5, 0.5), (2.0, 7.0), (10.0, 3.3)] {
            for i in 1..10 {
                let x = i as f64 / 10.0;
                let lhs = inc_beta(x, a, b);
                let rhs = 1.0 - inc_beta(1.0 - x, b, a);
                assert!((lhs - rhs).abs() < 1e-12, "a={a} b={b} x={x}");
            }
        }
    }

    #[test]
    fn student_t_cdf_matches_cauchy_closed_form() {
        // nu = 1 is Cauchy: F(t) = 1/2 + atan(t)/pi.
        for i in -50..=50 {
            let t = i as f64 / 5.0;
            let exact = 0.5 + t.atan() / PI;
            assert!(
                (student_t_cdf(t, 1.0) - exact).abs() < 1e-12,
                "t={t}: {} vs {exact}",
                student_t_cdf(t, 1.0)
            );
        }
    }

    #[test]
    fn student_t_cdf_matches_nu2_closed_form() {
        // nu = 2: F(t) = 1/2 + t / (2 sqrt(2 + t^2)).
        for i in -50..=50 {
            let t = i as f64 / 5.0;
            let exact = 0.5 + t / (2.0 * (2.0 + t * t).sqrt());
            assert!((student_t_cdf(t, 2.0) - exact).abs() < 1e-12, "t={t}");
        }
    }

    #[test]
    fn student_t_cdf_quadrature_oracle_nu3() {
        // Simpson quadrature of the nu = 3 density over [0, t] against
        // F(t) - 1/2. Density normalization 2 / (pi sqrt(3)).
        let pdf = |x: f64| (2.0 / (PI * 3.0f64.sqrt())) * (1.0 + x * x / 3.0).powi(-2);
        for &t in &[0.25, 0.5, 1.0, 2.0, 4.0, 8.0] {
            let n = 20_000;
            let h = t / n as f64;
            let mut s = pdf(0.0) + pdf(t);
            for k in 1..n {
                let w = if k % 2 == 1 { 4.0 } else { 2.0 };
                s += w * pdf(k as f64 * h);
            }
            let integral = s * h / 3.0;
            let got = student_t_cdf(t, 3.0) - 0.5;
            assert!((got - integral).abs() < 1e-10, "t={t}: {got} vs {integral}");
        }
    }

    #[test]
    fn erf_quadrature_oracle() {
        // erf(x) = 2/sqrt(pi) * integral_0^x exp(-t^2) dt by Simpson.
        for &x in &[0.1, 0.5, 1.0, 1.7, 2.5, 4.0] {
            let n = 20_000;
            let h = x / n as f64;
            let f = |t: f64| (-t * t).exp();
            let mut s = f(0.0) + f(x);
            for k in 1..n {
                let w = if k % 2 == 1 { 4.0 } else { 2.0 };
                s += w * f(k as f64 * h);
            }
            let integral = 2.0 / PI.sqrt() * s * h / 3.0;
            assert!((erf(x) - integral).abs() < 1e-12, "x={x}");
        }
        assert!((erf(-1.3) + erf(1.3)).abs() < 1e-15);
        assert_eq!(erf(0.0), 0.0);
    }

    #[test]
    fn normal_cdf_basics() {
        assert!((normal_cdf(0.0) - 0.5).abs() < 1e-15);
        assert!(normal_cdf(8.0) > 1.0 - 1e-14);
        assert!(normal_cdf(-8.0) < 1e-14);
        for i in -30..=30 {
            let z = i as f64 / 5.0;
            let sym = normal_cdf(z) + normal_cdf(-z);
            assert!((sym - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn student_t_cdf_tends_to_normal() {
        for i in -20..=20 {
            let z = i as f64 / 4.0;
            assert!((student_t_cdf(z, 1e6) - normal_cdf(z)).abs() < 1e-5);
        }
    }
}
