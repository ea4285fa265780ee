//! Scalar special functions: log-gamma, factorials, Legendre and Jacobi
//! polynomials. Everything here is deterministic straight-line arithmetic;
//! the heavy lifting elsewhere reduces to these plus quadrature.

use std::f64::consts::PI;

/// Lanczos coefficients, g = 607/128, 15 terms (Godfrey's set).
/// Relative accuracy of exp(ln_gamma) is ~1e-15 over x > 0.
const LANCZOS_G: f64 = 607.0 / 128.0;
const LANCZOS_C: [f64; 15] = [
    0.999_999_999_999_997_1,
    57.156_235_665_862_92,
    -59.597_960_355_475_49,
    14.136_097_974_741_746,
    -0.491_913_816_097_620_2,
    3.399_464_998_481_189e-5,
    4.652_362_892_704_858e-5,
    -9.837_447_530_487_956e-5,
    1.580_887_032_249_125e-4,
    -2.102_644_417_241_048_7e-4,
    2.174_396_181_152_126_4e-4,
    -1.643_181_065_367_639e-4,
    8.441_822_398_385_274e-5,
    -2.619_083_840_158_141e-5,
    3.689_918_265_953_162e-6,
];

/// Natural log of the gamma function for x > 0.
///
/// Panics on x <= 0 (the solver only ever needs positive arguments; gamma
/// poles would be silent NaN factories otherwise).
pub fn ln_gamma(x: f64) -> f64 {
    assert!(x > 0.0, "ln_gamma requires x > 0, got {x}");
    // Lanczos: Γ(x) = √(2π) · A(x) · t^(x-1/2) · e^(-t),  t = x + g - 1/2.
    let mut a = LANCZOS_C[0];
    for (k, c) in LANCZOS_C.iter().enumerate().skip(1) {
        a += c / (x - 1.0 + k as f64);
    }
    let t = x + LANCZOS_G - 0.5;
    (2.0 * PI).sqrt().ln() + a.ln() + (x - 0.5) * t.ln() - t
}

/// ln(n!) through `ln_gamma`; exact 0 for n = 0, 1.
pub fn ln_factorial(n: u64) -> f64 {
    if n < 2 {
        0.0
    } else {
        ln_gamma(n as f64 + 1.0)
    }
}

/// Legendre polynomial P_n(x) by the three-term recurrence
/// (n+1) P_{n+1} = (2n+1) x P_n − n P_{n−1}.
pub fn legendre_p(n: u32, x: f64) -> f64 {
    match n {
        0 => 1.0,
        1 => x,
        _ => {
            let (mut pm1, mut p) = (1.0, x);
            for k in 1..n {
                let k = k as f64;
                let next = ((2.0 * k + 1.0) * x * p - k * pm1) / (k + 1.0);
                pm1 = p;
                p = next;
            }
            p
        }
    }
}

/// P_n(x) together with its derivative, for Newton iteration on the nodes.
/// Derivative from (1−x²) P'_n = n (P_{n−1} − x P_n); interior x only.
pub fn legendre_p_with_deriv(n: u32, x: f64) -> (f64, f64) {
    assert!(n >= 1);
    let (mut pm1, mut p) = (1.0, x);
    for k in 1..n {
        let k = k as f64;
        let next = ((2.0 * k + 1.0) * x * p - k * pm1) / (k + 1.0);
        pm1 = p;
        p = next;
    }
    let d = n as f64 * (pm1 - x * p) / (1.0 - x * x);
    (p, d)
}

/// Jacobi polynomial P_n^{(a,b)}(x) by the standard three-term recurrence.
/// a, b > −1 (here always ℓ + 1/2, so well inside the valid range).
pub fn jacobi_p(n: u32, a: f64, b: f64, x: f64) -> f64 {
    match n {
        0 => 1.0,
        1 => 0.5 * (a - b + (a + b + 2.0) * x),
        _ => {
            let mut pm1 = 1.0;
            let mut p = 0.5 * (a - b + (a + b + 2.0) * x);
            for k in 2..=n {
                let k = k as f64;
                let c1 = 2.0 * k * (k + a + b) * (2.0 * k + a + b - 2.0);
                let c2 = (2.0 * k + a + b - 1.0) * (a * a - b * b);
                let c3 = (2.0 * k + a + b - 1.0)
                    * (2.0 * k + a + b)
                    * (2.0 * k + a + b - 2.0);
                let c4 = 2.0 * (k + a - 1.0) * (k + b - 1.0) * (2.0 * k + a + b);
                let next = ((c2 + c3 * x) * p - c4 * pm1) / c1;
                pm1 = p;
                p = next;
            }
            p
        }
    }
}
