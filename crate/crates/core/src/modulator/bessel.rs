//! Bessel functions of the first kind for integer order.

/// Below this argument the ascending series is used; above it, Miller's
/// downward recurrence normalized by J₀ + 2ΣJ₂ₖ = 1.
const SERIES_LIMIT: f64 = 12.0;

/// Jₙ(β) for integer order `n` (|n| ≤ 1000) and real `beta`.
pub fn bessel_j(n: i32, beta: f64) -> f64 {
    let order = n.unsigned_abs();
    let mut sign = if n < 0 && order % 2 == 1 { -1.0 } else { 1.0 };
    if beta < 0.0 && order % 2 == 1 {
        sign = -sign;
    }
    let x = beta.abs();
    if x == 0.0 {
        return if order == 0 { 1.0 } else { 0.0 };
    }
    let v = if x < SERIES_LIMIT {
        series(order, x)
    } else {
        miller(order, x)
    };
    sign * v
}

fn series(n: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut term = 1.0;
    for k in 1..=n {
        term *= half / k as f64;
        if term == 0.0 {
            return 0.0;
        }
    }
    let q = half * half;
    let mut sum = term;
    let mut k = 0u32;
    loop {
        k += 1;
        term *= -q / (k as f64 * (k + n) as f64);
        sum += term;
        if (k as f64) > half && term.abs() <= 1e-17 * sum.abs().max(1e-300) {
            break;
        }
        if k > 500 {
            break;
        }
    }
    sum
}

fn miller(n: u32, x: f64) -> f64 {
    let top = (n as f64).max(x);
    let mut m = (top + 30.0 + (40.0 * top).sqrt()) as u32;
    m += m % 2;
    let mut next = 0.0f64; // J_{k+1}
    let mut cur = 1e-30f64; // J_k
    let mut norm = 0.0f64;
    let mut wanted = 0.0f64;
    for k in (1..=m).rev() {
        let prev = 2.0 * k as f64 / x * cur - next;
        next = cur;
        cur = prev;
        // cur now holds J_{k-1}
        let j = k - 1;
        if j == n {
            wanted = cur;
        }
        if j > 0 && j % 2 == 0 {
            norm += 2.0 * cur;
        }
        if cur.abs() > 1e250 {
            cur *= 1e-250;
            next *= 1e-250;
            norm *= 1e-250;
            wanted *= 1e-250;
        }
    }
    norm += cur;
    wanted / norm
}
