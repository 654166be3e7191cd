/// Trapezoid nodes used for Gaussian jitter convolution (odd, so one node
/// sits on the kernel centre).
pub const CONVOLUTION_NODES: usize = 129;

/// Half-width of the convolution kernel in standard deviations.
pub const KERNEL_SPAN: f64 = 5.0;

/// Normalized trapezoid weights for a Gaussian of unit σ sampled on
/// `nodes` evenly spaced points over ±`KERNEL_SPAN`.
pub fn gaussian_kernel(nodes: usize) -> Vec<(f64, f64)> {
    let nodes = nodes.max(3);
    let h = 2.0 * KERNEL_SPAN / (nodes - 1) as f64;
    let mut k: Vec<(f64, f64)> = (0..nodes)
        .map(|i| {
            let x = -KERNEL_SPAN + i as f64 * h;
            let end = if i == 0 || i == nodes - 1 { 0.5 } else { 1.0 };
            (x, end * (-0.5 * x * x).exp())
        })
        .collect();
    let mass: f64 = k.iter().map(|(_, w)| w).sum();
    for (_, w) in &mut k {
        *w /= mass;
    }
    k
}

/// (f ∗ N(0, σ²))(x) with a precomputed unit kernel. σ = 0 returns f(x).
#[inline]
pub fn convolve_with<F: Fn(f64) -> f64>(f: F, x: f64, sigma: f64, kernel: &[(f64, f64)]) -> f64 {
    if sigma <= 0.0 {
        return f(x);
    }
    kernel.iter().map(|&(u, w)| w * f(x - sigma * u)).sum()
}
