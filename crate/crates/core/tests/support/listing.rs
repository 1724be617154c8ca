//! Line-by-line port of the reference Python implementation, on plain `Vec<f64>`.
//!
//! The listing starts from `gamma = gamma0` with `k = 1`, so calling it with
//! `gamma0 = 2·γ₀` gives the `γ_k = γ₀·2^k` indexing used by the library.
//! It has no projection step and is only meaningful on the whole space.

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

fn step(x: &[f64], eta: f64, g: &[f64]) -> Vec<f64> {
    x.iter().zip(g).map(|(a, b)| a - eta * b).collect()
}

/// Returns the trajectory `x_1, …, x_{iters+1}`.
pub fn free_adagrad(
    iters: usize,
    get_subgrad: impl Fn(&[f64]) -> Vec<f64>,
    x1: &[f64],
    gamma0: f64,
) -> Vec<Vec<f64>> {
    let mut s = 0.0;
    let mut gamma_acc = 0.0;
    let mut k = 1u32;
    let mut gamma = gamma0;

    let mut x = x1.to_vec();
    let mut trajectory = vec![x1.to_vec()];

    for _ in 0..iters {
        let g = get_subgrad(&x);
        let norm_g = norm(&g);
        s += norm_g.powi(2);
        let h = ((s + 1.0) * (1.0 + (1.0 + s).ln())).sqrt();
        let x_plus = loop {
            let x_plus = step(&x, gamma / h, &g);
            let b = (2.0 / f64::from(k).sqrt()) * gamma + (gamma_acc + (gamma * norm_g / h).powi(2)).sqrt();
            let diff: Vec<f64> = x_plus.iter().zip(x1).map(|(a, b)| a - b).collect();
            if norm(&diff) > b {
                k += 1;
                gamma *= 2.0;
            } else {
                gamma_acc += (gamma * (norm_g / h)).powi(2);
                break x_plus;
            }
        };
        x = x_plus;
        trajectory.push(x.clone());
    }
    trajectory
}

/// `x/‖x‖`, or zero at the origin.
pub fn l2_subgrad(x: &[f64]) -> Vec<f64> {
    let n = norm(x);
    if n == 0.0 {
        vec![0.0; x.len()]
    } else {
        x.iter().map(|a| a / n).collect()
    }
}

/// Largest coordinate gap between the port and the library over a whole trajectory.
pub fn max_gap(port: &[Vec<f64>], lib: &[Vec<f64>]) -> f64 {
    assert_eq!(port.len(), lib.len());
    port.iter()
        .zip(lib)
        .flat_map(|(a, b)| a.iter().zip(b).map(|(u, v)| (u - v).abs()))
        .fold(0.0, f64::max)
}
