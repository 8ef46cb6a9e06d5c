//! Deterministic low-discrepancy direction sets: uniform angles on the
//! circle, Fibonacci lattice on the sphere. Used for boundary sampling,
//! multistart searches, and admissibility screening so reports are
//! reproducible run to run.

use crate::Vec3;
use std::f64::consts::TAU;

/// Uniformly spaced angles θ_i = 2π i / n.
pub fn circle_angles(n: usize) -> Vec<f64> {
    (0..n).map(|i| TAU * i as f64 / n as f64).collect()
}

/// Unit directions in the xy-plane at uniformly spaced angles.
pub fn circle_directions(n: usize) -> Vec<Vec3> {
    circle_angles(n)
        .into_iter()
        .map(|th| Vec3::new(th.cos(), th.sin(), 0.0))
        .collect()
}

/// Fibonacci (golden-angle) lattice on the unit sphere. Cell centers in z
/// keep samples off the poles.
pub fn fibonacci_sphere(n: usize) -> Vec<Vec3> {
    let golden_angle = std::f64::consts::PI * (3.0 - 5.0_f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
            let rho = (1.0 - z * z).max(0.0).sqrt();
            let phi = golden_angle * i as f64;
            Vec3::new(rho * phi.cos(), rho * phi.sin(), z)
        })
        .collect()
}

/// Dimension-appropriate low-discrepancy unit directions.
pub fn directions(dim: usize, n: usize) -> Vec<Vec3> {
    match dim {
        2 => circle_directions(n),
        _ => fibonacci_sphere(n),
    }
}

/// Cell-centered equirectangular grid on the sphere: `rows` polar bands,
/// `cols` azimuth columns, in row-major order.
pub fn equirect_directions(rows: usize, cols: usize) -> Vec<Vec3> {
    let mut out = Vec::with_capacity(rows * cols);
    for i in 0..rows {
        let polar = std::f64::consts::PI * (i as f64 + 0.5) / rows as f64;
        for j in 0..cols {
            let azimuth = TAU * j as f64 / cols as f64;
            out.push(Vec3::new(
                polar.sin() * azimuth.cos(),
                polar.sin() * azimuth.sin(),
                polar.cos(),
            ));
        }
    }
    out
}
