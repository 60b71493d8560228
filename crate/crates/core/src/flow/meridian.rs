//! Osculating circles of the meridian curve of an axisymmetric radial graph.
//!
//! Points live in the meridian half-plane `(r, z)`, with `r` the distance to
//! the symmetry axis. Circles through neighbouring points reproduce every
//! sphere centered on the axis exactly, which is what makes the caps exact
//! discrete equilibria of the flow.

pub(crate) type P2 = [f64; 2];

#[inline]
fn sub(a: P2, b: P2) -> P2 {
    [a[0] - b[0], a[1] - b[1]]
}

#[inline]
fn dot(a: P2, b: P2) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
fn cross(a: P2, b: P2) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

/// Outward unit normal at `at` and curvature of the circle through `prev`,
/// `at`, `next`, ordered by increasing polar angle. The curvature is
/// positive when the curve bends away from the normal, as a sphere does.
#[inline]
pub(crate) fn three_point(prev: P2, at: P2, next: P2) -> (P2, f64) {
    let a = sub(next, at);
    let b = sub(prev, at);
    let (la2, lb2) = (dot(a, a), dot(b, b));
    // Tangent of the circle at the middle point.
    let t = [a[0] * lb2 - b[0] * la2, a[1] * lb2 - b[1] * la2];
    let lt = t[0].hypot(t[1]);
    let normal = [-t[1] / lt, t[0] / lt];
    let d = sub(a, b);
    let kappa = -2.0 * cross(a, b) / (la2.sqrt() * lb2.sqrt() * dot(d, d).sqrt());
    (normal, kappa)
}

/// Curvature of the circle through `prev` and `at` whose outward normal at
/// `at` is `normal`.
#[inline]
pub(crate) fn two_point(prev: P2, at: P2, normal: P2) -> f64 {
    let b = sub(prev, at);
    -2.0 * dot(b, normal) / dot(b, b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn on_circle(center: P2, r: f64, angle: f64) -> P2 {
        [center[0] + r * angle.sin(), center[1] + r * angle.cos()]
    }

    #[test]
    fn recovers_circles_from_uneven_points() {
        let (center, r) = ([0.0, -0.4], 1.3);
        for (a0, da, db) in [(0.3, 0.01, 0.013), (1.0, 0.2, 0.05), (0.0, 0.1, 0.1)] {
            let at = on_circle(center, r, a0);
            let (normal, kappa) = three_point(on_circle(center, r, a0 - db), at, on_circle(center, r, a0 + da));
            assert!((kappa - 1.0 / r).abs() < 1e-10, "{kappa}");
            let exact = [a0.sin(), a0.cos()];
            assert!((normal[0] - exact[0]).abs() < 1e-10 && (normal[1] - exact[1]).abs() < 1e-10);
            let k2 = two_point(on_circle(center, r, a0 - db), at, exact);
            assert!((k2 - 1.0 / r).abs() < 1e-10);
        }
    }

    #[test]
    fn straight_line_has_zero_curvature() {
        let (normal, kappa) = three_point([0.0, 1.0], [0.5, 0.5], [1.2, -0.2]);
        assert!(kappa.abs() < 1e-15);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((normal[0] - s).abs() < 1e-15 && (normal[1] - s).abs() < 1e-15);
    }
}
