use crate::geometry::{theta, theta_perp, Vec2};

use super::MotionModel;

/// Rigid rotation `Γ_φ x = R(rate·φ) x`.
///
/// The curve function reduces to `H(φ, x) = x · θ((1 + rate)φ)`, so all the
/// curves are straight lines and the immersion determinant is the constant
/// `1 + rate`.
#[derive(Debug, Clone, PartialEq)]
pub struct Rotation {
    name: String,
    rate: f64,
}

impl Rotation {
    pub fn new(name: impl Into<String>, rate: f64) -> Self {
        Rotation {
            name: name.into(),
            rate,
        }
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    /// Angular speed of the conormal `N(φ, x) = θ(kφ)`.
    pub fn conormal_speed(&self) -> f64 {
        1.0 + self.rate
    }
}

/// Static object.
pub fn identity() -> Rotation {
    Rotation::new("identity", 0.0)
}

/// Object turning against the source at the same speed; smoothly periodic.
pub fn counter_rotation() -> Rotation {
    Rotation::new("counter_rotation", 1.0)
}

/// Object turning with the source at two thirds of its speed, so the
/// effective scan covers one third of a turn; not periodic.
pub fn third_rotation() -> Rotation {
    Rotation::new("third_rotation", -2.0 / 3.0)
}

impl MotionModel for Rotation {
    fn name(&self) -> &str {
        &self.name
    }

    fn forward(&self, phi: f64, x: Vec2) -> Vec2 {
        x.rotate(self.rate * phi)
    }

    fn inverse(&self, phi: f64, x: Vec2) -> Vec2 {
        x.rotate(-self.rate * phi)
    }

    fn is_periodic(&self) -> bool {
        (self.rate - self.rate.round()).abs() < 1e-12
    }

    fn jacobian_det_inverse(&self, _phi: f64, _x: Vec2) -> f64 {
        1.0
    }

    fn h(&self, phi: f64, x: Vec2) -> f64 {
        x.dot(theta(self.conormal_speed() * phi))
    }

    fn h_and_jacobian(&self, phi: f64, x: Vec2) -> (f64, f64) {
        (self.h(phi, x), 1.0)
    }

    fn grad_h(&self, phi: f64, _x: Vec2) -> Option<Vec2> {
        Some(theta(self.conormal_speed() * phi))
    }

    fn dphi_h(&self, phi: f64, x: Vec2) -> Option<f64> {
        let k = self.conormal_speed();
        Some(k * x.dot(theta_perp(k * phi)))
    }

    fn grad_dphi_h(&self, phi: f64, _x: Vec2) -> Option<Vec2> {
        let k = self.conormal_speed();
        Some(theta_perp(k * phi) * k)
    }
}

/// Rotation followed by a particle-dependent polynomial scaling:
/// `Γ_φ x = Γ_φ^scal(R(rate·φ) x)` with `(Γ_φ^scal y)_i = y_i s_i(φ, y)`,
/// `s_i = Σ_{j=0}^{4} (c_i y_i)^j`, `c_i = (5 m_i)^{1/4}` and
/// `m_i = sin(a_i φ p / π)`.
///
/// For `φ < 0` the fourth root is extended oddly, `c_i = sign(m_i)|5 m_i|^{1/4}`.
/// The scalar map `t ↦ t s(t)` has derivative `1 + 2u + 3u² + 4u³ + 5u⁴`
/// (with `u = c t`), which stays above 0.5 for all real `u`, so it is
/// inverted per coordinate by safeguarded Newton iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct NonAffine {
    pub rotation_rate: f64,
    /// Number of projection angles `p` entering the scaling frequencies.
    pub p: f64,
    /// Frequency constants `a_1, a_2` of `m_1, m_2`.
    pub scaling_rates: [f64; 2],
}

impl Default for NonAffine {
    fn default() -> Self {
        NonAffine {
            rotation_rate: -2.0 / 3.0,
            p: 300.0,
            scaling_rates: [5e-5, 7e-5],
        }
    }
}

pub fn nonaffine() -> NonAffine {
    NonAffine::default()
}

/// Lower bound of `1 + 2u + 3u² + 4u³ + 5u⁴` over the reals.
const MIN_SLOPE: f64 = 0.5;

#[inline]
fn scaled(c: f64, t: f64) -> f64 {
    let u = c * t;
    t * (1.0 + u * (1.0 + u * (1.0 + u * (1.0 + u))))
}

#[inline]
fn scaled_slope(c: f64, t: f64) -> f64 {
    let u = c * t;
    1.0 + u * (2.0 + u * (3.0 + u * (4.0 + 5.0 * u)))
}

/// Solves `scaled(c, t) = y` for `t`.
fn invert_scaled(c: f64, y: f64) -> f64 {
    if c == 0.0 || y == 0.0 {
        return y;
    }
    let bound = y.abs() / MIN_SLOPE;
    let (mut lo, mut hi) = (-bound, bound);
    // start from the linearization at 0
    let mut t = y;
    for _ in 0..100 {
        let r = scaled(c, t) - y;
        if r == 0.0 {
            return t;
        }
        if r > 0.0 {
            hi = t;
        } else {
            lo = t;
        }
        let mut next = t - r / scaled_slope(c, t);
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - t).abs() <= 1e-15 * (1.0 + t.abs()) {
            return next;
        }
        t = next;
    }
    t
}

impl NonAffine {
    /// Scaling coefficients `(c_1, c_2)` at angle φ.
    pub fn coefficients(&self, phi: f64) -> [f64; 2] {
        let scale = phi * self.p / std::f64::consts::PI;
        self.scaling_rates.map(|a| {
            let m = (a * scale).sin();
            (5.0 * m).abs().powf(0.25).copysign(m)
        })
    }

    fn unrotated_inverse(&self, phi: f64, x: Vec2) -> (Vec2, [f64; 2]) {
        let [c1, c2] = self.coefficients(phi);
        let z = Vec2::new(invert_scaled(c1, x.x), invert_scaled(c2, x.y));
        (z, [scaled_slope(c1, z.x), scaled_slope(c2, z.y)])
    }
}

impl MotionModel for NonAffine {
    fn name(&self) -> &str {
        "nonaffine"
    }

    fn forward(&self, phi: f64, x: Vec2) -> Vec2 {
        let y = x.rotate(self.rotation_rate * phi);
        let [c1, c2] = self.coefficients(phi);
        Vec2::new(scaled(c1, y.x), scaled(c2, y.y))
    }

    fn inverse(&self, phi: f64, x: Vec2) -> Vec2 {
        self.unrotated_inverse(phi, x).0.rotate(-self.rotation_rate * phi)
    }

    fn is_periodic(&self) -> bool {
        false
    }

    fn jacobian_det_inverse(&self, phi: f64, x: Vec2) -> f64 {
        let (_, [d1, d2]) = self.unrotated_inverse(phi, x);
        1.0 / (d1 * d2).abs()
    }

    fn h(&self, phi: f64, x: Vec2) -> f64 {
        let (z, _) = self.unrotated_inverse(phi, x);
        z.dot(theta((1.0 + self.rotation_rate) * phi))
    }

    fn h_and_jacobian(&self, phi: f64, x: Vec2) -> (f64, f64) {
        let (z, [d1, d2]) = self.unrotated_inverse(phi, x);
        (
            z.dot(theta((1.0 + self.rotation_rate) * phi)),
            1.0 / (d1 * d2).abs(),
        )
    }

    fn grad_h(&self, phi: f64, x: Vec2) -> Option<Vec2> {
        let (_, [d1, d2]) = self.unrotated_inverse(phi, x);
        let th = theta((1.0 + self.rotation_rate) * phi);
        Some(Vec2::new(th.x / d1, th.y / d2))
    }
}
