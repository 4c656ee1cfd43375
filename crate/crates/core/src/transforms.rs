//! Amplitude-invariant Clarke/Park reference-frame transforms.
//!
//! The d-axis is aligned with phase a when `theta = 0`, so the stationary
//! frame used by the motor model is `(d, q) = (alpha, beta)`.

const SQRT3_2: f64 = 0.866_025_403_784_438_6;

/// Three instantaneous phase quantities (volts or amps).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Abc {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl Abc {
    pub fn new(a: f64, b: f64, c: f64) -> Self {
        Self { a, b, c }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.a, self.b, self.c]
    }

    pub fn from_array(v: [f64; 3]) -> Self {
        Self::new(v[0], v[1], v[2])
    }
}

/// Direct, quadrature and zero-sequence components.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Dq0 {
    pub d: f64,
    pub q: f64,
    pub zero: f64,
}

impl Dq0 {
    pub fn new(d: f64, q: f64, zero: f64) -> Self {
        Self { d, q, zero }
    }
}

/// Stationary two-axis components (zero sequence dropped).
pub fn clarke(abc: Abc) -> (f64, f64) {
    let alpha = (2.0 * abc.a - abc.b - abc.c) / 3.0;
    let beta = (abc.b - abc.c) / 3.0_f64.sqrt();
    (alpha, beta)
}

/// Phase quantities from stationary components, assuming zero sequence is zero.
pub fn inverse_clarke(alpha: f64, beta: f64) -> Abc {
    Abc {
        a: alpha,
        b: -0.5 * alpha + SQRT3_2 * beta,
        c: -0.5 * alpha - SQRT3_2 * beta,
    }
}

/// Combined Clarke + Park transform into a frame at electrical angle `theta`.
pub fn clarke_park(abc: Abc, theta: f64) -> Dq0 {
    let (alpha, beta) = clarke(abc);
    let (s, c) = theta.sin_cos();
    Dq0 {
        d: alpha * c + beta * s,
        q: -alpha * s + beta * c,
        zero: (abc.a + abc.b + abc.c) / 3.0,
    }
}

/// Exact inverse of [`clarke_park`].
pub fn inverse_clarke_park(dq0: Dq0, theta: f64) -> Abc {
    let (s, c) = theta.sin_cos();
    let alpha = dq0.d * c - dq0.q * s;
    let beta = dq0.d * s + dq0.q * c;
    let ab = inverse_clarke(alpha, beta);
    Abc {
        a: ab.a + dq0.zero,
        b: ab.b + dq0.zero,
        c: ab.c + dq0.zero,
    }
}

/// Unit vector of a phase winding axis in the stationary frame
/// (a at 0, b at +120 degrees, c at -120 degrees).
pub(crate) fn phase_axis(phase: usize) -> (f64, f64) {
    PHASE_AXES[phase]
}

const PHASE_AXES: [(f64, f64); 3] = [(1.0, 0.0), (-0.5, SQRT3_2), (-0.5, -SQRT3_2)];
