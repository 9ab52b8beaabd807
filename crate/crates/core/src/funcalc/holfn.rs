//! Analytic functions on sectors `Σ_θ = {z != 0 : |arg z| < θ}`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::matrix::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum FnClass {
    /// Bounded on the sector.
    Hinf,
    /// Bounded by `c |z|^s / (1 + |z|)^{2s}` on the sector.
    Hinf0,
}

/// Decay envelope `c |z|^s / (1 + |z|)^{2s}`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Decay {
    pub s: f64,
    pub c: f64,
}

impl Decay {
    pub fn envelope(&self, r: f64) -> f64 {
        self.c * r.powf(self.s) / (1.0 + r).powf(2.0 * self.s)
    }
}

type Eval = Arc<dyn Fn(C64) -> C64 + Send + Sync>;

/// Named analytic function on `Σ_θ` with its decay class.
#[derive(Clone)]
pub struct HolFn {
    name: String,
    theta: f64,
    class: FnClass,
    decay: Option<Decay>,
    /// Supremum of `|f|` on the probe grid.
    bound: f64,
    eval: Eval,
}

impl fmt::Debug for HolFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HolFn")
            .field("name", &self.name)
            .field("theta", &self.theta)
            .field("class", &self.class)
            .field("decay", &self.decay)
            .finish()
    }
}

/// Angle used for functions analytic on `C \ (-inf, 0]`.
const WIDE: f64 = 0.9 * PI;
/// Angle used for functions built from `e^{-z}`, bounded only inside the right half plane.
const NARROW: f64 = 0.45 * PI;

/// Probe points on `Σ_θ`: rays at several angles, radii log-spaced in `[1e-8, 1e8]`.
fn probe_points(theta: f64) -> Vec<C64> {
    let mut pts = Vec::new();
    for frac in [0.0, 0.5, 0.9, 1.0] {
        for sgn in [-1.0, 1.0] {
            let phi = sgn * frac * theta;
            for k in 0..=320 {
                let r = 10f64.powf(-8.0 + 16.0 * k as f64 / 320.0);
                pts.push(C64::from_polar(r, phi));
            }
        }
    }
    pts
}

impl HolFn {
    /// Builds a function, measuring its sup bound and, for `Hinf0`, the decay
    /// constant for exponent `s` on the probe grid.
    pub fn new<F>(name: impl Into<String>, theta: f64, class: FnClass, s: f64, f: F) -> Result<Self>
    where
        F: Fn(C64) -> C64 + Send + Sync + 'static,
    {
        if !(theta > 0.0 && theta < PI) {
            return Err(Error::Invalid(format!("sector angle {theta} must lie in (0, pi)")));
        }
        let pts = probe_points(theta);
        let mut bound = 0.0f64;
        let mut c = 0.0f64;
        for &z in &pts {
            let v = f(z).norm();
            if !v.is_finite() {
                return Err(Error::Numeric(format!("function is not finite at {z}")));
            }
            bound = bound.max(v);
            if class == FnClass::Hinf0 {
                let r = z.norm();
                c = c.max(v * (1.0 + r).powf(2.0 * s) / r.powf(s));
            }
        }
        let decay = match class {
            FnClass::Hinf0 => {
                if !(s > 0.0) {
                    return Err(Error::Invalid("decay exponent must be positive".into()));
                }
                Some(Decay { s, c: c * (1.0 + 1e-9) })
            }
            FnClass::Hinf => None,
        };
        Ok(HolFn { name: name.into(), theta, class, decay, bound, eval: Arc::new(f) })
    }

    fn with_decay(mut self, c: f64) -> Self {
        if let Some(d) = self.decay.as_mut() {
            d.c = d.c.max(c);
        }
        self
    }

    /// `g(z) = z / (1 + z)^2`.
    pub fn g() -> Self {
        let c = 2.0 / (1.0 + WIDE.cos());
        Self::new("g", WIDE, FnClass::Hinf0, 1.0, |z| z / ((ONE + z) * (ONE + z)))
            .expect("valid")
            .with_decay(c)
    }

    /// `g_n(z) = n^2 z / ((n + z)(1 + n z))`; `g_1 = g`.
    pub fn gn(n: f64) -> Result<Self> {
        if !(n > 0.0) {
            return Err(Error::Invalid(format!("g_n needs n > 0, got {n}")));
        }
        let c = 2.0 * n.max(1.0 / n) / (1.0 + WIDE.cos());
        Ok(Self::new(format!("gn:{n}"), WIDE, FnClass::Hinf0, 1.0, move |z| {
            z * (n * n) / ((z + n) * (ONE + z * n))
        })?
        .with_decay(c))
    }

    /// `z e^{-z}`.
    pub fn zexp() -> Self {
        Self::new("zexp", NARROW, FnClass::Hinf0, 1.0, |z| z * (-z).exp()).expect("valid")
    }

    /// `z^{1/2} e^{-z}`, principal branch.
    pub fn sqrtzexp() -> Self {
        Self::new("sqrtzexp", NARROW, FnClass::Hinf0, 0.5, |z| z.sqrt() * (-z).exp()).expect("valid")
    }

    /// `z^{is}`, principal branch; bounded by `e^{θ|s|}`.
    pub fn zis(s: f64) -> Self {
        Self::new(format!("zis:{s}"), WIDE, FnClass::Hinf, 0.0, move |z| {
            if z == ZERO {
                ZERO
            } else {
                (z.ln() * C64::new(0.0, s)).exp()
            }
        })
        .expect("valid")
    }

    /// `e^{-tz} - (1 + z)^{-1}`, a decaying stand-in for the heat semigroup.
    pub fn heat(t: f64) -> Result<Self> {
        if !(t >= 0.0) {
            return Err(Error::Invalid(format!("heat time must be nonnegative, got {t}")));
        }
        Self::new(format!("heat:{t}"), NARROW, FnClass::Hinf0, 1.0, move |z| (-z * t).exp() - ONE / (ONE + z))
    }

    /// Looks up a library function by id.
    pub fn from_id(id: &str) -> Result<Self> {
        let (head, arg) = match id.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (id, None),
        };
        let num = |a: Option<&str>| -> Result<f64> {
            a.ok_or_else(|| Error::Invalid(format!("function '{id}' needs an argument")))?
                .trim()
                .parse::<f64>()
                .map_err(|_| Error::Invalid(format!("bad numeric argument in '{id}'")))
        };
        match head {
            "g" => Ok(Self::g()),
            "gn" => Self::gn(num(arg)?),
            "zexp" => Ok(Self::zexp()),
            "sqrtzexp" => Ok(Self::sqrtzexp()),
            "zis" => Ok(Self::zis(num(arg)?)),
            "heat" => Self::heat(num(arg)?),
            _ => Err(Error::Invalid(format!(
                "unknown function '{id}' (expected g, gn:<n>, zexp, sqrtzexp, zis:<s>, heat:<t>)"
            ))),
        }
    }

    /// Pointwise product, analytic on the smaller sector.
    pub fn product(a: &HolFn, b: &HolFn) -> HolFn {
        let (fa, fb) = (a.eval.clone(), b.eval.clone());
        let theta = a.theta.min(b.theta);
        let decay = match (a.decay, b.decay) {
            (Some(da), Some(db)) if da.s <= db.s => Some(Decay { s: da.s, c: da.c * b.bound }),
            (Some(_), Some(db)) => Some(Decay { s: db.s, c: db.c * a.bound }),
            (Some(da), None) => Some(Decay { s: da.s, c: da.c * b.bound }),
            (None, Some(db)) => Some(Decay { s: db.s, c: db.c * a.bound }),
            (None, None) => None,
        };
        HolFn {
            name: format!("{}*{}", a.name, b.name),
            theta,
            class: if decay.is_some() { FnClass::Hinf0 } else { FnClass::Hinf },
            decay,
            bound: a.bound * b.bound,
            eval: Arc::new(move |z| fa(z) * fb(z)),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn class(&self) -> FnClass {
        self.class
    }

    pub fn decay(&self) -> Option<Decay> {
        self.decay
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn eval(&self, z: C64) -> C64 {
        (self.eval)(z)
    }

    /// Value used on the kernel of an operator: `f(0)` is replaced by zero.
    pub fn eval_ring(&self, z: C64, zero_tol: f64) -> C64 {
        if z.norm() <= zero_tol {
            ZERO
        } else {
            self.eval(z)
        }
    }

    pub fn is_narrow(&self) -> bool {
        self.theta <= FRAC_PI_2
    }
}

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
