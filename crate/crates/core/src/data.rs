//! Space-time data and the presets used by configs and randomized runs.

use std::fmt;
use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::kernel::{PointField, Support};

/// A function of `(x, t)`.
#[derive(Clone)]
pub struct SpaceTimeField {
    eval: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
}

impl fmt::Debug for SpaceTimeField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("SpaceTimeField")
    }
}

impl SpaceTimeField {
    pub fn new(eval: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            eval: Arc::new(eval),
        }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(move |_, _| c)
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    /// Time-independent field.
    pub fn steady(p: PointField) -> Self {
        Self::new(move |x, _| p.eval(x))
    }

    pub fn eval(&self, x: f64, t: f64) -> f64 {
        (self.eval)(x, t)
    }

    /// `(x, t) ↦ e^{rate·t} f(x, t)`.
    pub fn exp_modulated(&self, rate: f64) -> Self {
        let inner = self.eval.clone();
        Self::new(move |x, t| (rate * t).exp() * inner(x, t))
    }

    pub fn scaled(&self, a: f64) -> Self {
        let inner = self.eval.clone();
        Self::new(move |x, t| a * inner(x, t))
    }

    pub fn plus(&self, other: &SpaceTimeField) -> Self {
        let (f, g) = (self.eval.clone(), other.eval.clone());
        Self::new(move |x, t| f(x, t) + g(x, t))
    }
}

/// Caller-asserted bounds on the data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupNorms {
    pub source: f64,
    pub exterior: f64,
    pub initial: f64,
}

#[derive(Debug, Clone)]
pub struct ProblemData {
    pub source: SpaceTimeField,
    /// `g` on the collar; `None` for the Dirichlet problem.
    pub exterior_datum: Option<SpaceTimeField>,
    pub initial: PointField,
    pub sup_norms: Option<SupNorms>,
}

impl ProblemData {
    pub fn dirichlet(source: SpaceTimeField, initial: PointField) -> Self {
        Self {
            source,
            exterior_datum: None,
            initial,
            sup_norms: None,
        }
    }

    pub fn robin(source: SpaceTimeField, exterior: SpaceTimeField, initial: PointField) -> Self {
        Self {
            source,
            exterior_datum: Some(exterior),
            initial,
            sup_norms: None,
        }
    }

    pub fn with_sup_norms(mut self, norms: SupNorms) -> Self {
        self.sup_norms = Some(norms);
        self
    }

    pub fn zero_robin() -> Self {
        Self::robin(
            SpaceTimeField::zero(),
            SpaceTimeField::zero(),
            PointField::constant(0.0),
        )
    }

    pub fn zero_dirichlet() -> Self {
        Self::dirichlet(SpaceTimeField::zero(), PointField::constant(0.0))
    }

    pub fn exterior(&self) -> Result<&SpaceTimeField> {
        self.exterior_datum
            .as_ref()
            .ok_or_else(|| Error::MissingData("exterior datum g".into()))
    }

    /// `ζ = e^{-t} f`, `η = e^{-t} g`.
    pub fn transformed(&self) -> Result<Self> {
        Ok(Self {
            source: self.source.exp_modulated(-1.0),
            exterior_datum: Some(self.exterior()?.exp_modulated(-1.0)),
            initial: self.initial.clone(),
            sup_norms: self.sup_norms,
        })
    }
}

/// Named data shapes. Spatial presets are time-independent unless wrapped in
/// [`Preset::Modulated`].
#[derive(Debug, Clone, PartialEq)]
pub enum Preset {
    Zero,
    Constant(f64),
    /// `amplitude (1 - r²)²` for `|r| < 1`, `r = (x - center) / radius`.
    Bump {
        center: f64,
        radius: f64,
        amplitude: f64,
    },
    /// `Σ c_k x^k`.
    Polynomial(Vec<f64>),
    /// `e^{rate·t}` times the inner preset.
    Modulated {
        rate: f64,
        inner: Box<Preset>,
    },
    Sum(Vec<Preset>),
}

impl Preset {
    pub fn validate(&self) -> Result<()> {
        match self {
            Preset::Bump { radius, .. } if !(*radius > 0.0) => {
                Err(Error::param("radius", "bump radius must be positive"))
            }
            Preset::Modulated { inner, .. } => inner.validate(),
            Preset::Sum(parts) => parts.iter().try_for_each(Preset::validate),
            _ => Ok(()),
        }
    }

    fn spatial(&self, x: f64) -> f64 {
        match self {
            Preset::Zero => 0.0,
            Preset::Constant(c) => *c,
            Preset::Bump {
                center,
                radius,
                amplitude,
            } => {
                let r = (x - center) / radius;
                if r.abs() < 1.0 {
                    amplitude * (1.0 - r * r).powi(2)
                } else {
                    0.0
                }
            }
            Preset::Polynomial(c) => c.iter().rev().fold(0.0, |acc, &ck| acc * x + ck),
            Preset::Modulated { inner, .. } => inner.spatial(x),
            Preset::Sum(parts) => parts.iter().map(|p| p.spatial(x)).sum(),
        }
    }

    pub fn eval(&self, x: f64, t: f64) -> f64 {
        match self {
            Preset::Modulated { rate, inner } => (rate * t).exp() * inner.eval(x, t),
            Preset::Sum(parts) => parts.iter().map(|p| p.eval(x, t)).sum(),
            other => other.spatial(x),
        }
    }

    pub fn space_time(&self) -> SpaceTimeField {
        let p = self.clone();
        SpaceTimeField::new(move |x, t| p.eval(x, t))
    }

    /// The preset at `t = 0`.
    pub fn point_field(&self) -> PointField {
        let p = self.clone();
        match self {
            Preset::Bump { center, radius, .. } => {
                PointField::bounded(center - radius, center + radius, move |x| p.eval(x, 0.0))
            }
            Preset::Zero => PointField::constant(0.0),
            _ => PointField::new(
                Support::Unbounded {
                    cutoff: f64::INFINITY,
                    tail_bound: f64::INFINITY,
                },
                move |x| p.eval(x, 0.0),
            ),
        }
    }

    /// A random nonnegative preset: a constant floor plus one or two bumps,
    /// sometimes decaying in time.
    pub fn random_nonnegative<R: Rng>(rng: &mut R, span: (f64, f64)) -> Preset {
        let mut parts = vec![Preset::Constant(rng.gen_range(0.0..0.5))];
        for _ in 0..rng.gen_range(1..=2) {
            parts.push(Preset::Bump {
                center: rng.gen_range(span.0..span.1),
                radius: rng.gen_range(0.2..1.0) * (span.1 - span.0) / 2.0,
                amplitude: rng.gen_range(0.1..2.0),
            });
        }
        let p = Preset::Sum(parts);
        if rng.gen_bool(0.3) {
            Preset::Modulated {
                rate: -rng.gen_range(0.0..2.0),
                inner: Box::new(p),
            }
        } else {
            p
        }
    }

    /// A random preset of either sign.
    pub fn random_signed<R: Rng>(rng: &mut R, span: (f64, f64)) -> Preset {
        let mut parts = vec![Preset::Constant(rng.gen_range(-0.5..0.5))];
        for _ in 0..rng.gen_range(1..=3) {
            parts.push(Preset::Bump {
                center: rng.gen_range(span.0..span.1),
                radius: rng.gen_range(0.2..1.0) * (span.1 - span.0) / 2.0,
                amplitude: rng.gen_range(-2.0..2.0),
            });
        }
        Preset::Sum(parts)
    }

    pub fn negated(&self) -> Preset {
        self.scaled(-1.0)
    }

    pub fn scaled(&self, a: f64) -> Preset {
        match self {
            Preset::Zero => Preset::Zero,
            Preset::Constant(c) => Preset::Constant(a * c),
            Preset::Bump {
                center,
                radius,
                amplitude,
            } => Preset::Bump {
                center: *center,
                radius: *radius,
                amplitude: a * amplitude,
            },
            Preset::Polynomial(c) => Preset::Polynomial(c.iter().map(|v| a * v).collect()),
            Preset::Modulated { rate, inner } => Preset::Modulated {
                rate: *rate,
                inner: Box::new(inner.scaled(a)),
            },
            Preset::Sum(parts) => Preset::Sum(parts.iter().map(|p| p.scaled(a)).collect()),
        }
    }

    /// `self + other`.
    pub fn plus(&self, other: &Preset) -> Preset {
        Preset::Sum(vec![self.clone(), other.clone()])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn bump_shape() {
        let b = Preset::Bump {
            center: 0.0,
            radius: 0.5,
            amplitude: 2.0,
        };
        assert_eq!(b.eval(0.0, 3.0), 2.0);
        assert_eq!(b.eval(0.5, 0.0), 0.0);
        assert!((b.eval(0.25, 0.0) - 2.0 * 0.75f64.powi(2)).abs() < 1e-15);
    }

    #[test]
    fn modulation_and_negation() {
        let p = Preset::Modulated {
            rate: -1.0,
            inner: Box::new(Preset::Polynomial(vec![1.0, 2.0])),
        };
        assert!((p.eval(0.5, 1.0) - 2.0 * (-1.0f64).exp()).abs() < 1e-15);
        assert!((p.negated().eval(0.5, 1.0) + p.eval(0.5, 1.0)).abs() < 1e-15);
    }

    #[test]
    fn random_nonnegative_presets_are_nonnegative() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let p = Preset::random_nonnegative(&mut rng, (-1.0, 1.0));
            for i in 0..=40 {
                let x = -3.0 + 0.15 * i as f64;
                assert!(p.eval(x, 0.7) >= 0.0);
            }
        }
    }

    #[test]
    fn transformed_data_decays() {
        let d = ProblemData::robin(
            SpaceTimeField::constant(2.0),
            SpaceTimeField::constant(3.0),
            PointField::constant(0.0),
        );
        let t = d.transformed().unwrap();
        assert!((t.source.eval(0.0, 1.0) - 2.0 / std::f64::consts::E).abs() < 1e-15);
        assert!((t.exterior().unwrap().eval(5.0, 2.0) - 3.0 * (-2.0f64).exp()).abs() < 1e-15);
        assert!(ProblemData::zero_dirichlet().transformed().is_err());
    }
}
