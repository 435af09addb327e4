//! Wavefield models, their restriction to stations and wavefront-set bookkeeping.

use crate::error::{invalid, Error, Result};
use crate::regularize::CutoffChi;
use crate::scalar::{signum0, Real};

/// Space-time wavefield from the catalog.
#[derive(Debug, Clone, PartialEq)]
pub enum WaveField<T> {
    /// `δ(x - c·s)`.
    DeltaTravel { speed: T },
    /// `H(x - c·t)`.
    HeavisideShock { speed: T },
    /// `∫ e^{i(t|ξ| - xξ/c)} χ(ξ/c)/(c|ξ|) dξ`.
    OIPlane { speed: T, cutoff: CutoffChi<T> },
    /// `δ(x)`, constant in time. Synthetic and not restrictable at `x = 0`; exists so the
    /// failure branch of [`check_restrictability`] can be exercised.
    StaticDelta,
}

/// Variant selector for [`build_field`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldKind {
    DeltaTravel,
    HeavisideShock,
    OIPlane,
    StaticDelta,
}

/// Unvalidated field description.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSpec<T> {
    pub kind: FieldKind,
    pub speed: T,
    /// Only read for `OIPlane`; the default cutoff is used when absent.
    pub cutoff: Option<CutoffChi<T>>,
}

impl<T: Real> FieldSpec<T> {
    pub fn new(kind: FieldKind, speed: T) -> Self {
        Self { kind, speed, cutoff: None }
    }
}

pub fn build_field<T: Real>(spec: &FieldSpec<T>) -> Result<WaveField<T>> {
    if spec.kind == FieldKind::StaticDelta {
        return Ok(WaveField::StaticDelta);
    }
    if !(spec.speed > T::zero()) || !spec.speed.is_finite() {
        return Err(invalid(format!("field speed must be positive and finite, got {}", spec.speed)));
    }
    let speed = spec.speed;
    Ok(match spec.kind {
        FieldKind::DeltaTravel => WaveField::DeltaTravel { speed },
        FieldKind::HeavisideShock => WaveField::HeavisideShock { speed },
        FieldKind::OIPlane => {
            let cutoff = match &spec.cutoff {
                Some(c) => CutoffChi::new(c.r0(), c.r1())?,
                None => CutoffChi::default(),
            };
            WaveField::OIPlane { speed, cutoff }
        }
        FieldKind::StaticDelta => unreachable!(),
    })
}

impl<T: Real> WaveField<T> {
    pub fn speed(&self) -> Option<T> {
        match self {
            Self::DeltaTravel { speed } | Self::HeavisideShock { speed } | Self::OIPlane { speed, .. } => Some(*speed),
            Self::StaticDelta => None,
        }
    }

    /// OI amplitude `χ(ξ/c)/(c|ξ|)`; zero for the other variants.
    pub fn amplitude(&self, xi: T) -> T {
        match self {
            Self::OIPlane { speed, cutoff } => {
                let chi = cutoff.eval(xi / *speed);
                if chi == T::zero() {
                    T::zero()
                } else {
                    chi / (*speed * xi.abs())
                }
            }
            _ => T::zero(),
        }
    }
}

/// A cotangent vector `(x, t; ξ, τ)` of the space-time wavefront set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Covector<T> {
    pub x: T,
    pub t: T,
    pub xi: T,
    pub tau: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RestrictionReport<T> {
    pub ok: bool,
    /// A purely spatial covector `(x, t; ξ, 0)` in the wavefront set, when one exists.
    pub witness: Option<Covector<T>>,
}

/// Checks that no covector `(x, t; ξ, 0)` lies in `WF(field)`, i.e. that the restriction to
/// the station `{x} × ℝ` is defined.
pub fn check_restrictability<T: Real>(field: &WaveField<T>, x: T) -> RestrictionReport<T> {
    let ok = RestrictionReport { ok: true, witness: None };
    match field {
        // WF is conormal to x = c·t: covectors ∝ (1, -c), never with τ = 0.
        WaveField::DeltaTravel { .. } | WaveField::HeavisideShock { .. } => ok,
        // Stationary set of t|ξ| - xξ/c carries τ = ∂_tφ = |ξ|, nonzero on supp χ.
        WaveField::OIPlane { .. } => ok,
        WaveField::StaticDelta => {
            if x == T::zero() {
                RestrictionReport {
                    ok: false,
                    witness: Some(Covector { x, t: T::zero(), xi: T::one(), tau: T::zero() }),
                }
            } else {
                ok
            }
        }
    }
}

/// Phase `φ_x(t, ξ) = t|ξ| - xξ/c` of a plane OI frozen at station `x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseDescriptor<T> {
    pub station: T,
    pub speed: T,
}

impl<T: Real> PhaseDescriptor<T> {
    pub const HOMOGENEITY_DEGREE: u32 = 1;

    pub fn value(&self, t: T, xi: T) -> T {
        t * xi.abs() - self.station * xi / self.speed
    }

    pub fn dt(&self, _t: T, xi: T) -> T {
        xi.abs()
    }

    pub fn dxi(&self, t: T, xi: T) -> T {
        t * signum0(xi) - self.station / self.speed
    }
}

/// Amplitude `χ(ξ/c)/(c|ξ|)` of a plane OI.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeDescriptor<T> {
    pub speed: T,
    pub cutoff: CutoffChi<T>,
}

impl<T: Real> AmplitudeDescriptor<T> {
    pub fn eval(&self, xi: T) -> T {
        let chi = self.cutoff.eval(xi / self.speed);
        if chi == T::zero() {
            T::zero()
        } else {
            chi / (self.speed * xi.abs())
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TraceKind<T> {
    Atom { location: T, weight: T },
    Jump { location: T, left: T, right: T },
    OI { phase: PhaseDescriptor<T>, amplitude: AmplitudeDescriptor<T> },
}

/// Distribution in time recorded at a station.
#[derive(Debug, Clone, PartialEq)]
pub struct StationTrace<T> {
    pub station: T,
    pub kind: TraceKind<T>,
}

impl<T: Real> StationTrace<T> {
    pub fn atom(station: T, location: T, weight: T) -> Result<Self> {
        if weight == T::zero() || !weight.is_finite() || !location.is_finite() {
            return Err(invalid("atom needs a finite location and a nonzero finite weight"));
        }
        Ok(Self { station, kind: TraceKind::Atom { location, weight } })
    }

    pub fn jump(station: T, location: T, left: T, right: T) -> Result<Self> {
        if left == right || !left.is_finite() || !right.is_finite() || !location.is_finite() {
            return Err(invalid("jump needs distinct finite one-sided values"));
        }
        Ok(Self { station, kind: TraceKind::Jump { location, left, right } })
    }
}

/// Restriction of `field` to `{x} × ℝ`.
pub fn restrict_to_station<T: Real>(field: &WaveField<T>, x: T) -> Result<StationTrace<T>> {
    if x == T::zero() || !x.is_finite() {
        return Err(invalid("station must be a finite nonzero x"));
    }
    let report = check_restrictability(field, x);
    if let Some(w) = report.witness {
        return Err(Error::NotRestrictable { x: w.x.as_f64(), t: w.t.as_f64(), xi: w.xi.as_f64() });
    }
    match field {
        WaveField::DeltaTravel { speed } => StationTrace::atom(x, x / *speed, speed.recip()),
        WaveField::HeavisideShock { speed } => StationTrace::jump(x, x / *speed, T::one(), T::zero()),
        WaveField::OIPlane { speed, cutoff } => Ok(StationTrace {
            station: x,
            kind: TraceKind::OI {
                phase: PhaseDescriptor { station: x, speed: *speed },
                amplitude: AmplitudeDescriptor { speed: *speed, cutoff: *cutoff },
            },
        }),
        WaveField::StaticDelta => {
            Err(Error::Unsupported("the static test field restricts to zero away from x = 0".into()))
        }
    }
}

/// Cone attached to a point of a 1-D wavefront set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConeSign {
    Positive,
    Negative,
    Both,
}

impl ConeSign {
    fn union(self, other: Self) -> Self {
        if self == other {
            self
        } else {
            Self::Both
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WavefrontPoint<T> {
    pub location: T,
    pub cone: ConeSign,
}

/// Wavefront set of a distribution on the line, sorted by location.
#[derive(Debug, Clone, PartialEq)]
pub struct WavefrontSet1D<T> {
    points: Vec<WavefrontPoint<T>>,
}

impl<T: Real> WavefrontSet1D<T> {
    /// Sorts the points and merges equal locations into the union of their cones.
    pub fn from_points(mut points: Vec<WavefrontPoint<T>>) -> Result<Self> {
        if points.iter().any(|p| !p.location.is_finite()) {
            return Err(invalid("wavefront locations must be finite"));
        }
        points.sort_by(|a, b| a.location.partial_cmp(&b.location).unwrap());
        let mut merged: Vec<WavefrontPoint<T>> = Vec::with_capacity(points.len());
        for p in points {
            match merged.last_mut() {
                Some(last) if last.location == p.location => last.cone = last.cone.union(p.cone),
                _ => merged.push(p),
            }
        }
        Ok(Self { points: merged })
    }

    pub fn points(&self) -> &[WavefrontPoint<T>] {
        &self.points
    }

    pub fn singular_support(&self) -> Vec<T> {
        self.points.iter().map(|p| p.location).collect()
    }
}

pub fn trace_wavefront<T: Real>(trace: &StationTrace<T>) -> Result<WavefrontSet1D<T>> {
    match &trace.kind {
        TraceKind::Atom { location, .. } | TraceKind::Jump { location, .. } => {
            WavefrontSet1D::from_points(vec![WavefrontPoint { location: *location, cone: ConeSign::Both }])
        }
        TraceKind::OI { phase, .. } => {
            // ∂_ξφ = t·sgn ξ - x/c vanishes at t = ±x/c for ξ ≷ 0; there τ = ∂_tφ = |ξ| > 0.
            let t0 = phase.station / phase.speed;
            let mut points = Vec::with_capacity(2);
            for xi in [T::one(), -T::one()] {
                let t = t0 * xi;
                debug_assert!(phase.dxi(t, xi).abs() <= T::epsilon() * t0.abs() * T::lit(4.0));
                let cone = if phase.dt(t, xi) > T::zero() { ConeSign::Positive } else { ConeSign::Negative };
                points.push(WavefrontPoint { location: t, cone });
            }
            WavefrontSet1D::from_points(points)
        }
    }
}

/// Sum of two Atom or two Jump traces at the same station and location.
pub fn superpose<T: Real>(a: &StationTrace<T>, b: &StationTrace<T>) -> Result<StationTrace<T>> {
    if a.station != b.station {
        return Err(invalid("superposed traces must share the station"));
    }
    match (&a.kind, &b.kind) {
        (TraceKind::Atom { location: la, weight: wa }, TraceKind::Atom { location: lb, weight: wb }) if la == lb => {
            StationTrace::atom(a.station, *la, *wa + *wb)
        }
        (
            TraceKind::Jump { location: la, left: l1, right: r1 },
            TraceKind::Jump { location: lb, left: l2, right: r2 },
        ) if la == lb => StationTrace::jump(a.station, *la, *l1 + *l2, *r1 + *r2),
        _ => Err(Error::Unsupported("superposition is defined for co-located atoms or jumps".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn field(kind: FieldKind, speed: f64) -> WaveField<f64> {
        build_field(&FieldSpec::new(kind, speed)).unwrap()
    }

    #[test]
    fn rejects_nonpositive_speed() {
        assert!(build_field(&FieldSpec::new(FieldKind::DeltaTravel, 0.0_f64)).is_err());
        assert!(build_field(&FieldSpec::new(FieldKind::OIPlane, -1.0_f64)).is_err());
    }

    #[test]
    fn delta_restrictions() {
        let v = restrict_to_station(&field(FieldKind::DeltaTravel, 2.0), 1.0).unwrap();
        assert_eq!(v.kind, TraceKind::Atom { location: 0.5, weight: 0.5 });
        let u = restrict_to_station(&field(FieldKind::DeltaTravel, 1.0), 1.0).unwrap();
        assert_eq!(u.kind, TraceKind::Atom { location: 1.0, weight: 1.0 });
        let s = restrict_to_station(&field(FieldKind::HeavisideShock, 2.0), 1.0).unwrap();
        assert_eq!(s.kind, TraceKind::Jump { location: 0.5, left: 1.0, right: 0.0 });
    }

    #[test]
    fn station_on_source_line_is_rejected() {
        assert!(restrict_to_station(&field(FieldKind::DeltaTravel, 1.0), 0.0).is_err());
    }

    #[test]
    fn static_field_fails_at_origin() {
        let f = WaveField::<f64>::StaticDelta;
        let r = check_restrictability(&f, 0.0);
        assert!(!r.ok);
        assert_eq!(r.witness.unwrap().tau, 0.0);
        assert!(check_restrictability(&f, 0.3).ok);
        assert!(matches!(restrict_to_station(&f, 0.0), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn oi_wavefronts() {
        let u = restrict_to_station(&field(FieldKind::OIPlane, 1.0), 1.0).unwrap();
        let wf = trace_wavefront(&u).unwrap();
        assert_eq!(
            wf.points(),
            &[
                WavefrontPoint { location: -1.0, cone: ConeSign::Positive },
                WavefrontPoint { location: 1.0, cone: ConeSign::Positive }
            ]
        );
        let v = restrict_to_station(&field(FieldKind::OIPlane, 2.0), 1.0).unwrap();
        assert_eq!(trace_wavefront(&v).unwrap().singular_support(), vec![-0.5, 0.5]);
    }

    #[test]
    fn atom_has_full_cone() {
        let a = StationTrace::atom(1.0, 0.5, 2.0).unwrap();
        let wf = trace_wavefront(&a).unwrap();
        assert_eq!(wf.points(), &[WavefrontPoint { location: 0.5, cone: ConeSign::Both }]);
    }

    #[test]
    fn oi_amplitude_vanishes_near_zero() {
        let f = field(FieldKind::OIPlane, 2.0);
        assert_eq!(f.amplitude(0.9), 0.0);
        assert_abs_diff_eq!(f.amplitude(-5.0), 0.1, epsilon = 1e-15);
    }

    #[test]
    fn superposition_adds_weights() {
        let a = StationTrace::atom(1.0, 0.5, 0.25).unwrap();
        let b = StationTrace::atom(1.0, 0.5, 0.25).unwrap();
        assert_eq!(superpose(&a, &b).unwrap().kind, TraceKind::Atom { location: 0.5, weight: 0.5 });
    }
}
