//! Strichartz exponent calculus in exact rational arithmetic.
//!
//! Pairs are written `(q, r)`: `q` the time exponent in `[2, ∞]`, `r` the space
//! exponent in `[2, ∞)`. Most formulas only involve the reciprocals `1/q` and
//! `a = 1/2 - 1/r`, which stay finite even when `q = ∞`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{rat, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PairSpec {
    pub d: u32,
    pub q: Rational,
    pub r: Rational,
}

impl PairSpec {
    pub fn new(d: u32, q: Rational, r: Rational) -> Result<Self> {
        if d < 1 {
            return Err(Error::Domain("dimension must be at least 1".into()));
        }
        if q < Rational::int(2) {
            return Err(Error::Domain(format!("time exponent q = {q} is below 2")));
        }
        if r.is_infinite() {
            return Err(Error::Domain("space exponent r = inf is not allowed".into()));
        }
        if r < Rational::int(2) {
            return Err(Error::Domain(format!("space exponent r = {r} is below 2")));
        }
        Ok(PairSpec { d, q, r })
    }

    /// `1/2 - 1/r`.
    pub fn a(&self) -> Rational {
        rat(1, 2) - self.r.recip()
    }

    /// `1/q`.
    pub fn inv_q(&self) -> Rational {
        self.q.recip()
    }

    /// Wave admissibility `(d-1)/2 (1/2 - 1/r) >= 1/q`.
    pub fn is_wave_admissible(&self) -> bool {
        half(self.d as i64 - 1) * self.a() >= self.inv_q()
    }

    fn is_infinity_two(&self) -> bool {
        self.q.is_infinite() && self.r == Rational::int(2)
    }
}

fn half(n: i64) -> Rational {
    rat(n, 2)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AdmissibilityCase {
    StrictHeat,
    EqualHeatOrdered,
    InfinityTwo,
    Rejected,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdmissibilityVerdict {
    pub admissible: bool,
    pub case: AdmissibilityCase,
    pub reason: String,
}

impl AdmissibilityVerdict {
    fn accept(case: AdmissibilityCase, reason: impl Into<String>) -> Self {
        Self {
            admissible: true,
            case,
            reason: reason.into(),
        }
    }

    fn reject(reason: impl Into<String>) -> Self {
        Self {
            admissible: false,
            case: AdmissibilityCase::Rejected,
            reason: reason.into(),
        }
    }
}

/// Derivative loss `γ = max{d(1/2-1/r) - 1/q, (d+1)/2 (1/2-1/r)}`.
pub fn gamma(p: &PairSpec) -> Rational {
    let (b1, b2) = gamma_branches(p);
    b1.max(b2)
}

/// The heat and wave branches whose maximum is `γ`.
pub fn gamma_branches(p: &PairSpec) -> (Rational, Rational) {
    let a = p.a();
    let d = Rational::int(p.d as i64);
    (d * a - p.inv_q(), half(p.d as i64 + 1) * a)
}

/// Homogeneous admissibility `d/2 (1/2 - 1/r) >= 1/q`.
pub fn check_homogeneous(p: &PairSpec) -> AdmissibilityVerdict {
    let lhs = half(p.d as i64) * p.a();
    if lhs >= p.inv_q() {
        let case = if lhs > p.inv_q() {
            AdmissibilityCase::StrictHeat
        } else if p.is_infinity_two() {
            AdmissibilityCase::InfinityTwo
        } else {
            AdmissibilityCase::EqualHeatOrdered
        };
        AdmissibilityVerdict::accept(case, format!("d/2(1/2-1/r) = {lhs} >= 1/q = {}", p.inv_q()))
    } else {
        AdmissibilityVerdict::reject(format!("d/2(1/2-1/r) = {lhs} < 1/q = {}", p.inv_q()))
    }
}

/// Which row/column of the δ table a pair of pairs falls in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DeltaCell {
    Diagonal,
    Row { row: u8, right: bool },
}

pub fn delta_cell(d: u32, p: &PairSpec, pt: &PairSpec) -> DeltaCell {
    let (a, at) = (p.a(), pt.a());
    let (iq, iqt) = (p.inv_q(), pt.inv_q());
    let left = iqt * a;
    let right = iq * at;
    if left == right {
        return DeltaCell::Diagonal;
    }
    let h = half(d as i64 - 1);
    let w = h * a >= iq;
    let wt = h * at >= iqt;
    let row = match (w, wt) {
        (true, true) => 1,
        (true, false) => 2,
        (false, true) => 3,
        (false, false) => 4,
    };
    DeltaCell::Row {
        row,
        right: left > right,
    }
}

/// The additional loss `δ` from the table of cases.
pub fn delta(d: u32, p: &PairSpec, pt: &PairSpec) -> Result<Rational> {
    let (a, at) = (p.a(), pt.a());
    let (iq, iqt) = (p.inv_q(), pt.inv_q());
    let h = half(d as i64 - 1);
    match delta_cell(d, p, pt) {
        DeltaCell::Diagonal | DeltaCell::Row { row: 1, .. } => Ok(Rational::zero()),
        // (q̃/q){1/q̃ - (d-1)/2 (1/2 - 1/r̃)}
        DeltaCell::Row { row: 2, right: true } => Ok(iq / iqt * (iqt - h * at)),
        // (q/q̃){1/q - (d-1)/2 (1/2 - 1/r)}
        DeltaCell::Row { row: 3, right: false } => Ok(iqt / iq * (iq - h * a)),
        DeltaCell::Row { row: 4, right: false } => Ok(h * (at - iqt / iq * a)),
        DeltaCell::Row { row: 4, right: true } => Ok(h * (a - iq / iqt * at)),
        cell => Err(Error::ImpossibleCase(format!(
            "{cell:?} for d={d}, (q,r)=({},{}), (q~,r~)=({},{})",
            p.q, p.r, pt.q, pt.r
        ))),
    }
}

/// The wave endpoint pair `(2, 2(d-1)/(d-3))`, `d >= 4`.
pub fn wave_endpoint_pair(d: u32) -> Result<PairSpec> {
    if d < 4 {
        return Err(Error::Domain(format!("wave endpoint pair needs d >= 4, got {d}")));
    }
    let d = d as i64;
    PairSpec::new(d as u32, Rational::int(2), rat(2 * (d - 1), d - 3))
}

fn is_wave_endpoint(d: u32, p: &PairSpec) -> bool {
    d >= 4 && wave_endpoint_pair(d).map(|e| e.q == p.q && e.r == p.r).unwrap_or(false)
}

/// Admissibility for the inhomogeneous estimate. With `allow_wave_endpoint =
/// false` the wave endpoint pair is excluded in `d >= 4`.
pub fn check_inhomogeneous(
    d: u32,
    p: &PairSpec,
    pt: &PairSpec,
    allow_wave_endpoint: bool,
) -> AdmissibilityVerdict {
    if !allow_wave_endpoint && (is_wave_endpoint(d, p) || is_wave_endpoint(d, pt)) {
        return AdmissibilityVerdict::reject("wave endpoint pair excluded");
    }
    if p.is_infinity_two() && pt.is_infinity_two() {
        return AdmissibilityVerdict::accept(AdmissibilityCase::InfinityTwo, "(q,r)=(q~,r~)=(inf,2)");
    }
    let lhs = half(d as i64) * (p.a() + pt.a());
    let rhs = p.inv_q() + pt.inv_q();
    if lhs > rhs {
        return AdmissibilityVerdict::accept(
            AdmissibilityCase::StrictHeat,
            format!("d/2(a + a~) = {lhs} > 1/q + 1/q~ = {rhs}"),
        );
    }
    if lhs == rhs {
        // 1 < q~' < q < inf
        let qt_conj = pt.q.conjugate();
        let one = Rational::one();
        if one < qt_conj && qt_conj < p.q && p.q.is_finite() {
            return AdmissibilityVerdict::accept(
                AdmissibilityCase::EqualHeatOrdered,
                format!("equality with 1 < q~' = {qt_conj} < q = {}", p.q),
            );
        }
        return AdmissibilityVerdict::reject(format!(
            "equality case requires 1 < q~' < q < inf, got q~' = {qt_conj}, q = {}",
            p.q
        ));
    }
    AdmissibilityVerdict::reject(format!("d/2(a + a~) = {lhs} < 1/q + 1/q~ = {rhs}"))
}

/// `(γ + γ̃ + δ - 1, γ + γ̃ + δ)`, the losses for the `𝒟` and `∂ₜ𝒟` Duhamel
/// terms. Admissibility is checked with the wave endpoint allowed.
pub fn inhomogeneous_loss(d: u32, p: &PairSpec, pt: &PairSpec) -> Result<(Rational, Rational)> {
    let v = check_inhomogeneous(d, p, pt, true);
    if !v.admissible {
        return Err(Error::Inadmissible(v.reason));
    }
    let total = gamma(p) + gamma(pt) + delta(d, p, pt)?;
    Ok((total - Rational::one(), total))
}

/// Exponent triple `(q, r, s)` of a mixed norm `L^q_t W^{s,r}_x` or
/// `L^q_t B^s_{r,2}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpaceExponents {
    pub q: Rational,
    pub r: Rational,
    pub s: Rational,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SpaceId {
    S,
    X,
    Xp,
    Y,
    W,
    Wp,
    S1a,
    S1b,
}

/// Which regularity index to use for `Y`. The printed one, `(d²-4d²)/(2d²-9d)`,
/// is negative; the corrected one matches the first component of `S¹`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum YIndex {
    #[default]
    Corrected,
    Printed,
}

pub fn y_regularity(d: u32, which: YIndex) -> Rational {
    let d = d as i64;
    match which {
        YIndex::Corrected => rat(d * d - 4 * d - 2, 2 * d * d - 9 * d),
        YIndex::Printed => rat(d * d - 4 * d * d, 2 * d * d - 9 * d),
    }
}

pub fn aux_space(d: u32, id: SpaceId) -> Result<SpaceExponents> {
    aux_space_with(d, id, YIndex::Corrected)
}

pub fn aux_space_with(d: u32, id: SpaceId, y: YIndex) -> Result<SpaceExponents> {
    if d < 6 {
        return Err(Error::Domain(format!("exotic spaces need d >= 6, got {d}")));
    }
    let dd = d as i64;
    let sx = |q: Rational, r: Rational, s: Rational| SpaceExponents { q, r, s };
    let q_y = rat(2 * dd.pow(3) - 7 * dd * dd - 9 * dd, dd.pow(3) - 6 * dd * dd + 7 * dd - 2);
    let r_y = rat(
        4 * dd.pow(3) - 14 * dd * dd - 18 * dd,
        2 * dd.pow(3) - 11 * dd * dd + 11 * dd - 8,
    );
    let w = rat(2 * (dd + 1), dd - 1);
    let wp = rat(2 * (dd + 1), dd + 3);
    Ok(match id {
        SpaceId::S => {
            let e = rat(2 * (dd + 1), dd - 2);
            sx(e, e, Rational::zero())
        }
        SpaceId::X => sx(rat(dd * dd + dd, dd + 2), w, rat(2, dd)),
        SpaceId::Xp => sx(rat(dd * dd + dd, 3 * dd + 2), wp, rat(2, dd)),
        SpaceId::Y => sx(q_y, r_y, y_regularity(d, y)),
        SpaceId::W => sx(w, w, rat(1, 2)),
        SpaceId::Wp => sx(wp, wp, rat(1, 2)),
        SpaceId::S1a => sx(q_y, r_y, y_regularity(d, YIndex::Corrected)),
        SpaceId::S1b => sx(
            rat(dd * dd + dd, dd + 2),
            rat(2 * dd.pow(3) - 2 * dd, dd.pow(3) - 5 * dd - 8),
            rat(dd * dd - 2 * dd - 2, dd * dd - dd),
        ),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum IdentityId {
    /// `X` between `S` and an `L^∞_t` space.
    First,
    /// `S` between `X` and `L^{2(d+1)/(d−1)}W^{1/2}`.
    Second,
    /// An `H^{1/2}`-level Strichartz space between `X` and `Y`.
    Third,
}

/// Outcome of an interpolation identity check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InterpolationCheck {
    pub theta: Rational,
    pub target: SpaceExponents,
    pub interpolated: SpaceExponents,
    /// Time, space and regularity exponents each interpolate exactly.
    pub componentwise: bool,
    /// Time exponent exact, `1/r - s/d` exact and the interpolated regularity
    /// at least the target one, so the target follows by Sobolev embedding.
    pub embedding: bool,
    pub holds: bool,
}

/// The interpolation behind each part of the exotic-space lemma, with the
/// corrected `Y` index.
pub fn interpolation_identity(d: u32, id: IdentityId) -> Result<InterpolationCheck> {
    interpolation_identity_with(d, id, YIndex::Corrected)
}

pub fn interpolation_identity_with(d: u32, id: IdentityId, y: YIndex) -> Result<InterpolationCheck> {
    if d < 6 {
        return Err(Error::Domain(format!("exotic spaces need d >= 6, got {d}")));
    }
    let dd = d as i64;
    let sx = |q: Rational, r: Rational, s: Rational| SpaceExponents { q, r, s };
    let (theta, target, ea, eb) = match id {
        IdentityId::First => (
            rat(2 * dd + 4, dd * dd - 2 * dd),
            aux_space(d, SpaceId::X)?,
            aux_space(d, SpaceId::S)?,
            sx(
                Rational::inf(),
                rat(2 * dd * dd - 8 * dd - 8, dd * dd - 6 * dd + 8),
                rat(2 * dd - 4, dd * dd - 4 * dd - 4),
            ),
        ),
        IdentityId::Second => {
            let w = rat(2 * (dd + 1), dd - 1);
            (
                rat(dd, dd * dd - 3 * dd - 4),
                aux_space(d, SpaceId::S)?,
                aux_space(d, SpaceId::X)?,
                sx(w, w, rat(1, 2)),
            )
        }
        IdentityId::Third => (
            rat(1, 2 * (dd - 4)),
            sx(
                rat(2 * (dd + 1), dd - 2),
                rat(2 * dd * (dd + 1), dd * dd - dd + 1),
                rat(1, 2),
            ),
            aux_space(d, SpaceId::X)?,
            aux_space_with(d, SpaceId::Y, y)?,
        ),
    };
    let one = Rational::one();
    let mix = |x: Rational, y: Rational| theta * x + (one - theta) * y;
    let inv_q = mix(ea.q.recip(), eb.q.recip());
    let inv_r = mix(ea.r.recip(), eb.r.recip());
    let s = mix(ea.s, eb.s);
    let interpolated = sx(inv_q.recip(), inv_r.recip(), s);
    let componentwise = inv_q == target.q.recip() && inv_r == target.r.recip() && s == target.s;
    let dr = Rational::int(dd);
    let embedding = inv_q == target.q.recip()
        && inv_r - s / dr == target.r.recip() - target.s / dr
        && s >= target.s;
    Ok(InterpolationCheck {
        theta,
        target,
        interpolated,
        componentwise,
        embedding,
        holds: componentwise || embedding,
    })
}

pub fn check_interpolation_identity(d: u32, id: IdentityId) -> bool {
    interpolation_identity(d, id).map(|c| c.holds).unwrap_or(false)
}

/// Full record printed by the `exponents` command.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExponentSummary {
    pub gamma: Rational,
    pub gamma_tilde: Option<Rational>,
    pub delta: Option<Rational>,
    pub loss_low: Option<Rational>,
    pub loss_high: Option<Rational>,
    pub verdict: AdmissibilityVerdict,
    pub case: AdmissibilityCase,
}

pub fn summarize(
    d: u32,
    p: &PairSpec,
    pt: Option<&PairSpec>,
    allow_wave_endpoint: bool,
) -> Result<ExponentSummary> {
    let g = gamma(p);
    match pt {
        None => {
            let v = check_homogeneous(p);
            Ok(ExponentSummary {
                gamma: g,
                gamma_tilde: None,
                delta: None,
                loss_low: Some(g - Rational::one()),
                loss_high: Some(g),
                case: v.case,
                verdict: v,
            })
        }
        Some(pt) => {
            let v = check_inhomogeneous(d, p, pt, allow_wave_endpoint);
            let delta = delta(d, p, pt)?;
            let total = g + gamma(pt) + delta;
            let (lo, hi) = if v.admissible {
                (Some(total - Rational::one()), Some(total))
            } else {
                (None, None)
            };
            Ok(ExponentSummary {
                gamma: g,
                gamma_tilde: Some(gamma(pt)),
                delta: Some(delta),
                loss_low: lo,
                loss_high: hi,
                case: v.case,
                verdict: v,
            })
        }
    }
}
