//! Ready-made torus maps: rigid translations, products of two Denjoy
//! counterexamples and the gap-modulated Denjoy skew product.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{FiberFamily, SkewProduct, TorusError};
use crate::circle::{CircleLift, DenjoyMap, DenjoySpec, QuadraticIrrational};

/// Parameters of the skew product over a Denjoy base with a Denjoy fiber map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SkewExampleParams {
    pub rho1: QuadraticIrrational,
    pub rho2: QuadraticIrrational,
    /// Total gap length of each Denjoy map.
    pub total_gap: (f64, f64),
    pub gap_exponent: (f64, f64),
    pub truncation: (usize, usize),
    /// `Θ` in `θ_n = Θ·decay^{|n|}`.
    pub amplitude: f64,
    pub decay: f64,
}

impl Default for SkewExampleParams {
    fn default() -> Self {
        Self {
            rho1: QuadraticIrrational::golden(),
            rho2: QuadraticIrrational::silver(),
            total_gap: (0.5, 0.5),
            gap_exponent: (4.0, 4.0),
            truncation: (2000, 2000),
            amplitude: 0.1,
            decay: 0.5,
        }
    }
}

impl SkewExampleParams {
    pub fn denjoy_maps(&self) -> Result<(Arc<DenjoyMap>, Arc<DenjoyMap>), TorusError> {
        let s1 = DenjoySpec::with_total_gap(
            self.rho1,
            self.total_gap.0,
            self.gap_exponent.0,
            self.truncation.0,
        )?;
        let s2 = DenjoySpec::with_total_gap(
            self.rho2,
            self.total_gap.1,
            self.gap_exponent.1,
            self.truncation.1,
        )?;
        Ok((
            Arc::new(DenjoyMap::build(s1)?),
            Arc::new(DenjoyMap::build(s2)?),
        ))
    }
}

/// `f_β` with `β(s) = R_{φ(s)} ∘ g₂` and `φ` supported on the gaps of `g₁`.
pub fn skew_example(params: &SkewExampleParams) -> Result<SkewProduct, TorusError> {
    let (g1, g2) = params.denjoy_maps()?;
    let beta =
        FiberFamily::gap_modulated(g1, CircleLift::denjoy(g2), params.amplitude, params.decay)?;
    Ok(SkewProduct::new(beta))
}

/// `g₁ × g₂`; the modulation parameters are ignored.
pub fn denjoy_product(params: &SkewExampleParams) -> Result<SkewProduct, TorusError> {
    let (g1, g2) = params.denjoy_maps()?;
    Ok(SkewProduct::new(FiberFamily::constant(
        CircleLift::denjoy(g1),
        CircleLift::denjoy(g2),
    )))
}

/// `(s, t) ↦ (s + a, t + b)`.
pub fn rigid_translation(a: f64, b: f64) -> SkewProduct {
    SkewProduct::new(FiberFamily::constant(
        CircleLift::rigid(a),
        CircleLift::rigid(b),
    ))
}
