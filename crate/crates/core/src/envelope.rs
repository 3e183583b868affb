//! Moreau envelope, the proximal value function and the scalar objectives.
//!
//! For a fixed base point `x̄` the proximal value function is
//! `η(λ) = f(P_λ f(x̄))` for `λ > 0` and `f(P_cl(dom f)(x̄))` for `λ ≤ 0`. Its
//! negative is the derivative of the convex function
//!
//! ```text
//! φ̄(λ) = −λ e_λ f(x̄)                       λ > 0
//!       = −½ d²(x̄, cl dom f)                λ = 0
//!       = −λ f(P_cl(dom f)(x̄)) − ½ d²(…)    λ < 0
//! ```
//!
//! and the level-set / epigraph projections reduce to minimizing
//! `θ(λ) = φ̄(λ) + ᾱλ` (level) or `φ̄(λ) + ᾱλ + ½λ²` (epigraph) over `λ ≥ 0`.

use serde::{Deserialize, Serialize};

use crate::catalog::{check_lambda, sq_dist, ProxFunction, ProxSummary};
use crate::error::{Error, Result};
use crate::extended::ExtReal;

/// `e_λ f(x) = f(x_λ) + ‖x − x_λ‖² / 2λ` with `x_λ = P_λ f(x)`.
pub fn moreau_envelope<F: ProxFunction + ?Sized>(f: &F, x: &[f64], lambda: f64) -> Result<f64> {
    let s = f.prox_summary(x, lambda)?;
    Ok(s.value + s.dist_sq / (2.0 * lambda))
}

/// `∇e_λ f(x) = (x − P_λ f(x)) / λ`.
pub fn envelope_gradient<F: ProxFunction + ?Sized>(f: &F, x: &[f64], lambda: f64) -> Result<Vec<f64>> {
    let p = f.prox(x, lambda)?;
    Ok(x.iter().zip(&p.point).map(|(xi, pi)| (xi - pi) / lambda).collect())
}

/// `η(λ)`, extended to `λ ≤ 0` through the domain projection.
pub fn proximal_value<F: ProxFunction + ?Sized>(f: &F, x: &[f64], lambda: f64) -> Result<ExtReal> {
    if lambda > 0.0 {
        Ok(ExtReal::Finite(f.prox_summary(x, lambda)?.value))
    } else if lambda.is_nan() {
        Err(Error::usage("λ is NaN"))
    } else {
        Ok(f.domain_projection(x)?.value)
    }
}

/// `φ̄(λ)`; `+∞` for `λ < 0` whenever the domain projection of `x` lies outside `dom f`.
pub fn phi_bar<F: ProxFunction + ?Sized>(f: &F, x: &[f64], lambda: f64) -> Result<ExtReal> {
    if lambda > 0.0 {
        let s = f.prox_summary(x, lambda)?;
        return Ok(ExtReal::Finite(-lambda * s.value - 0.5 * s.dist_sq));
    }
    if lambda.is_nan() {
        return Err(Error::usage("λ is NaN"));
    }
    let dp = f.domain_projection(x)?;
    let half_d2 = 0.5 * sq_dist(x, &dp.point);
    if lambda == 0.0 {
        return Ok(ExtReal::Finite(-half_d2));
    }
    // λ < 0: −λ·(+∞) = +∞
    Ok(dp.value.scale_pos(-lambda).plus(-half_d2))
}

/// Which projection a [`ScalarObjective`] encodes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjectiveKind {
    Level,
    Epi,
}

/// Outcome of checking for a point `x̂` with `f(x̂) < ᾱ` (level sets only).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrictFeasibility {
    /// `inf f < ᾱ` is known to hold.
    Witnessed,
    /// `ᾱ ≤ inf f`: the level set has no strictly feasible point.
    Violated,
    /// The infimum of `f` is not known; the precondition is trusted.
    Unknown,
    /// Epigraph objectives need no such point.
    NotRequired,
}

/// `θ_ξ` bound to a function, a base point and a level / ordinate `ᾱ`.
#[derive(Clone, Copy, Debug)]
pub struct ScalarObjective<'a, F: ProxFunction + ?Sized> {
    pub kind: ObjectiveKind,
    pub function: &'a F,
    pub base_point: &'a [f64],
    pub alpha: f64,
    pub feasibility: StrictFeasibility,
}

/// One evaluation of `θ_ξ` at `λ > 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThetaSample {
    pub lambda: f64,
    pub value: ExtReal,
    pub derivative: f64,
    /// An element of `∂_B θ'_ξ(λ)`.
    pub bsub: f64,
}

impl<'a, F: ProxFunction + ?Sized> ScalarObjective<'a, F> {
    pub fn level(function: &'a F, base_point: &'a [f64], alpha: f64) -> Self {
        let feasibility = match function.infimum() {
            Some(inf) if inf < alpha => StrictFeasibility::Witnessed,
            Some(_) => StrictFeasibility::Violated,
            None => StrictFeasibility::Unknown,
        };
        ScalarObjective {
            kind: ObjectiveKind::Level,
            function,
            base_point,
            alpha,
            feasibility,
        }
    }

    pub fn epi(function: &'a F, base_point: &'a [f64], alpha: f64) -> Self {
        ScalarObjective {
            kind: ObjectiveKind::Epi,
            function,
            base_point,
            alpha,
            feasibility: StrictFeasibility::NotRequired,
        }
    }

    pub fn new(kind: ObjectiveKind, function: &'a F, base_point: &'a [f64], alpha: f64) -> Self {
        match kind {
            ObjectiveKind::Level => Self::level(function, base_point, alpha),
            ObjectiveKind::Epi => Self::epi(function, base_point, alpha),
        }
    }

    fn extra(&self, lambda: f64) -> f64 {
        match self.kind {
            ObjectiveKind::Level => self.alpha * lambda,
            ObjectiveKind::Epi => self.alpha * lambda + 0.5 * lambda * lambda,
        }
    }

    fn derivative_from(&self, s: &ProxSummary, lambda: f64) -> (f64, f64) {
        match self.kind {
            ObjectiveKind::Level => (self.alpha - s.value, -s.slope),
            ObjectiveKind::Epi => (self.alpha - s.value + lambda, 1.0 - s.slope),
        }
    }

    /// `θ_ξ(λ)` for any real `λ`.
    pub fn value(&self, lambda: f64) -> Result<ExtReal> {
        Ok(phi_bar(self.function, self.base_point, lambda)?.plus(self.extra(lambda)))
    }

    /// `θ_ξ(λ)` together with the sum of the magnitudes of its terms, which bounds
    /// the rounding error of the value. Used to make sufficient-decrease tests
    /// meaningful when θ barely moves.
    pub fn value_with_scale(&self, lambda: f64) -> Result<(ExtReal, f64)> {
        if lambda > 0.0 {
            let s = self.function.prox_summary(self.base_point, lambda)?;
            let terms = [-lambda * s.value, -0.5 * s.dist_sq, self.extra(lambda)];
            let value = terms.iter().sum::<f64>();
            let scale =
                terms.iter().map(|t| t.abs()).sum::<f64>() + (self.alpha * lambda).abs() + 0.5 * lambda * lambda;
            Ok((ExtReal::Finite(value), scale))
        } else {
            let v = self.value(lambda)?;
            Ok((v, v.finite().map_or(0.0, f64::abs)))
        }
    }

    /// `θ'_ξ(λ)` for `λ > 0`.
    pub fn derivative(&self, lambda: f64) -> Result<f64> {
        Ok(self.derivative_and_bsub(lambda)?.0)
    }

    /// `(θ'_ξ(λ), g)` with `g ∈ ∂_B θ'_ξ(λ)`, from a single proximal evaluation.
    pub fn derivative_and_bsub(&self, lambda: f64) -> Result<(f64, f64)> {
        check_lambda(lambda)?;
        let s = self.function.prox_summary(self.base_point, lambda)?;
        Ok(self.derivative_from(&s, lambda))
    }

    /// Value, derivative and Bouligand element at `λ > 0`.
    pub fn sample(&self, lambda: f64) -> Result<ThetaSample> {
        check_lambda(lambda)?;
        let s = self.function.prox_summary(self.base_point, lambda)?;
        let (derivative, bsub) = self.derivative_from(&s, lambda);
        Ok(ThetaSample {
            lambda,
            value: ExtReal::Finite(-lambda * s.value - 0.5 * s.dist_sq + self.extra(lambda)),
            derivative,
            bsub,
        })
    }

    /// The level/epigraph constraint residual `η(λ) − ᾱ` (level) or `η(λ) − λ − ᾱ` (epi),
    /// i.e. `−θ'_ξ(λ)`.
    pub fn root_residual(&self, lambda: f64) -> Result<f64> {
        Ok(-self.derivative(lambda)?)
    }
}

/// `θ_ξ` sample at `λ > 0`; see [`ScalarObjective::sample`].
pub fn theta<F: ProxFunction + ?Sized>(obj: &ScalarObjective<'_, F>, lambda: f64) -> Result<ThetaSample> {
    obj.sample(lambda)
}
