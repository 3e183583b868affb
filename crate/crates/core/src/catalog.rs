//! Convex functions with closed-form proximal maps.
//!
//! Everything above this module consumes a function only through the
//! [`ProxFunction`] trait: evaluation, the proximal map, the projection onto the
//! closure of the domain, and one generalized slope of `λ ↦ f(P_λ f(x))`.
//! [`Catalog`] provides the concrete members used by the CLI, the tests and the
//! benchmark presets.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extended::ExtReal;

/// Output of a proximal (or domain-projection) evaluation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProxEvaluation {
    /// `P_λ f(x)`, or the projection onto `cl(dom f)` when `lambda == 0`.
    pub point: Vec<f64>,
    pub value: ExtReal,
    pub lambda: f64,
}

/// The three scalars a root solve needs from one proximal evaluation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProxSummary {
    /// `η(λ) = f(P_λ f(x))`, always finite for `λ > 0`.
    pub value: f64,
    /// `‖x − P_λ f(x)‖²`.
    pub dist_sq: f64,
    /// An element of the Bouligand subdifferential of `η` at `λ`.
    pub slope: f64,
}

/// A closed proper convex function with a computable proximal map.
///
/// Implementors provide the four buffer-based capabilities; the allocating
/// variants and the fused [`ProxFunction::prox_summary`] have default
/// implementations that separable members override with single-pass kernels.
pub trait ProxFunction: Send + Sync {
    /// Short textual form, e.g. `l1:scale=1`.
    fn descriptor(&self) -> String;

    /// Fixed dimension, or `None` for separable families accepting any `n ≥ 1`.
    fn dimension(&self) -> Option<usize>;

    /// `inf f` when known (possibly `-∞`); `None` when unknown.
    fn infimum(&self) -> Option<f64> {
        None
    }

    fn eval(&self, u: &[f64]) -> Result<ExtReal>;

    /// Writes `P_λ f(x)` into `out` and returns `f` at that point.
    fn prox_into(&self, x: &[f64], lambda: f64, out: &mut [f64]) -> Result<ExtReal>;

    /// Writes the projection of `x` onto `cl(dom f)` into `out` and returns `f` there.
    fn domain_projection_into(&self, x: &[f64], out: &mut [f64]) -> Result<ExtReal>;

    /// One element of `∂_B` of `λ ↦ f(P_λ f(x))`; never positive.
    fn prox_value_slope(&self, x: &[f64], lambda: f64) -> Result<f64>;

    fn prox(&self, x: &[f64], lambda: f64) -> Result<ProxEvaluation> {
        let mut point = vec![0.0; x.len()];
        let value = self.prox_into(x, lambda, &mut point)?;
        Ok(ProxEvaluation { point, value, lambda })
    }

    fn domain_projection(&self, x: &[f64]) -> Result<ProxEvaluation> {
        let mut point = vec![0.0; x.len()];
        let value = self.domain_projection_into(x, &mut point)?;
        Ok(ProxEvaluation {
            point,
            value,
            lambda: 0.0,
        })
    }

    fn prox_summary(&self, x: &[f64], lambda: f64) -> Result<ProxSummary> {
        let eval = self.prox(x, lambda)?;
        let value = eval.value.finite().ok_or_else(|| {
            Error::Numeric(format!(
                "proximal point of {} left the domain at λ = {lambda}",
                self.descriptor()
            ))
        })?;
        let dist_sq = sq_dist(x, &eval.point);
        let slope = self.prox_value_slope(x, lambda)?;
        Ok(ProxSummary { value, dist_sq, slope })
    }
}

impl<F: ProxFunction + ?Sized> ProxFunction for &F {
    fn descriptor(&self) -> String {
        (**self).descriptor()
    }
    fn dimension(&self) -> Option<usize> {
        (**self).dimension()
    }
    fn infimum(&self) -> Option<f64> {
        (**self).infimum()
    }
    fn eval(&self, u: &[f64]) -> Result<ExtReal> {
        (**self).eval(u)
    }
    fn prox_into(&self, x: &[f64], lambda: f64, out: &mut [f64]) -> Result<ExtReal> {
        (**self).prox_into(x, lambda, out)
    }
    fn domain_projection_into(&self, x: &[f64], out: &mut [f64]) -> Result<ExtReal> {
        (**self).domain_projection_into(x, out)
    }
    fn prox_value_slope(&self, x: &[f64], lambda: f64) -> Result<f64> {
        (**self).prox_value_slope(x, lambda)
    }
    fn prox_summary(&self, x: &[f64], lambda: f64) -> Result<ProxSummary> {
        (**self).prox_summary(x, lambda)
    }
}

pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum()
}

pub(crate) fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::usage(format!(
            "proximal parameter must be positive and finite, got {lambda}"
        )))
    }
}

/// The catalog members.
///
/// Separable members carry an optional dimension; `None` accepts any length.
#[derive(Clone, Debug, PartialEq)]
pub enum Catalog {
    /// `c‖·‖₁`; prox is soft-thresholding at `cλ`.
    L1 { scale: f64, dim: Option<usize> },
    /// Indicator of `[−1, 1]ⁿ`; prox is clamping.
    Box { dim: Option<usize> },
    /// `c|·| + δ_[−1,1]` coordinatewise; prox is `min{max{|x|−cλ, 0}, 1}·sgn(x)`.
    AbsBox { scale: f64, dim: Option<usize> },
    /// `−Σ log xᵢ`; prox is `½(x + √(x² + 4λ))` coordinatewise.
    NegLog { dim: Option<usize> },
    /// `−√·` on `ℝ₊`. Only the base point 0 has a prox here: `(λ/2)^{2/3}`.
    NegSqrt,
    /// `½‖·‖²`; prox is `x / (1 + λ)`.
    HalfSquare { dim: Option<usize> },
}

impl Catalog {
    pub fn l1() -> Self {
        Catalog::L1 { scale: 1.0, dim: None }
    }

    pub fn abs_box(scale: f64) -> Self {
        Catalog::AbsBox { scale, dim: None }
    }

    pub fn neg_log() -> Self {
        Catalog::NegLog { dim: None }
    }

    pub fn half_square() -> Self {
        Catalog::HalfSquare { dim: None }
    }

    /// Same member with the dimension pinned.
    pub fn with_dim(&self, n: usize) -> Self {
        match *self {
            Catalog::L1 { scale, .. } => Catalog::L1 { scale, dim: Some(n) },
            Catalog::Box { .. } => Catalog::Box { dim: Some(n) },
            Catalog::AbsBox { scale, .. } => Catalog::AbsBox { scale, dim: Some(n) },
            Catalog::NegLog { .. } => Catalog::NegLog { dim: Some(n) },
            Catalog::NegSqrt => Catalog::NegSqrt,
            Catalog::HalfSquare { .. } => Catalog::HalfSquare { dim: Some(n) },
        }
    }

    /// Whether the member admits base points other than the origin.
    pub fn accepts_any_base_point(&self) -> bool {
        !matches!(self, Catalog::NegSqrt)
    }

    /// A point `x̂` of length `n` with `f(x̂) < alpha`, if one exists.
    pub fn level_witness(&self, alpha: f64, n: usize) -> Option<Vec<f64>> {
        match *self {
            Catalog::L1 { .. } | Catalog::Box { .. } | Catalog::AbsBox { .. } | Catalog::HalfSquare { .. } => {
                (alpha > 0.0).then(|| vec![0.0; n])
            }
            Catalog::NegLog { .. } => {
                // −n log t < α  ⇔  t > exp(−α/n)
                let t = 2.0 * (-alpha / n as f64).exp();
                t.is_finite().then(|| vec![t; n])
            }
            Catalog::NegSqrt => {
                let u = (alpha.min(0.0).abs() + 1.0).powi(2);
                Some(vec![u])
            }
        }
    }

    fn check_dim(&self, len: usize) -> Result<()> {
        if len == 0 {
            return Err(Error::usage("empty vector"));
        }
        match self.dimension() {
            Some(n) if n != len => Err(Error::usage(format!(
                "{} expects dimension {n}, got {len}",
                self.descriptor()
            ))),
            _ => Ok(()),
        }
    }

    fn check_pair(&self, x: &[f64], out: &[f64]) -> Result<()> {
        self.check_dim(x.len())?;
        if out.len() != x.len() {
            return Err(Error::usage(format!(
                "output buffer has length {}, expected {}",
                out.len(),
                x.len()
            )));
        }
        Ok(())
    }
}

#[inline]
fn neg_log_prox(x: f64, lambda: f64) -> f64 {
    let r = (x * x + 4.0 * lambda).sqrt();
    if x >= 0.0 {
        0.5 * (x + r)
    } else {
        2.0 * lambda / (r - x)
    }
}

#[inline]
fn clamp_unit(v: f64) -> f64 {
    v.clamp(-1.0, 1.0)
}

impl ProxFunction for Catalog {
    fn descriptor(&self) -> String {
        self.to_string()
    }

    fn dimension(&self) -> Option<usize> {
        match *self {
            Catalog::L1 { dim, .. }
            | Catalog::Box { dim }
            | Catalog::AbsBox { dim, .. }
            | Catalog::NegLog { dim }
            | Catalog::HalfSquare { dim } => dim,
            Catalog::NegSqrt => Some(1),
        }
    }

    fn infimum(&self) -> Option<f64> {
        Some(match self {
            Catalog::NegLog { .. } | Catalog::NegSqrt => f64::NEG_INFINITY,
            _ => 0.0,
        })
    }

    fn eval(&self, u: &[f64]) -> Result<ExtReal> {
        self.check_dim(u.len())?;
        let v = match *self {
            Catalog::L1 { scale, .. } => ExtReal::Finite(scale * u.iter().map(|v| v.abs()).sum::<f64>()),
            Catalog::Box { .. } => {
                if u.iter().all(|v| v.abs() <= 1.0) {
                    ExtReal::ZERO
                } else {
                    ExtReal::PosInf
                }
            }
            Catalog::AbsBox { scale, .. } => {
                if u.iter().all(|v| v.abs() <= 1.0) {
                    ExtReal::Finite(scale * u.iter().map(|v| v.abs()).sum::<f64>())
                } else {
                    ExtReal::PosInf
                }
            }
            Catalog::NegLog { .. } => {
                if u.iter().all(|&v| v > 0.0) {
                    ExtReal::Finite(-u.iter().map(|v| v.ln()).sum::<f64>())
                } else {
                    ExtReal::PosInf
                }
            }
            Catalog::NegSqrt => {
                if u[0] >= 0.0 {
                    ExtReal::Finite(-u[0].sqrt())
                } else {
                    ExtReal::PosInf
                }
            }
            Catalog::HalfSquare { .. } => ExtReal::Finite(0.5 * u.iter().map(|v| v * v).sum::<f64>()),
        };
        Ok(v)
    }

    fn prox_into(&self, x: &[f64], lambda: f64, out: &mut [f64]) -> Result<ExtReal> {
        check_lambda(lambda)?;
        self.check_pair(x, out)?;
        let value = match *self {
            Catalog::L1 { scale, .. } => {
                let t = scale * lambda;
                let mut norm = 0.0;
                for (o, &xi) in out.iter_mut().zip(x) {
                    let m = (xi.abs() - t).max(0.0);
                    *o = if m > 0.0 { m.copysign(xi) } else { 0.0 };
                    norm += m;
                }
                scale * norm
            }
            Catalog::Box { .. } => {
                for (o, &xi) in out.iter_mut().zip(x) {
                    *o = clamp_unit(xi);
                }
                0.0
            }
            Catalog::AbsBox { scale, .. } => {
                let t = scale * lambda;
                let mut norm = 0.0;
                for (o, &xi) in out.iter_mut().zip(x) {
                    let m = (xi.abs() - t).clamp(0.0, 1.0);
                    *o = if m > 0.0 { m.copysign(xi) } else { 0.0 };
                    norm += m;
                }
                scale * norm
            }
            Catalog::NegLog { .. } => {
                let mut v = 0.0;
                for (o, &xi) in out.iter_mut().zip(x) {
                    let y = neg_log_prox(xi, lambda);
                    *o = y;
                    v -= y.ln();
                }
                v
            }
            Catalog::NegSqrt => {
                require_origin(x)?;
                let y = (0.5 * lambda).powf(2.0 / 3.0);
                out[0] = y;
                -(0.5 * lambda).cbrt()
            }
            Catalog::HalfSquare { .. } => {
                let s = 1.0 / (1.0 + lambda);
                let mut v = 0.0;
                for (o, &xi) in out.iter_mut().zip(x) {
                    let y = xi * s;
                    *o = y;
                    v += y * y;
                }
                0.5 * v
            }
        };
        Ok(ExtReal::Finite(value))
    }

    fn domain_projection_into(&self, x: &[f64], out: &mut [f64]) -> Result<ExtReal> {
        self.check_pair(x, out)?;
        match self {
            Catalog::L1 { .. } | Catalog::HalfSquare { .. } => out.copy_from_slice(x),
            Catalog::Box { .. } | Catalog::AbsBox { .. } => {
                for (o, &xi) in out.iter_mut().zip(x) {
                    *o = clamp_unit(xi);
                }
            }
            Catalog::NegLog { .. } | Catalog::NegSqrt => {
                for (o, &xi) in out.iter_mut().zip(x) {
                    *o = xi.max(0.0);
                }
            }
        }
        self.eval(out)
    }

    fn prox_value_slope(&self, x: &[f64], lambda: f64) -> Result<f64> {
        Ok(self.prox_summary(x, lambda)?.slope)
    }

    fn prox_summary(&self, x: &[f64], lambda: f64) -> Result<ProxSummary> {
        check_lambda(lambda)?;
        self.check_dim(x.len())?;
        let s = match *self {
            Catalog::L1 { scale, .. } => {
                // η(λ) = c Σ (|xᵢ| − cλ)₊ is piecewise affine; coordinates exactly at the
                // threshold are inactive, which yields the right-hand slope.
                let t = scale * lambda;
                let (mut excess, mut dist_sq, mut active) = (0.0, 0.0, 0usize);
                for &xi in x {
                    let a = xi.abs();
                    if a > t {
                        excess += a - t;
                        active += 1;
                        dist_sq += t * t;
                    } else {
                        dist_sq += a * a;
                    }
                }
                ProxSummary {
                    value: scale * excess,
                    dist_sq,
                    slope: -scale * scale * active as f64,
                }
            }
            Catalog::Box { .. } => {
                let dist_sq = x.iter().map(|&xi| (xi - clamp_unit(xi)).powi(2)).sum();
                ProxSummary {
                    value: 0.0,
                    dist_sq,
                    slope: 0.0,
                }
            }
            Catalog::AbsBox { scale, .. } => {
                // Only coordinates strictly inside the moving piece 0 < |x|−cλ < 1
                // contribute; ties at either end count as inactive.
                let t = scale * lambda;
                let (mut norm, mut dist_sq, mut active) = (0.0, 0.0, 0usize);
                for &xi in x {
                    let a = xi.abs();
                    let r = a - t;
                    let m = r.clamp(0.0, 1.0);
                    if r > 0.0 && r < 1.0 {
                        active += 1;
                    }
                    norm += m;
                    dist_sq += (a - m) * (a - m);
                }
                ProxSummary {
                    value: scale * norm,
                    dist_sq,
                    slope: -scale * scale * active as f64,
                }
            }
            Catalog::NegLog { .. } => {
                let (mut value, mut dist_sq, mut slope) = (0.0, 0.0, 0.0);
                for &xi in x {
                    let y = neg_log_prox(xi, lambda);
                    value -= y.ln();
                    dist_sq += (xi - y) * (xi - y);
                    // −∇f²/(λ∇²f + 1) with ∇f = −1/y, ∇²f = 1/y²
                    slope -= 1.0 / (lambda + y * y);
                }
                ProxSummary { value, dist_sq, slope }
            }
            Catalog::NegSqrt => {
                require_origin(x)?;
                let y = (0.5 * lambda).powf(2.0 / 3.0);
                ProxSummary {
                    value: -(0.5 * lambda).cbrt(),
                    dist_sq: y * y,
                    slope: -1.0 / (6.0 * y),
                }
            }
            Catalog::HalfSquare { .. } => {
                let nsq: f64 = x.iter().map(|v| v * v).sum();
                let s = 1.0 / (1.0 + lambda);
                ProxSummary {
                    value: 0.5 * nsq * s * s,
                    dist_sq: nsq * (lambda * s) * (lambda * s),
                    slope: -nsq * s * s * s,
                }
            }
        };
        Ok(s)
    }
}

fn require_origin(x: &[f64]) -> Result<()> {
    if x[0] == 0.0 {
        Ok(())
    } else {
        Err(Error::Unsupported(format!(
            "negsqrt has a closed-form prox only at the base point 0, got {}",
            x[0]
        )))
    }
}

impl fmt::Display for Catalog {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let dim = |d: &Option<usize>| d.map(|n| format!(",n={n}")).unwrap_or_default();
        match self {
            Catalog::L1 { scale, dim: d } => write!(f, "l1:scale={scale}{}", dim(d)),
            Catalog::Box { dim: d } => match d {
                Some(n) => write!(f, "box:n={n}"),
                None => f.write_str("box"),
            },
            Catalog::AbsBox { scale, dim: d } => write!(f, "absbox:scale={scale}{}", dim(d)),
            Catalog::NegLog { dim: d } => match d {
                Some(n) => write!(f, "neglog:n={n}"),
                None => f.write_str("neglog"),
            },
            Catalog::NegSqrt => f.write_str("negsqrt"),
            Catalog::HalfSquare { dim: d } => match d {
                Some(n) => write!(f, "sq:n={n}"),
                None => f.write_str("sq"),
            },
        }
    }
}

impl FromStr for Catalog {
    type Err = Error;

    /// Parses `name[:key=value[,key=value]...]`.
    ///
    /// Names: `l1`, `box`, `absbox`, `neglog`, `negsqrt`, `sq`. Keys: `scale`
    /// (`l1`, `absbox`) and `n` (every member but `negsqrt`).
    fn from_str(s: &str) -> Result<Self> {
        let (name, params) = match s.split_once(':') {
            Some((n, p)) => (n.trim(), p.trim()),
            None => (s.trim(), ""),
        };
        let mut scale: Option<f64> = None;
        let mut dim: Option<usize> = None;
        for kv in params.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::usage(format!("malformed parameter `{kv}` in `{s}`")))?;
            match k.trim() {
                "scale" | "c" => {
                    let c: f64 = v
                        .trim()
                        .parse()
                        .map_err(|_| Error::usage(format!("bad scale `{v}` in `{s}`")))?;
                    if !(c > 0.0 && c.is_finite()) {
                        return Err(Error::usage(format!("scale must be positive, got {c}")));
                    }
                    scale = Some(c);
                }
                "n" => {
                    let n: usize = v
                        .trim()
                        .parse()
                        .map_err(|_| Error::usage(format!("bad dimension `{v}` in `{s}`")))?;
                    if n == 0 {
                        return Err(Error::usage("dimension must be positive"));
                    }
                    dim = Some(n);
                }
                other => return Err(Error::usage(format!("unknown parameter `{other}` in `{s}`"))),
            }
        }
        let no_scale = |member: Catalog| -> Result<Catalog> {
            match scale {
                Some(_) => Err(Error::usage(format!("`{name}` takes no scale parameter"))),
                None => Ok(member),
            }
        };
        match name {
            "l1" => Ok(Catalog::L1 {
                scale: scale.unwrap_or(1.0),
                dim,
            }),
            "absbox" => Ok(Catalog::AbsBox {
                scale: scale.unwrap_or(1.0),
                dim,
            }),
            "box" => no_scale(Catalog::Box { dim }),
            "neglog" => no_scale(Catalog::NegLog { dim }),
            "sq" => no_scale(Catalog::HalfSquare { dim }),
            "negsqrt" => match dim {
                Some(n) if n != 1 => Err(Error::usage("negsqrt is one-dimensional")),
                _ => no_scale(Catalog::NegSqrt),
            },
            other => Err(Error::usage(format!("unknown function `{other}`"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn absbox(c: f64) -> Catalog {
        Catalog::abs_box(c)
    }

    #[test]
    fn eval_examples() {
        assert_eq!(Catalog::neg_log().eval(&[1.0]).unwrap(), ExtReal::Finite(0.0));
        assert_eq!(absbox(1.0).eval(&[2.0]).unwrap(), ExtReal::PosInf);
        assert_eq!(Catalog::half_square().eval(&[3.0, 4.0]).unwrap(), ExtReal::Finite(12.5));
        assert_eq!(Catalog::neg_log().eval(&[0.0]).unwrap(), ExtReal::PosInf);
        assert_eq!(Catalog::NegSqrt.eval(&[-1e-300]).unwrap(), ExtReal::PosInf);
        assert_eq!(Catalog::Box { dim: None }.eval(&[1.0, -1.0]).unwrap(), ExtReal::ZERO);
    }

    #[test]
    fn dimension_mismatch_is_usage_error() {
        let f = Catalog::neg_log().with_dim(3);
        assert!(matches!(f.eval(&[1.0, 1.0]), Err(Error::Usage(_))));
        assert!(matches!(Catalog::l1().eval(&[]), Err(Error::Usage(_))));
    }

    #[test]
    fn prox_examples() {
        let p = Catalog::neg_log().prox(&[0.0], 1.0).unwrap();
        assert_eq!(p.point, vec![1.0]);
        let p = absbox(1.0).prox(&[2.0], 0.5).unwrap();
        assert_eq!(p.point, vec![1.0]);
        assert_eq!(p.value, ExtReal::Finite(1.0));
        let p = Catalog::NegSqrt.prox(&[0.0], 2.0).unwrap();
        assert!((p.point[0] - 1.0).abs() < 1e-15);
        assert!((p.value.to_f64() + 1.0).abs() < 1e-15);
    }

    #[test]
    fn prox_rejects_nonpositive_lambda() {
        for lam in [0.0, -1.0, f64::NAN] {
            assert!(matches!(Catalog::l1().prox(&[1.0], lam), Err(Error::Usage(_))));
            assert!(matches!(
                Catalog::l1().prox_value_slope(&[1.0], lam),
                Err(Error::Usage(_))
            ));
        }
    }

    #[test]
    fn negsqrt_rejects_other_base_points() {
        assert!(matches!(Catalog::NegSqrt.prox(&[0.5], 1.0), Err(Error::Unsupported(_))));
    }

    #[test]
    fn domain_projection_examples() {
        let d = Catalog::neg_log().domain_projection(&[-1.0]).unwrap();
        assert_eq!(d.point, vec![0.0]);
        assert_eq!(d.value, ExtReal::PosInf);
        let d = Catalog::l1().domain_projection(&[5.0, -5.0]).unwrap();
        assert_eq!(d.point, vec![5.0, -5.0]);
        assert_eq!(d.value, ExtReal::Finite(10.0));
        let d = absbox(1.0).domain_projection(&[3.0]).unwrap();
        assert_eq!(d.point, vec![1.0]);
        assert_eq!(d.value, ExtReal::Finite(1.0));
    }

    #[test]
    fn slope_examples() {
        let s = Catalog::half_square().prox_value_slope(&[2.0], 1.0).unwrap();
        assert!((s + 0.5).abs() < 1e-15);
        let s = Catalog::l1().prox_value_slope(&[-2.0, 0.8, 3.0, 1.3], 1.5).unwrap();
        assert_eq!(s, -2.0);
        let s = absbox(1.0).prox_value_slope(&[2.0], 0.5).unwrap();
        assert_eq!(s, 0.0);
    }

    #[test]
    fn slope_at_l1_kink_is_right_hand() {
        // |x₂| = λ exactly: that coordinate leaves the active set to the right.
        let s = Catalog::l1().prox_value_slope(&[3.0, 1.5], 1.5).unwrap();
        assert_eq!(s, -1.0);
    }

    #[test]
    fn fused_summary_matches_generic_path() {
        let x = [0.7, -1.9, 0.05, 2.4];
        for f in [
            Catalog::l1(),
            Catalog::L1 { scale: 0.5, dim: None },
            absbox(2.0),
            Catalog::Box { dim: None },
            Catalog::neg_log(),
            Catalog::half_square(),
        ] {
            for lam in [0.01, 0.3, 1.0, 4.0] {
                let fused = f.prox_summary(&x, lam).unwrap();
                let p = f.prox(&x, lam).unwrap();
                let v = f.eval(&p.point).unwrap().finite().unwrap();
                assert!((fused.value - v).abs() <= 1e-12 * (1.0 + v.abs()), "{f} value");
                assert!((fused.value - p.value.to_f64()).abs() <= 1e-12 * (1.0 + v.abs()));
                let d = sq_dist(&x, &p.point);
                assert!((fused.dist_sq - d).abs() <= 1e-12 * (1.0 + d), "{f} dist");
            }
        }
    }

    #[test]
    fn descriptors_round_trip() {
        for s in [
            "l1:scale=1",
            "l1:scale=2,n=4",
            "box",
            "box:n=3",
            "absbox:scale=2",
            "neglog:n=1000",
            "negsqrt",
            "sq:n=2",
        ] {
            let f: Catalog = s.parse().unwrap();
            let back: Catalog = f.to_string().parse().unwrap();
            assert_eq!(f, back, "{s}");
        }
        assert_eq!("l1".parse::<Catalog>().unwrap(), Catalog::l1());
        assert_eq!(
            "neglog:n=1000".parse::<Catalog>().unwrap(),
            Catalog::NegLog { dim: Some(1000) }
        );
    }

    #[test]
    fn malformed_descriptors() {
        for s in [
            "",
            "l2",
            "l1:scale",
            "l1:scale=-1",
            "l1:n=0",
            "box:scale=2",
            "negsqrt:n=2",
            "l1:foo=1",
        ] {
            assert!(matches!(s.parse::<Catalog>(), Err(Error::Usage(_))), "{s}");
        }
    }

    #[test]
    fn level_witness_is_strictly_feasible() {
        for (f, alpha) in [
            (Catalog::l1(), 0.5),
            (Catalog::neg_log(), -3.0),
            (Catalog::neg_log(), 2.0),
            (Catalog::NegSqrt, -2.0),
            (absbox(2.0), 0.1),
        ] {
            let n = if f == Catalog::NegSqrt { 1 } else { 3 };
            let w = f.level_witness(alpha, n).unwrap();
            assert!(f.eval(&w).unwrap() < ExtReal::Finite(alpha), "{f}");
        }
        assert!(Catalog::l1().level_witness(0.0, 2).is_none());
    }
}
