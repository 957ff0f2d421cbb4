//! Physical and numerical coefficients of the model.

use std::fmt;
use std::sync::Arc;

use nalgebra::Matrix2;

use crate::{Error, Point, Result, C64};

/// Symmetric positive-definite 2×2 tensor field, evaluated pointwise.
#[derive(Clone)]
pub enum TensorField {
    /// `k · I` everywhere.
    Isotropic(f64),
    /// A fixed tensor.
    Constant(Matrix2<f64>),
    /// Arbitrary function of position.
    Function(Arc<dyn Fn(Point) -> Matrix2<f64> + Send + Sync>),
}

impl TensorField {
    pub fn eval(&self, x: Point) -> Matrix2<f64> {
        match self {
            TensorField::Isotropic(k) => Matrix2::identity() * *k,
            TensorField::Constant(m) => *m,
            TensorField::Function(f) => f(x),
        }
    }

    /// Horizontal layers: `layers[i] = (y_top, k)` gives `k · I` for
    /// `y <= y_top`, scanned bottom to top.
    pub fn layered(layers: Vec<(f64, f64)>) -> Self {
        TensorField::Function(Arc::new(move |x: Point| {
            let k = layers
                .iter()
                .find(|(top, _)| x.y <= *top)
                .or(layers.last())
                .map(|(_, k)| *k)
                .unwrap_or(0.0);
            Matrix2::identity() * k
        }))
    }

    /// Largest eigenvalue over a set of sample points.
    pub fn max_eigenvalue<I: IntoIterator<Item = Point>>(&self, points: I) -> f64 {
        points
            .into_iter()
            .map(|x| self.eval(x).symmetric_eigenvalues().max())
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Checks symmetry and positive definiteness at `x`.
    pub fn is_spd_at(&self, x: Point) -> bool {
        let m = self.eval(x);
        let sym = (m[(0, 1)] - m[(1, 0)]).abs() <= 1e-14 * m.norm().max(1.0);
        sym && m[(0, 0)] > 0.0 && m.determinant() > 0.0
    }
}

impl fmt::Debug for TensorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TensorField::Isotropic(k) => write!(f, "Isotropic({k:e})"),
            TensorField::Constant(m) => write!(f, "Constant({m:?})"),
            TensorField::Function(_) => write!(f, "Function(..)"),
        }
    }
}

/// All coefficients of the frequency-domain model plus the temperature
/// stabilization parameter.
#[derive(Clone, Debug)]
pub struct ProblemParams {
    /// Angular frequency ω.
    pub omega: f64,
    pub rho_s: f64,
    pub rho_f: f64,
    /// Porosity φ.
    pub phi: f64,
    /// Tortuosity `a`.
    pub tortuosity: f64,
    pub lambda: f64,
    pub mu: f64,
    /// Biot–Willis constant α.
    pub alpha: f64,
    /// Thermal stress coefficient β.
    pub beta: f64,
    /// Thermal capacity.
    pub a0: f64,
    /// Thermal dilatation.
    pub b0: f64,
    /// Specific storage.
    pub c0: f64,
    /// Relaxation time τ.
    pub tau: f64,
    /// Permeability over viscosity, K.
    pub permeability: TensorField,
    /// Effective thermal conductivity Θ.
    pub conductivity: TensorField,
    /// Stabilization parameter δ.
    pub delta: f64,
}

impl Default for ProblemParams {
    fn default() -> Self {
        Self::table_defaults()
    }
}

/// Mixture density ρ and apparent fluid density ρ_w.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Densities {
    pub rho: f64,
    pub rho_w: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ValidationMode {
    Strict,
    Experimental,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<String>,
    pub warnings: Vec<String>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty() && self.warnings.is_empty()
    }
}

impl ProblemParams {
    /// Reference coefficient set used by all convergence studies, with δ = 0.1.
    pub fn table_defaults() -> Self {
        ProblemParams {
            omega: 1.0,
            rho_s: 0.03,
            rho_f: 0.03,
            phi: 0.5,
            tortuosity: 1.0,
            lambda: 1.0,
            mu: 1.0,
            alpha: 1.0,
            beta: 0.8,
            a0: 0.2,
            b0: 0.1,
            c0: 0.2,
            tau: 1.5e-2,
            permeability: TensorField::Isotropic(1.0),
            conductivity: TensorField::Isotropic(1.0),
            delta: 0.1,
        }
    }

    /// Checks the basic field invariants. Degenerate storage/thermal
    /// coefficients (zero) pass here; see [`ProblemParams::validate`].
    pub fn check_invariants(&self) -> Result<()> {
        let mut bad = Vec::new();
        let mut require = |ok: bool, what: &str| {
            if !ok {
                bad.push(what.to_string());
            }
        };
        require(self.omega > 0.0 && self.omega.is_finite(), "omega > 0");
        require(self.phi > 0.0 && self.phi < 1.0, "0 < phi < 1");
        require(self.tortuosity >= 1.0, "a >= 1");
        require(self.mu > 0.0, "mu > 0");
        require(self.lambda > 0.0, "lambda > 0");
        require(self.alpha > self.phi && self.alpha <= 1.0, "phi < alpha <= 1");
        require(self.beta > 0.0, "beta > 0");
        require(self.rho_s >= 0.0 && self.rho_f >= 0.0, "densities >= 0");
        require(self.a0 >= 0.0, "a0 >= 0");
        require(self.b0 >= 0.0, "b0 >= 0");
        require(self.c0 >= 0.0, "c0 >= 0");
        require(self.tau >= 0.0, "tau >= 0");
        require(self.delta >= 0.0, "delta >= 0");
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidParameter(bad.join(", ")))
        }
    }

    pub fn derived_densities(&self) -> Densities {
        Densities {
            rho: self.phi * self.rho_f + (1.0 - self.phi) * self.rho_s,
            rho_w: self.tortuosity * self.rho_f / self.phi,
        }
    }

    /// Coefficient `i / (iω − ω²τ) = (1 − iωτ) / (ω + ω³τ²)` of the
    /// conduction term.
    pub fn conduction_coefficient(&self) -> C64 {
        let (w, t) = (self.omega, self.tau);
        C64::new(1.0, -w * t) / (w + w * w * w * t * t)
    }

    /// `φ / (2π a k_max ρ_f)`: the frequency below which the dynamic Darcy
    /// law is valid.
    pub fn critical_frequency(&self, k_max: f64) -> Result<f64> {
        if self.rho_f <= 0.0 {
            return Err(Error::InvalidParameter("critical frequency needs rho_f > 0".into()));
        }
        if k_max <= 0.0 {
            return Err(Error::InvalidParameter("critical frequency needs k_max > 0".into()));
        }
        Ok(self.phi / (2.0 * std::f64::consts::PI * self.tortuosity * k_max * self.rho_f))
    }

    /// Checks the model assumptions on the coefficients at the given sample
    /// points (used for the tensor fields).
    ///
    /// Strict mode fails on any violation. Experimental mode accepts the
    /// degenerate `a0 = b0 = c0 = 0` family and reports it as warnings.
    pub fn validate_at(
        &self,
        mode: ValidationMode,
        samples: &[Point],
    ) -> Result<ValidationReport> {
        let mut report = ValidationReport::default();
        if let Err(Error::InvalidParameter(msg)) = self.check_invariants() {
            report.violations.push(msg);
        }
        let mut assumption = Vec::new();
        if self.c0 <= 0.0 {
            assumption.push("c0 > 0".to_string());
        } else if self.a0 * self.c0 < self.b0 * self.b0 * (1.0 - 1e-12) {
            assumption.push(format!(
                "a0 >= b0^2/c0 ({} < {})",
                self.a0,
                self.b0 * self.b0 / self.c0
            ));
        }
        for x in samples {
            if !self.permeability.is_spd_at(*x) {
                report.violations.push(format!("K not SPD at ({}, {})", x.x, x.y));
                break;
            }
        }
        for x in samples {
            if !self.conductivity.is_spd_at(*x) {
                report.violations.push(format!("Theta not SPD at ({}, {})", x.x, x.y));
                break;
            }
        }
        if self.omega * self.tau >= 1.0 {
            report.warnings.push(format!("omega*tau = {} >= 1", self.omega * self.tau));
        }
        match mode {
            ValidationMode::Strict => report.violations.extend(assumption),
            ValidationMode::Experimental => report.warnings.extend(assumption),
        }
        if mode == ValidationMode::Strict && !report.violations.is_empty() {
            return Err(Error::AssumptionViolated(report.violations));
        }
        Ok(report)
    }

    /// [`ProblemParams::validate_at`] sampling the tensor fields on a 5×5
    /// grid of the unit square.
    pub fn validate(&self, mode: ValidationMode) -> Result<ValidationReport> {
        let samples: Vec<Point> = (0..5)
            .flat_map(|j| (0..5).map(move |i| Point::new(0.1 + 0.2 * i as f64, 0.1 + 0.2 * j as f64)))
            .collect();
        self.validate_at(mode, &samples)
    }
}

/// Lamé coefficients `(λ, μ)` from Young's modulus and Poisson's ratio.
pub fn lame_from_e_nu(e: f64, nu: f64) -> Result<(f64, f64)> {
    if e <= 0.0 {
        return Err(Error::InvalidParameter(format!("E must be positive, got {e}")));
    }
    if !(0.0..0.5).contains(&nu) {
        return Err(Error::InvalidParameter(format!("nu must lie in [0, 0.5), got {nu}")));
    }
    let lambda = e * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
    let mu = e / (2.0 * (1.0 + nu));
    Ok((lambda, mu))
}
