//! Enstrophy-normalised steepest-descent stirring velocity.
//!
//! For a mean-zero scalar `θ` the field
//!
//! ```text
//! u = -Δ⁻¹P(θ ∇Δ⁻¹θ) / ‖∇Δ⁻¹P(θ ∇Δ⁻¹θ)‖_{L²}
//! ```
//!
//! maximises the instantaneous decay of `‖θ‖²_{H⁻¹}` among incompressible
//! fields with `‖∇u‖_{L²} = 1`. Along the transport equation
//! `d/dt ‖θ‖²_{H⁻¹} = -2⟨u, θ∇Δ⁻¹θ⟩`, and for this `u` the pairing equals
//! the raw norm in the denominator.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{ScalarField, VectorField};
use crate::spectral::{self, check_mean_zero};

/// Default relative threshold below which the descent direction is treated as vanishing.
pub const DEFAULT_DEGENERACY_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct VelocityDesignResult {
    /// Designed velocity in real space; zero when `degenerate`.
    pub u: VectorField,
    /// `‖∇Δ⁻¹P(θ∇Δ⁻¹θ)‖_{L²}` before normalisation.
    pub raw_norm: f64,
    pub degenerate: bool,
    /// `⟨u, θ∇Δ⁻¹θ⟩`; the mix-norm satisfies `d/dt ‖θ‖²_{H⁻¹} = -2·pairing`.
    pub pairing: f64,
}

impl VelocityDesignResult {
    /// `d/dt ‖θ‖²_{H⁻¹}` under this velocity.
    pub fn h_neg1_sq_rate(&self) -> f64 {
        -2.0 * self.pairing
    }
}

/// The dealiased stirring flux `θ ∇Δ⁻¹θ` in spectral form.
pub fn stirring_flux(theta: &ScalarField) -> Result<VectorField> {
    let grid = *theta.grid();
    let inv_grad = spectral::inverse_gradient(theta)?;
    let mut fields: Vec<ScalarField> = inv_grad.into_components();
    fields.push(theta.clone());
    let real = spectral::to_real_fields(&fields);
    let (th, grads) = real.split_last().expect("theta present");
    let th = th.values();
    let products: Vec<ScalarField> = grads
        .iter()
        .map(|g| {
            let vals = g.values().iter().zip(th.iter()).map(|(a, b)| a * b).collect();
            ScalarField::from_values(grid, vals).expect("grid length")
        })
        .collect();
    let spec = spectral::to_spectral_fields(&products);
    VectorField::new(spec.iter().map(spectral::dealias).collect())
}

/// Designs the steepest-descent velocity for `theta`.
///
/// Returns `Err(Degenerate)` for `θ ≡ 0` and a result flagged `degenerate`
/// (with `u = 0`) when the raw norm falls below
/// `degeneracy_floor · ‖θ‖²_{L²}`.
pub fn steepest_descent_velocity(
    theta: &ScalarField,
    degeneracy_floor: f64,
) -> Result<VelocityDesignResult> {
    let grid = *theta.grid();
    let coeffs = theta.coefficients();
    let l2_sq: f64 = coeffs.iter().map(|z| z.norm_sqr()).sum();
    if l2_sq == 0.0 {
        return Err(Error::Degenerate);
    }
    check_mean_zero(&coeffs)?;

    let flux = stirring_flux(theta)?;
    let projected = spectral::leray_project(&flux);
    let potential: Vec<ScalarField> = projected
        .components()
        .iter()
        .map(|q| spectral::inverse_laplacian_unchecked(&grid, &q.coefficients()))
        .collect();

    // ‖∇φ‖²_{L²} = Σ_i Σ_k 4π²|k|² |φ̂_i(k)|²
    let mut raw_sq = 0.0;
    for phi in &potential {
        for (idx, z) in phi.coefficients().iter().enumerate() {
            let k = grid.wavevector(idx);
            let k2: f64 = k[..grid.dim()].iter().map(|&x| (x * x) as f64).sum();
            raw_sq += 4.0 * PI * PI * k2 * z.norm_sqr();
        }
    }
    let raw_norm = libm::sqrt(raw_sq);

    if raw_norm < degeneracy_floor * l2_sq {
        return Ok(VelocityDesignResult {
            u: VectorField::zeros(grid),
            raw_norm,
            degenerate: true,
            pairing: 0.0,
        });
    }

    let scale = -1.0 / raw_norm;
    let u_spec: Vec<ScalarField> = potential.iter().map(|p| p.scaled(scale)).collect();

    let mut pairing = 0.0;
    for (u, w) in u_spec.iter().zip(flux.components()) {
        let uc = u.coefficients();
        let wc = w.coefficients();
        pairing += uc
            .iter()
            .zip(wc.iter())
            .map(|(a, b)| (a * b.conj()).re)
            .sum::<f64>();
    }

    Ok(VelocityDesignResult {
        u: VectorField::new(spectral::to_real_fields(&u_spec))?,
        raw_norm,
        degenerate: false,
        pairing,
    })
}

/// Convenience: `‖θ‖²_{L²}` from spectral coefficients.
pub fn l2_sq(coeffs: &[Complex64]) -> f64 {
    coeffs.iter().map(|z| z.norm_sqr()).sum()
}
