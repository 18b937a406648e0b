use crate::spectral::{RealField, C64};

/// Linear frequency `|ξ|^{3/2}` (`S/2 = 1`, `g = 0`).
pub fn free_frequency(xi: f64) -> f64 {
    xi.abs().powf(1.5)
}

/// Exact flow of `u_t = v`, `v_t = −ω²(ξ)u` over time `h`, mode by mode;
/// `w2` gives `ω²`. Zero-frequency modes drift linearly.
pub fn rotate_modes<F: Fn(f64) -> f64>(u: &RealField, v: &RealField, h: f64, w2: F) -> (RealField, RealField) {
    let g = u.grid();
    let (us, vs) = (u.spectrum(), v.spectrum());
    let mut ou = vec![C64::new(0.0, 0.0); us.len()];
    let mut ov = ou.clone();
    for (k, &xi) in g.wavenumbers().iter().enumerate() {
        let om2 = w2(xi);
        let (c, s_over, ms) = if om2 == 0.0 {
            (1.0, h, 0.0)
        } else {
            let om = om2.sqrt();
            let (sn, cs) = (om * h).sin_cos();
            (cs, sn / om, -om * sn)
        };
        ou[k] = us[k] * c + vs[k] * s_over;
        ov[k] = us[k] * ms + vs[k] * c;
    }
    (
        RealField::new(g, g.inverse_real(&ou)).expect("grid length"),
        RealField::new(g, g.inverse_real(&ov)).expect("grid length"),
    )
}

/// `(U(t), ∂_tU(t))` for `∂_t²U = H∂³U` with `U(0) = U₀`, `∂_tU(0) = U₁`.
pub fn free_propagator(u0: &RealField, u1: &RealField, t: f64) -> (RealField, RealField) {
    rotate_modes(u0, u1, t, |xi| xi.abs().powi(3))
}
