//! Constituent materials, Mori-Tanaka homogenization and the steady-state
//! through-thickness temperature field.
//!
//! The plate is a two-phase ceramic/metal composite graded by a power-law
//! volume fraction. Constituent moduli and expansion coefficients follow a
//! cubic-in-temperature model; effective properties at a thickness
//! coordinate come from the Mori-Tanaka scheme, with density by rule of
//! mixtures.

use crate::{Error, Result};

/// Coefficients of the cubic temperature model
/// `P(T) = P0 (Pm1/T + 1 + P1 T + P2 T^2 + P3 T^3)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TemperatureCoefficients {
    pub p0: f64,
    pub pm1: f64,
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
}

impl TemperatureCoefficients {
    pub fn constant(p0: f64) -> Self {
        Self { p0, pm1: 0.0, p1: 0.0, p2: 0.0, p3: 0.0 }
    }
}

/// One constituent phase (ceramic or metal).
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseMaterial {
    pub name: String,
    /// Young's modulus coefficients, Pa.
    pub e_coeffs: TemperatureCoefficients,
    /// Thermal expansion coefficients, 1/K.
    pub alpha_coeffs: TemperatureCoefficients,
    /// Mass density, kg/m^3.
    pub rho: f64,
    /// Thermal conductivity, W/mK.
    pub kappa: f64,
    /// Poisson ratio of the phase.
    pub nu: f64,
}

impl PhaseMaterial {
    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0) {
            return Err(Error::invalid_input(format!("{}: rho must be > 0", self.name)));
        }
        if !(self.kappa > 0.0) {
            return Err(Error::invalid_input(format!("{}: kappa must be > 0", self.name)));
        }
        if !(self.nu > 0.0 && self.nu < 0.5) {
            return Err(Error::invalid_input(format!("{}: nu must be in (0, 0.5)", self.name)));
        }
        if !(self.e_coeffs.p0 > 0.0) || !(self.alpha_coeffs.p0 > 0.0) {
            return Err(Error::invalid_input(format!("{}: P0 must be > 0", self.name)));
        }
        Ok(())
    }
}

/// How the effective Poisson ratio is evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PoissonMode {
    /// Fixed value through the thickness (the usual choice for this class
    /// of study).
    Constant(f64),
    /// Derived from the Mori-Tanaka bulk/shear moduli.
    MoriTanaka,
}

/// A graded ceramic/metal section definition.
#[derive(Debug, Clone, PartialEq)]
pub struct FgmSpec {
    pub ceramic: PhaseMaterial,
    pub metal: PhaseMaterial,
    /// Volume fraction exponent (gradient index), >= 0.
    pub n: f64,
    pub poisson_mode: PoissonMode,
}

impl FgmSpec {
    pub fn new(ceramic: PhaseMaterial, metal: PhaseMaterial, n: f64) -> Result<Self> {
        let spec = Self { ceramic, metal, n, poisson_mode: PoissonMode::Constant(0.28) };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        self.ceramic.validate()?;
        self.metal.validate()?;
        if !(self.n >= 0.0) {
            return Err(Error::invalid_input("gradient index n must be >= 0"));
        }
        Ok(())
    }

    /// Poisson ratio used in reference (nondimensionalization) formulas.
    pub fn reference_nu(&self) -> f64 {
        match self.poisson_mode {
            PoissonMode::Constant(v) => v,
            PoissonMode::MoriTanaka => self.ceramic.nu,
        }
    }

    /// Same gradient with the index replaced.
    pub fn with_index(&self, n: f64) -> Self {
        Self { n, ..self.clone() }
    }
}

/// Surface temperatures and the stress-free reference temperature, K.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalState {
    /// Ceramic-face temperature (z = +h/2).
    pub tc: f64,
    /// Metal-face temperature (z = -h/2).
    pub tm: f64,
    /// Reference temperature at which thermal strain vanishes.
    pub t0: f64,
}

impl ThermalState {
    pub fn new(tc: f64, tm: f64, t0: f64) -> Result<Self> {
        if !(tc > 0.0 && tm > 0.0 && t0 > 0.0) {
            return Err(Error::invalid_input("temperatures must be positive (K)"));
        }
        Ok(Self { tc, tm, t0 })
    }

    pub fn ambient() -> Self {
        Self { tc: 300.0, tm: 300.0, t0: 300.0 }
    }

    /// True when the state produces no thermal strain anywhere.
    pub fn is_stress_free(&self) -> bool {
        self.tc == self.t0 && self.tm == self.t0
    }
}

/// Effective properties at one thickness coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointProperties {
    pub e: f64,
    pub nu: f64,
    pub alpha: f64,
    pub kappa: f64,
    pub rho: f64,
    /// Local temperature, K.
    pub t: f64,
}

/// Evaluate the cubic temperature model. Errors when the result is not a
/// finite positive-definable quantity (T <= 0 or overflow).
pub fn evaluate_property(coeffs: &TemperatureCoefficients, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::invalid_input("property evaluation requires T > 0"));
    }
    let v = coeffs.p0 * (coeffs.pm1 / t + 1.0 + coeffs.p1 * t + coeffs.p2 * t * t + coeffs.p3 * t * t * t);
    if !v.is_finite() {
        return Err(Error::invalid_input("property evaluation overflowed"));
    }
    Ok(v)
}

/// Ceramic volume fraction `Vc = ((2z + h)/(2h))^n`.
pub fn volume_fraction(z: f64, h: f64, n: f64) -> Result<f64> {
    let half = h / 2.0;
    if z < -half - 1e-12 * h || z > half + 1e-12 * h {
        return Err(Error::domain(format!("z = {z} outside [-h/2, h/2]")));
    }
    let xi = ((2.0 * z + h) / (2.0 * h)).clamp(0.0, 1.0);
    Ok(xi.powf(n))
}

/// Mori-Tanaka effective bulk and shear moduli for ceramic fraction `vc`.
pub fn mori_tanaka_moduli(kc: f64, gc: f64, km: f64, gm: f64, vc: f64) -> (f64, f64) {
    let k = km + (kc - km) * vc / (1.0 + (1.0 - vc) * 3.0 * (kc - km) / (3.0 * km + 4.0 * gm));
    let f1 = gm * (9.0 * km + 8.0 * gm) / (6.0 * (km + 2.0 * gm));
    let g = gm + (gc - gm) * vc / (1.0 + (1.0 - vc) * (gc - gm) / (gm + f1));
    (k, g)
}

/// Young's modulus and Poisson ratio from bulk/shear moduli.
pub fn elastic_constants(k: f64, g: f64) -> (f64, f64) {
    let e = 9.0 * k * g / (3.0 * k + g);
    let nu = (3.0 * k - 2.0 * g) / (2.0 * (3.0 * k + g));
    (e, nu)
}

/// Bulk and shear moduli from Young's modulus and Poisson ratio.
pub fn bulk_shear_from_e_nu(e: f64, nu: f64) -> (f64, f64) {
    (e / (3.0 * (1.0 - 2.0 * nu)), e / (2.0 * (1.0 + nu)))
}

/// Effective conductivity (Mori-Tanaka form). Exposed for reporting; the
/// temperature profile below uses its own closed-form series.
pub fn effective_conductivity(kc: f64, km: f64, vc: f64) -> f64 {
    km + (kc - km) * vc / (1.0 + (1.0 - vc) * (kc - km) / (3.0 * km))
}

/// Effective thermal expansion from the bulk-modulus correspondence.
pub fn effective_cte(alpha_c: f64, alpha_m: f64, k: f64, kc: f64, km: f64) -> Result<f64> {
    if kc == km {
        if alpha_c == alpha_m {
            return Ok(alpha_m);
        }
        return Err(Error::domain("identical phase bulk moduli with distinct expansions"));
    }
    Ok(alpha_m + (alpha_c - alpha_m) * (1.0 / k - 1.0 / km) / (1.0 / kc - 1.0 / km))
}

/// Rule-of-mixtures density.
pub fn effective_density(rho_c: f64, rho_m: f64, vc: f64) -> f64 {
    rho_c * vc + rho_m * (1.0 - vc)
}

/// Steady-state temperature at `z` from the truncated polynomial series
/// solution of the one-dimensional conduction equation.
pub fn temperature_profile(z: f64, h: f64, n: f64, kc: f64, km: f64, tc: f64, tm: f64) -> Result<f64> {
    let xi = ((2.0 * z + h) / (2.0 * h)).clamp(0.0, 1.0);
    let eta = eta_series(xi, n, kc, km)?;
    Ok(tm + (tc - tm) * eta)
}

/// The series factor eta(xi) with its normalization constant C; terms
/// through (kappa_cm/kappa_m)^5.
fn eta_series(xi: f64, n: f64, kc: f64, km: f64) -> Result<f64> {
    let r = (kc - km) / km;
    let mut s = xi;
    let mut c = 1.0;
    let mut rp = 1.0;
    for i in 1..=5u32 {
        rp *= -r;
        let denom = i as f64 * n + 1.0;
        let term = rp / denom;
        s += term * xi.powf(i as f64 * n + 1.0);
        c += term;
    }
    if !(c > 0.0) || !c.is_finite() || !s.is_finite() {
        return Err(Error::series_divergence(
            "temperature series normalization is non-positive or non-finite",
        ));
    }
    Ok(s / c)
}

/// Fully composed effective properties at `z` for the given thermal state.
pub fn point_properties(fgm: &FgmSpec, thermal: &ThermalState, z: f64, h: f64) -> Result<PointProperties> {
    let t = temperature_profile(z, h, fgm.n, fgm.ceramic.kappa, fgm.metal.kappa, thermal.tc, thermal.tm)?;
    let vc = volume_fraction(z, h, fgm.n)?;

    let ec = evaluate_property(&fgm.ceramic.e_coeffs, t)?;
    let em = evaluate_property(&fgm.metal.e_coeffs, t)?;
    let ac = evaluate_property(&fgm.ceramic.alpha_coeffs, t)?;
    let am = evaluate_property(&fgm.metal.alpha_coeffs, t)?;

    let (kc, gc) = bulk_shear_from_e_nu(ec, fgm.ceramic.nu);
    let (km, gm) = bulk_shear_from_e_nu(em, fgm.metal.nu);
    let (k, g) = mori_tanaka_moduli(kc, gc, km, gm, vc);
    let (e, nu_mt) = elastic_constants(k, g);

    let alpha = if (kc - km).abs() < 1e-9 * kc.abs() {
        // degenerate identical phases
        am + (ac - am) * vc
    } else {
        effective_cte(ac, am, k, kc, km)?
    };
    let kappa = effective_conductivity(fgm.ceramic.kappa, fgm.metal.kappa, vc);
    let rho = effective_density(fgm.ceramic.rho, fgm.metal.rho, vc);

    let nu = match fgm.poisson_mode {
        PoissonMode::Constant(v) => v,
        PoissonMode::MoriTanaka => nu_mt,
    };

    Ok(PointProperties { e, nu, alpha, kappa, rho, t })
}

/// Silicon nitride with the standard cubic temperature coefficients.
pub fn si3n4() -> PhaseMaterial {
    PhaseMaterial {
        name: "SI3N4".into(),
        e_coeffs: TemperatureCoefficients { p0: 348.43e9, pm1: 0.0, p1: -3.070e-4, p2: 2.160e-7, p3: -8.946e-11 },
        alpha_coeffs: TemperatureCoefficients { p0: 5.8723e-6, pm1: 0.0, p1: 9.095e-4, p2: 0.0, p3: 0.0 },
        rho: 2370.0,
        kappa: 9.19,
        nu: 0.28,
    }
}

/// Stainless steel SUS304 with the standard cubic temperature coefficients.
pub fn sus304() -> PhaseMaterial {
    PhaseMaterial {
        name: "SUS304".into(),
        e_coeffs: TemperatureCoefficients { p0: 201.04e9, pm1: 0.0, p1: 3.079e-4, p2: -6.534e-7, p3: 0.0 },
        alpha_coeffs: TemperatureCoefficients { p0: 12.330e-6, pm1: 0.0, p1: 8.086e-4, p2: 0.0, p3: 0.0 },
        rho: 8166.0,
        kappa: 12.04,
        nu: 0.28,
    }
}

/// Temperature-independent isotropic phase, handy for validation studies.
pub fn isotropic_phase(name: &str, e: f64, nu: f64, rho: f64, alpha: f64, kappa: f64) -> PhaseMaterial {
    PhaseMaterial {
        name: name.into(),
        e_coeffs: TemperatureCoefficients::constant(e),
        alpha_coeffs: TemperatureCoefficients::constant(alpha),
        rho,
        kappa,
        nu,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn modulus_evaluation_matches_hand_values() {
        // frozen from a direct scalar evaluation of the cubic model
        let e = evaluate_property(&sus304().e_coeffs, 300.0).unwrap();
        assert_relative_eq!(e, 2.0778770656e11, max_relative = 1e-9);
        let e = evaluate_property(&si3n4().e_coeffs, 300.0).unwrap();
        assert_relative_eq!(e, 3.222714714094e11, max_relative = 1e-9);
    }

    #[test]
    fn constant_coefficients_return_base_value() {
        let c = TemperatureCoefficients::constant(42.0);
        assert_eq!(evaluate_property(&c, 123.0).unwrap(), 42.0);
        assert_eq!(evaluate_property(&c, 900.0).unwrap(), 42.0);
    }

    #[test]
    fn property_rejects_nonpositive_temperature() {
        let c = TemperatureCoefficients::constant(1.0);
        assert!(evaluate_property(&c, 0.0).is_err());
        assert!(evaluate_property(&c, -10.0).is_err());
    }

    #[test]
    fn volume_fraction_limits() {
        let h = 0.1;
        assert_relative_eq!(volume_fraction(h / 2.0, h, 3.7).unwrap(), 1.0);
        assert_relative_eq!(volume_fraction(-h / 2.0, h, 2.0).unwrap(), 0.0);
        assert_relative_eq!(volume_fraction(0.0123, h, 0.0).unwrap(), 1.0);
        assert!(volume_fraction(h, h, 1.0).is_err());
    }

    #[test]
    fn mori_tanaka_single_phase_limits() {
        let (k, g) = mori_tanaka_moduli(2.0e11, 1.0e11, 1.5e11, 0.7e11, 1.0);
        assert_relative_eq!(k, 2.0e11);
        assert_relative_eq!(g, 1.0e11);
        let (k, g) = mori_tanaka_moduli(2.0e11, 1.0e11, 1.5e11, 0.7e11, 0.0);
        assert_relative_eq!(k, 1.5e11);
        assert_relative_eq!(g, 0.7e11);
    }

    #[test]
    fn mori_tanaka_half_mix_matches_oracle() {
        // frozen from an independent scalar evaluation with the 300 K phase
        // moduli of SI3N4/SUS304 (nu = 0.28 both phases)
        let (kc, gc) = bulk_shear_from_e_nu(3.222714714094e11, 0.28);
        let (km, gm) = bulk_shear_from_e_nu(2.0778770656e11, 0.28);
        let (k, g) = mori_tanaka_moduli(kc, gc, km, gm, 0.5);
        assert_relative_eq!(k, 1.9469419271872e11, max_relative = 1e-9);
        assert_relative_eq!(g, 1.0090866380586e11, max_relative = 1e-9);
        // strictly inside the Reuss/Voigt bounds
        let reuss = 1.0 / (0.5 / kc + 0.5 / km);
        let voigt = 0.5 * (kc + km);
        assert!(k > reuss && k < voigt);
    }

    #[test]
    fn elastic_constants_identities() {
        let (e, nu) = elastic_constants(1.0, 1.0);
        assert_relative_eq!(e, 2.25);
        assert_relative_eq!(nu, 0.125);
        let (k, g) = bulk_shear_from_e_nu(200e9, 0.3);
        let (e, nu) = elastic_constants(k, g);
        assert_relative_eq!(e, 200e9, max_relative = 1e-12);
        assert_relative_eq!(nu, 0.3, max_relative = 1e-12);
    }

    #[test]
    fn conductivity_endpoints_and_midpoint() {
        assert_relative_eq!(effective_conductivity(9.19, 12.04, 0.0), 12.04);
        assert_relative_eq!(effective_conductivity(9.19, 12.04, 1.0), 9.19);
        let mid = effective_conductivity(9.19, 12.04, 0.5);
        assert_relative_eq!(mid, 10.556472114137, max_relative = 1e-10);
        assert!(mid > 9.19 && mid < 12.04);
    }

    #[test]
    fn cte_endpoints_and_chained_value() {
        let (kc, gc) = bulk_shear_from_e_nu(3.222714714094e11, 0.28);
        let (km, gm) = bulk_shear_from_e_nu(2.0778770656e11, 0.28);
        let (ac, am) = (7.474557055e-6, 1.53210114e-5);
        assert_relative_eq!(effective_cte(ac, am, km, kc, km).unwrap(), am);
        assert_relative_eq!(effective_cte(ac, am, kc, kc, km).unwrap(), ac);
        let (k, _) = mori_tanaka_moduli(kc, gc, km, gm, 0.5);
        let a = effective_cte(ac, am, k, kc, km).unwrap();
        assert_relative_eq!(a, 1.1091738230405e-5, max_relative = 1e-9);
        assert!(effective_cte(1.0e-6, 2.0e-6, km, km, km).is_err());
    }

    #[test]
    fn density_mixture() {
        assert_relative_eq!(effective_density(2370.0, 8166.0, 1.0), 2370.0);
        assert_relative_eq!(effective_density(2370.0, 8166.0, 0.0), 8166.0);
        assert_relative_eq!(effective_density(2370.0, 8166.0, 0.5), 5268.0);
    }

    #[test]
    fn temperature_profile_boundaries_and_uniform_kappa() {
        let h = 0.1;
        // equal conductivities kill the higher-order terms: linear profile
        let t = temperature_profile(0.0, h, 2.0, 10.0, 10.0, 600.0, 300.0).unwrap();
        assert_relative_eq!(t, 450.0, epsilon = 1e-10);
        let t = temperature_profile(h / 2.0, h, 1.0, 9.19, 12.04, 600.0, 300.0).unwrap();
        assert_relative_eq!(t, 600.0, epsilon = 1e-9);
        let t = temperature_profile(-h / 2.0, h, 1.0, 9.19, 12.04, 600.0, 300.0).unwrap();
        assert_relative_eq!(t, 300.0, epsilon = 1e-9);
    }

    #[test]
    fn temperature_profile_matches_conduction_oracle() {
        // independent oracle: trapezoid quadrature of 1/kappa(z) on 1e4+1
        // points solves the two-point conduction problem exactly
        let (h, n, tc, tm) = (0.1, 1.0, 600.0, 300.0);
        let (kc, km) = (9.19, 12.04);
        let m = 10_000usize;
        let mut cum = vec![0.0f64; m + 1];
        let dz = h / m as f64;
        let kap = |z: f64| km + (kc - km) * ((2.0 * z + h) / (2.0 * h)).powf(n);
        for i in 1..=m {
            let z0 = -h / 2.0 + (i - 1) as f64 * dz;
            let z1 = z0 + dz;
            cum[i] = cum[i - 1] + 0.5 * (1.0 / kap(z0) + 1.0 / kap(z1)) * dz;
        }
        let t_oracle = tm + (tc - tm) * cum[m / 2] / cum[m];
        let t_series = temperature_profile(0.0, h, n, kc, km, tc, tm).unwrap();
        assert_relative_eq!(t_series, t_oracle, max_relative = 1e-3);
        assert_relative_eq!(t_series, 439.905034801, max_relative = 1e-9); // frozen
    }

    #[test]
    fn temperature_profile_monotone_between_faces() {
        let h = 0.02;
        for &n in &[0.0, 0.5, 1.0, 5.0] {
            let mut prev = 300.0;
            for i in 0..=200 {
                let z = -h / 2.0 + h * i as f64 / 200.0;
                let t = temperature_profile(z, h, n, 9.19, 12.04, 600.0, 300.0).unwrap();
                assert!(t >= prev - 1e-9, "profile not monotone at n={n}");
                prev = t;
            }
            assert_relative_eq!(prev, 600.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn point_properties_limit_cases() {
        let fgm = FgmSpec::new(si3n4(), sus304(), 0.0).unwrap();
        let amb = ThermalState::ambient();
        let p = point_properties(&fgm, &amb, 0.0123, 0.1).unwrap();
        assert_relative_eq!(p.e, 3.222714714094e11, max_relative = 1e-9);
        assert_relative_eq!(p.rho, 2370.0);

        let fgm = FgmSpec::new(si3n4(), sus304(), 2.0).unwrap();
        let p = point_properties(&fgm, &amb, -0.05, 0.1).unwrap();
        assert_relative_eq!(p.e, 2.0778770656e11, max_relative = 1e-9);
        assert_relative_eq!(p.rho, 8166.0);
        assert_relative_eq!(p.alpha, 1.53210114e-5, max_relative = 1e-9);
    }

    #[test]
    fn point_properties_thermal_record() {
        // frozen chained-oracle record: n=1, Tc=600, Tm=300, z=0, h=0.1
        let fgm = FgmSpec::new(si3n4(), sus304(), 1.0).unwrap();
        let th = ThermalState::new(600.0, 300.0, 300.0).unwrap();
        let p = point_properties(&fgm, &th, 0.0, 0.1).unwrap();
        assert_relative_eq!(p.t, 439.905034801, max_relative = 1e-9);
        assert_eq!(p.nu, 0.28);
        assert!(p.rho > 2370.0 && p.rho < 8166.0);
        assert!(p.e > 0.0 && p.alpha > 0.0);
    }

    #[test]
    fn identical_phases_make_properties_uniform() {
        let phase = isotropic_phase("steel", 200e9, 0.3, 7800.0, 1.2e-5, 45.0);
        let mut fgm = FgmSpec::new(phase.clone(), phase, 3.0).unwrap();
        fgm.poisson_mode = PoissonMode::MoriTanaka;
        let th = ThermalState::ambient();
        let p0 = point_properties(&fgm, &th, -0.05, 0.1).unwrap();
        for &z in &[-0.03, 0.0, 0.02, 0.05] {
            let p = point_properties(&fgm, &th, z, 0.1).unwrap();
            assert_relative_eq!(p.e, p0.e, max_relative = 1e-12);
            assert_relative_eq!(p.alpha, p0.alpha, max_relative = 1e-12);
            assert_relative_eq!(p.rho, p0.rho, max_relative = 1e-12);
        }
    }

    proptest! {
        #[test]
        fn volume_fraction_in_unit_interval(z01 in 0.0f64..=1.0, n in 0.0f64..12.0) {
            let h = 0.07;
            let z = -h / 2.0 + z01 * h;
            let vc = volume_fraction(z, h, n).unwrap();
            prop_assert!((0.0..=1.0).contains(&vc));
        }

        #[test]
        fn mori_tanaka_within_voigt_reuss(
            ec in 5.0e10f64..6.0e11, em in 5.0e10f64..6.0e11,
            nuc in 0.05f64..0.45, num in 0.05f64..0.45,
            vc in 0.0f64..=1.0,
        ) {
            let (kc, gc) = bulk_shear_from_e_nu(ec, nuc);
            let (km, gm) = bulk_shear_from_e_nu(em, num);
            let (k, g) = mori_tanaka_moduli(kc, gc, km, gm, vc);
            let tol = 1e-9;
            let (kr, kv) = (1.0/(vc/kc + (1.0-vc)/km), vc*kc + (1.0-vc)*km);
            let (gr, gv) = (1.0/(vc/gc + (1.0-vc)/gm), vc*gc + (1.0-vc)*gm);
            prop_assert!(k >= kr*(1.0-tol) && k <= kv*(1.0+tol));
            prop_assert!(g >= gr*(1.0-tol) && g <= gv*(1.0+tol));
        }

        #[test]
        fn density_linear_in_vc(rc in 100.0f64..2e4, rm in 100.0f64..2e4) {
            let mid = effective_density(rc, rm, 0.5);
            prop_assert!((mid - 0.5*(rc+rm)).abs() <= 1e-9 * (rc+rm));
        }
    }
}
