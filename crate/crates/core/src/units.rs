//! Per-unit conversions.

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum UnitsError {
    #[error("base value must be positive, got {0}")]
    NonPositiveBase(f64),
}

fn check(base: f64) -> Result<f64, UnitsError> {
    if base > 0.0 && base.is_finite() {
        Ok(base)
    } else {
        Err(UnitsError::NonPositiveBase(base))
    }
}

/// Re-expresses a percent impedance given on the equipment's own rating as
/// per unit on the system base:
/// `Z_pu = Z_% / 100 * (S_sys / S_own) * (V_own / V_sys)^2`.
pub fn impedance_to_system_base(
    z_pct: Complex64,
    own_mva: f64,
    own_kv: f64,
    sys_mva: f64,
    sys_kv: f64,
) -> Result<Complex64, UnitsError> {
    let (own_mva, own_kv, sys_mva, sys_kv) = (check(own_mva)?, check(own_kv)?, check(sys_mva)?, check(sys_kv)?);
    let ratio = own_kv / sys_kv;
    Ok(z_pct / 100.0 * (sys_mva / own_mva) * ratio * ratio)
}

pub fn voltage_to_pu(kv: f64, base_kv: f64) -> Result<f64, UnitsError> {
    Ok(kv / check(base_kv)?)
}

/// `(p_mw, q_mvar)` to per unit on `base_mva`.
pub fn power_to_pu(p_mw: f64, q_mvar: f64, base_mva: f64) -> Result<(f64, f64), UnitsError> {
    let base = check(base_mva)?;
    Ok((p_mw / base, q_mvar / base))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn base_change() {
        let z = impedance_to_system_base(Complex64::new(0.0, 8.0), 50.0, 4.16, 100.0, 4.16).unwrap();
        assert!((z.im - 0.16).abs() < 1e-15);
        assert_eq!(z.re, 0.0);
    }

    #[test]
    fn identity_voltage() {
        assert_eq!(voltage_to_pu(0.6, 0.6).unwrap(), 1.0);
    }

    #[test]
    fn load_on_base() {
        let (p, q) = power_to_pu(30.0, 10.0, 100.0).unwrap();
        assert!((p - 0.3).abs() < 1e-15 && (q - 0.1).abs() < 1e-15);
    }

    #[test]
    fn bad_bases() {
        assert!(voltage_to_pu(1.0, 0.0).is_err());
        assert!(power_to_pu(1.0, 1.0, -100.0).is_err());
        assert!(impedance_to_system_base(Complex64::new(0.0, 1.0), 0.0, 1.0, 1.0, 1.0).is_err());
    }
}
