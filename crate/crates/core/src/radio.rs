//! Propagation, contour radii, power conversions and planar geometry.
//!
//! Path loss follows the COST-231 Hata closed form. It is evaluated as-is at
//! 3.6 GHz even though the model was fitted up to 2 GHz.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Distances below this are clamped before taking the logarithm.
pub const MIN_DISTANCE_KM: f64 = 0.001;

/// Mean earth radius used by the equirectangular projection.
pub const EARTH_RADIUS_KM: f64 = 6371.0;

/// COST-231 environment correction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Environment {
    /// Dense urban core, +3 dB.
    #[default]
    Metropolitan,
    /// Medium-sized city or suburban centre, +0 dB.
    MediumCity,
}

impl Environment {
    pub fn correction_db(self) -> f64 {
        match self {
            Environment::Metropolitan => 3.0,
            Environment::MediumCity => 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadioParams {
    pub freq_mhz: f64,
    pub tx_power_dbm: f64,
    pub h_tx_m: f64,
    pub h_rx_m: f64,
    /// Service contour level (dBm per 10 MHz).
    pub service_threshold_dbm: f64,
    /// Interference contour level (dBm per 10 MHz).
    pub interference_threshold_dbm: f64,
    /// Carrier-sense / energy-detection level (dBm per 10 MHz).
    pub cs_threshold_dbm: f64,
    pub env: Environment,
}

impl Default for RadioParams {
    fn default() -> Self {
        RadioParams {
            freq_mhz: 3600.0,
            tx_power_dbm: 30.0,
            h_tx_m: 3.0,
            h_rx_m: 1.5,
            service_threshold_dbm: -96.0,
            interference_threshold_dbm: -80.0,
            cs_threshold_dbm: -75.0,
            env: Environment::Metropolitan,
        }
    }
}

impl RadioParams {
    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.freq_mhz,
            self.tx_power_dbm,
            self.h_tx_m,
            self.h_rx_m,
            self.service_threshold_dbm,
            self.interference_threshold_dbm,
            self.cs_threshold_dbm,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidRadio("non-finite parameter".into()));
        }
        if self.freq_mhz <= 0.0 || self.h_tx_m <= 0.0 || self.h_rx_m <= 0.0 {
            return Err(Error::InvalidRadio(
                "frequency and antenna heights must be positive".into(),
            ));
        }
        if !(self.service_threshold_dbm < self.interference_threshold_dbm
            && self.interference_threshold_dbm < self.cs_threshold_dbm
            && self.cs_threshold_dbm < self.tx_power_dbm)
        {
            return Err(Error::InvalidRadio(
                "thresholds must satisfy service < interference < cs < tx power".into(),
            ));
        }
        Ok(())
    }

    /// Mobile antenna correction a(h_rx) for small and medium cities.
    fn mobile_correction_db(&self) -> f64 {
        let lf = self.freq_mhz.log10();
        (1.1 * lf - 0.7) * self.h_rx_m - (1.56 * lf - 0.8)
    }

    /// Distance-independent part of the loss (the loss at 1 km).
    fn intercept_db(&self) -> f64 {
        46.3 + 33.9 * self.freq_mhz.log10()
            - 13.82 * self.h_tx_m.log10()
            - self.mobile_correction_db()
            + self.env.correction_db()
    }

    /// Loss slope in dB per decade of distance.
    fn slope_db_per_decade(&self) -> f64 {
        44.9 - 6.55 * self.h_tx_m.log10()
    }

    /// Service contour radius of a node transmitting with these params.
    pub fn service_radius_km(&self) -> f64 {
        contour_radius(self.tx_power_dbm, self.service_threshold_dbm, self)
            .expect("validated params keep the service threshold below tx power")
    }

    /// Interference contour radius of a node transmitting with these params.
    pub fn interference_radius_km(&self) -> f64 {
        contour_radius(self.tx_power_dbm, self.interference_threshold_dbm, self)
            .expect("validated params keep the interference threshold below tx power")
    }

    /// Received power (dBm) at distance `d_km` from a transmitter with these params.
    pub fn received_dbm(&self, d_km: f64) -> f64 {
        self.tx_power_dbm - path_loss_db(d_km.max(MIN_DISTANCE_KM), self).unwrap_or(0.0)
    }

    /// Received power in watts at distance `d_km`.
    pub fn received_watts(&self, d_km: f64) -> f64 {
        dbm_to_watts(self.received_dbm(d_km))
    }
}

pub fn dbm_to_watts(p_dbm: f64) -> f64 {
    10f64.powf((p_dbm - 30.0) / 10.0)
}

pub fn watts_to_dbm(p_w: f64) -> f64 {
    10.0 * p_w.log10() + 30.0
}

/// COST-231 Hata path loss in dB at distance `d_km`.
///
/// Distances in `(0, MIN_DISTANCE_KM)` are clamped; non-positive distances are rejected.
pub fn path_loss_db(d_km: f64, params: &RadioParams) -> Result<f64> {
    if !(d_km > 0.0) {
        return Err(Error::InvalidDistance(d_km));
    }
    let d = d_km.max(MIN_DISTANCE_KM);
    Ok(params.intercept_db() + params.slope_db_per_decade() * d.log10())
}

/// Distance at which a transmitter of power `tx_dbm` is received at `threshold_dbm`.
///
/// The loss is affine in `log10(d)`, so the inversion is closed form.
pub fn contour_radius(tx_dbm: f64, threshold_dbm: f64, params: &RadioParams) -> Result<f64> {
    if !(threshold_dbm < tx_dbm) {
        return Err(Error::ContourUndefined {
            tx_dbm,
            threshold_dbm,
        });
    }
    let loss = tx_dbm - threshold_dbm;
    let exponent = (loss - params.intercept_db()) / params.slope_db_per_decade();
    Ok(10f64.powf(exponent))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct Point {
    pub x_km: f64,
    pub y_km: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x_km: 0.0, y_km: 0.0 };

    pub fn new(x_km: f64, y_km: f64) -> Self {
        Point { x_km, y_km }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        planar_distance(*self, *other)
    }
}

pub fn planar_distance(a: Point, b: Point) -> f64 {
    (a.x_km - b.x_km).hypot(a.y_km - b.y_km)
}

/// Equirectangular projection of WGS84 degrees about `(lat0, lon0)`.
pub fn project_equirectangular(lat: f64, lon: f64, lat0: f64, lon0: f64) -> Point {
    let x = EARTH_RADIUS_KM * (lon - lon0).to_radians() * lat0.to_radians().cos();
    let y = EARTH_RADIUS_KM * (lat - lat0).to_radians();
    Point::new(x, y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    // Direct evaluation of the closed form with the default parameters.
    const PL_1KM_METRO: f64 = 163.194_771_810_716_25;
    const SERVICE_RADIUS_KM: f64 = 0.128_717_423_403_721_4;

    #[test]
    fn dbm_watt_definitions() {
        assert_relative_eq!(dbm_to_watts(30.0), 1.0, max_relative = 1e-15);
        assert_relative_eq!(dbm_to_watts(0.0), 0.001, max_relative = 1e-15);
        assert_relative_eq!(dbm_to_watts(-80.0), 1e-11, max_relative = 1e-12);
    }

    #[test]
    fn golden_path_loss_at_one_km() {
        let p = RadioParams::default();
        assert_relative_eq!(path_loss_db(1.0, &p).unwrap(), PL_1KM_METRO, epsilon = 1e-9);
        let medium = RadioParams {
            env: Environment::MediumCity,
            ..p
        };
        assert_relative_eq!(
            path_loss_db(1.0, &medium).unwrap(),
            PL_1KM_METRO - 3.0,
            epsilon = 1e-9
        );
    }

    #[test]
    fn golden_service_radius() {
        let p = RadioParams::default();
        let r = contour_radius(30.0, -96.0, &p).unwrap();
        assert_relative_eq!(r, SERVICE_RADIUS_KM, max_relative = 1e-9);
    }

    #[test]
    fn clamp_below_min_distance() {
        let p = RadioParams::default();
        assert_eq!(
            path_loss_db(0.0005, &p).unwrap(),
            path_loss_db(0.001, &p).unwrap()
        );
        assert!(path_loss_db(0.0, &p).is_err());
        assert!(path_loss_db(-1.0, &p).is_err());
    }

    #[test]
    fn contour_nesting() {
        let p = RadioParams::default();
        let svc = contour_radius(30.0, -96.0, &p).unwrap();
        let int = contour_radius(30.0, -80.0, &p).unwrap();
        let cs = contour_radius(30.0, -75.0, &p).unwrap();
        assert!(svc > int && int > cs);
        assert!(contour_radius(30.0, 30.0, &p).is_err());
        assert!(contour_radius(30.0, 31.0, &p).is_err());
    }

    #[test]
    fn planar_distance_basics() {
        let a = Point::new(0.0, 0.0);
        let b = Point::new(3.0, 4.0);
        assert_eq!(planar_distance(a, a), 0.0);
        assert_eq!(planar_distance(a, b), 5.0);
        assert_eq!(planar_distance(b, a), planar_distance(a, b));
    }

    #[test]
    fn default_params_are_valid() {
        RadioParams::default().validate().unwrap();
        let bad = RadioParams {
            cs_threshold_dbm: -90.0,
            ..RadioParams::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn projection_is_local_metric() {
        // one hundredth of a degree of latitude is about 1.112 km
        let p = project_equirectangular(40.75, -73.99, 40.74, -73.99);
        assert_relative_eq!(p.y_km, 1.111_949, max_relative = 1e-5);
        assert_eq!(p.x_km, 0.0);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn watts_roundtrip(p in -200.0f64..100.0) {
                let back = watts_to_dbm(dbm_to_watts(p));
                prop_assert!((back - p).abs() <= 1e-12 * p.abs().max(1.0));
            }

            #[test]
            fn contour_inverts_threshold(
                freq in 150.0f64..6000.0,
                h_tx in 1.0f64..50.0,
                h_rx in 1.0f64..10.0,
                tx in 0.0f64..47.0,
                gap in 1.0f64..150.0,
            ) {
                let p = RadioParams { freq_mhz: freq, h_tx_m: h_tx, h_rx_m: h_rx, tx_power_dbm: tx, ..RadioParams::default() };
                let th = tx - gap;
                let r = contour_radius(tx, th, &p).unwrap();
                // only meaningful where the clamp is inactive
                prop_assume!(r >= MIN_DISTANCE_KM);
                let got = tx - path_loss_db(r, &p).unwrap();
                prop_assert!((got - th).abs() < 1e-6);
            }
        }
    }
}
