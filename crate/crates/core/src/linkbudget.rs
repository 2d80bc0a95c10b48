//! Thermal noise, per-gateway SNR and threshold algebra.

use alloc::vec::Vec;
use core::fmt;

use crate::propagation::{PathGainMap, NO_PATH};
use crate::scene::GridSpec;

/// Boltzmann constant, J/K (exact SI value).
pub const BOLTZMANN: f64 = 1.380_649e-23;

/// SNR of cells without a usable path; below every finite threshold.
pub const SNR_NONE: f64 = f64::NEG_INFINITY;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LinkBudgetError {
    NonFinite,
    InvalidBandwidth,
    InvalidTemperature,
    NegativeNoiseFigure,
    NegativeMargin,
    InvalidCarrier,
    ThresholdOrder,
}

impl fmt::Display for LinkBudgetError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LinkBudgetError::NonFinite => "link budget parameters must be finite",
            LinkBudgetError::InvalidBandwidth => "bandwidth_hz must be > 0",
            LinkBudgetError::InvalidTemperature => "ambient_temp_k must be > 0",
            LinkBudgetError::NegativeNoiseFigure => "noise_figure_db must be >= 0",
            LinkBudgetError::NegativeMargin => "impl_margin_db must be >= 0",
            LinkBudgetError::InvalidCarrier => "carrier_hz must be > 0",
            LinkBudgetError::ThresholdOrder => {
                "edge threshold must not exceed the robust threshold"
            }
        })
    }
}

impl core::error::Error for LinkBudgetError {}

/// Link budget parameters. `Default` is the 1 GHz / 125 kHz gateway setup
/// (20 dBm, 6 dB NF, 290 K, 10 dB margin).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    pub carrier_hz: f64,
    pub bandwidth_hz: f64,
    pub tx_power_dbm: f64,
    pub noise_figure_db: f64,
    pub ambient_temp_k: f64,
    pub impl_margin_db: f64,
}

impl Default for LinkBudget {
    fn default() -> Self {
        LinkBudget {
            carrier_hz: 1.0e9,
            bandwidth_hz: 125e3,
            tx_power_dbm: 20.0,
            noise_figure_db: 6.0,
            ambient_temp_k: 290.0,
            impl_margin_db: 10.0,
        }
    }
}

impl LinkBudget {
    pub fn validate(&self) -> Result<(), LinkBudgetError> {
        let all = [
            self.carrier_hz,
            self.bandwidth_hz,
            self.tx_power_dbm,
            self.noise_figure_db,
            self.ambient_temp_k,
            self.impl_margin_db,
        ];
        if !all.iter().all(|v| v.is_finite()) {
            return Err(LinkBudgetError::NonFinite);
        }
        if self.carrier_hz <= 0.0 {
            return Err(LinkBudgetError::InvalidCarrier);
        }
        if self.bandwidth_hz <= 0.0 {
            return Err(LinkBudgetError::InvalidBandwidth);
        }
        if self.ambient_temp_k <= 0.0 {
            return Err(LinkBudgetError::InvalidTemperature);
        }
        if self.noise_figure_db < 0.0 {
            return Err(LinkBudgetError::NegativeNoiseFigure);
        }
        if self.impl_margin_db < 0.0 {
            return Err(LinkBudgetError::NegativeMargin);
        }
        Ok(())
    }

    /// Receiver noise power `10 log10(k T B / 1 mW) + NF`, in dBm.
    pub fn noise_power_dbm(&self) -> f64 {
        10.0 * libm::log10(BOLTZMANN * self.ambient_temp_k * self.bandwidth_hz / 1e-3)
            + self.noise_figure_db
    }

    /// SNR in dB for path gain `gain_db`; [`SNR_NONE`] for [`NO_PATH`].
    pub fn snr_db(&self, gain_db: f64) -> f64 {
        if gain_db == NO_PATH {
            return SNR_NONE;
        }
        self.tx_power_dbm + gain_db - self.noise_power_dbm() - self.impl_margin_db
    }

    /// Smallest path gain meeting `gamma_db`: `snr >= gamma <=> gain >= this`.
    pub fn min_gain_for_threshold(&self, gamma_db: f64) -> f64 {
        gamma_db - self.tx_power_dbm + self.noise_power_dbm() + self.impl_margin_db
    }

    pub fn snr_map(&self, gains: &PathGainMap) -> SnrMap {
        let noise = self.noise_power_dbm();
        let snr_db = gains
            .gains_db()
            .iter()
            .map(|&g| {
                if g == NO_PATH {
                    SNR_NONE
                } else {
                    self.tx_power_dbm + g - noise - self.impl_margin_db
                }
            })
            .collect();
        SnrMap {
            site_id: gains.site_id(),
            grid: *gains.grid(),
            snr_db,
        }
    }
}

/// Robust and edge SNR thresholds in dB.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    pub robust_db: f64,
    pub edge_db: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            robust_db: -10.0,
            edge_db: -22.0,
        }
    }
}

impl Thresholds {
    pub fn validate(&self) -> Result<(), LinkBudgetError> {
        if !(self.robust_db.is_finite() && self.edge_db.is_finite()) {
            return Err(LinkBudgetError::NonFinite);
        }
        if self.edge_db > self.robust_db {
            return Err(LinkBudgetError::ThresholdOrder);
        }
        Ok(())
    }
}

/// Per-cell SNR of one gateway.
#[derive(Debug, Clone, PartialEq)]
pub struct SnrMap {
    site_id: usize,
    grid: GridSpec,
    snr_db: Vec<f64>,
}

impl SnrMap {
    /// Builds a map directly from SNR values (used by tests and tools that
    /// already hold SNRs). Length must match the grid.
    pub fn from_values(site_id: usize, grid: GridSpec, snr_db: Vec<f64>) -> Option<Self> {
        (snr_db.len() == grid.cell_count()).then_some(SnrMap {
            site_id,
            grid,
            snr_db,
        })
    }

    pub fn site_id(&self) -> usize {
        self.site_id
    }
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }
    pub fn snr_db(&self) -> &[f64] {
        &self.snr_db
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::Point2;
    use alloc::vec;

    // mpmath, 40 digits: 10*log10(1.380649e-23 * 290 * 125e3 / 1e-3)
    const KTB_DBM: f64 = -123.006_087_064_147_54;

    #[test]
    fn noise_power_reference() {
        let lb = LinkBudget::default();
        assert!((lb.noise_power_dbm() - (KTB_DBM + 6.0)).abs() < 1e-9);
        assert!((lb.noise_power_dbm() - -117.01).abs() <= 0.01);
        let no_nf = LinkBudget {
            noise_figure_db: 0.0,
            ..lb
        };
        assert!((no_nf.noise_power_dbm() - -123.01).abs() <= 0.01);
    }

    #[test]
    fn bandwidth_scaling() {
        let lb = LinkBudget::default();
        let wide = LinkBudget {
            bandwidth_hz: 4.0 * lb.bandwidth_hz,
            ..lb
        };
        assert!(
            (wide.noise_power_dbm() - lb.noise_power_dbm() - 6.020_599_913_279_624).abs() < 1e-9
        );
    }

    #[test]
    fn snr_reference() {
        let lb = LinkBudget::default();
        assert!((lb.snr_db(-120.0) - 7.006_087_064_147_54).abs() < 1e-9);
        let g0 = lb.noise_power_dbm() + lb.impl_margin_db - lb.tx_power_dbm;
        assert!(lb.snr_db(g0).abs() < 1e-12);
        assert_eq!(lb.snr_db(NO_PATH), SNR_NONE);
    }

    #[test]
    fn min_gain_reference() {
        let lb = LinkBudget::default();
        let robust = lb.min_gain_for_threshold(-10.0);
        assert!((robust - -137.006_087_064_147_54).abs() < 1e-9);
        assert!((robust - lb.min_gain_for_threshold(-22.0) - 12.0).abs() < 1e-9);
        // inclusive boundary
        assert!(lb.snr_db(robust) >= -10.0 - 1e-12);
    }

    #[test]
    fn snr_map_applies_sentinel() {
        let grid = crate::scene::GridSpec::new(Point2::new(0.0, 0.0), 1.0, 1.0, 3, 1, 1.5).unwrap();
        let gains = PathGainMap::computed(2, grid, vec![-120.0, NO_PATH, -90.0]).unwrap();
        let snr = LinkBudget::default().snr_map(&gains);
        assert_eq!(snr.site_id(), 2);
        assert_eq!(snr.snr_db()[1], SNR_NONE);
        assert!((snr.snr_db()[0] - 7.006_087_064_147_54).abs() < 1e-9);
        assert!((snr.snr_db()[2] - snr.snr_db()[0] - 30.0).abs() < 1e-9);
    }

    #[test]
    fn validation() {
        assert!(LinkBudget::default().validate().is_ok());
        let bad = LinkBudget {
            bandwidth_hz: 0.0,
            ..Default::default()
        };
        assert_eq!(bad.validate(), Err(LinkBudgetError::InvalidBandwidth));
        let bad = LinkBudget {
            impl_margin_db: -1.0,
            ..Default::default()
        };
        assert_eq!(bad.validate(), Err(LinkBudgetError::NegativeMargin));
        assert!(Thresholds::default().validate().is_ok());
        assert_eq!(
            Thresholds {
                robust_db: -22.0,
                edge_db: -10.0
            }
            .validate(),
            Err(LinkBudgetError::ThresholdOrder)
        );
    }
}
