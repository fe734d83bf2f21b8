//! Weather severity, atmospheric attenuation and the radar link budget.
//!
//! Weather is described by three independent severities on a 0–10 scale
//! (rain, fog, sea state). A configurable [`SeverityMap`] turns them into
//! physical quantities, which in turn drive
//!
//! * rain specific attenuation `γ_r = k(f)·R^α(f)` (ITU-R P.838-3),
//! * cloud/fog specific attenuation `γ_f = K_l(f, T)·M` (ITU-R P.840,
//!   double-Debye permittivity of liquid water),
//! * total path attenuation `A_w = (γ_r + γ_f)·d` and its linear loss,
//! * the monostatic radar equation SNR, and
//! * range and Doppler-velocity measurement standard deviations.

use std::f64::consts::PI;
use std::sync::LazyLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
pub const BOLTZMANN: f64 = 1.380_649e-23;

/// Reference temperature for the liquid-water coefficient when none is given.
pub const DEFAULT_AIR_TEMPERATURE: f64 = 293.15;

const MIN_FREQ_GHZ: f64 = 1.0;
const MAX_FREQ_GHZ: f64 = 100.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WeatherError {
    #[error("{component} severity {value} is outside [0, 10]")]
    SeverityOutOfRange { component: &'static str, value: f64 },
    #[error("frequency {ghz} GHz is outside the supported range [1, 100] GHz")]
    FrequencyOutOfRange { ghz: f64 },
    #[error("{name} must be non-negative, got {value}")]
    Negative { name: &'static str, value: f64 },
    #[error("{name} must be strictly positive, got {value}")]
    NotPositive { name: &'static str, value: f64 },
    #[error("invalid severity map `{name}`: {reason}")]
    InvalidMap { name: &'static str, reason: String },
}

pub type Result<T> = std::result::Result<T, WeatherError>;

fn ensure_positive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(WeatherError::NotPositive { name, value })
    }
}

fn ensure_non_negative(name: &'static str, value: f64) -> Result<()> {
    if value >= 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(WeatherError::Negative { name, value })
    }
}

// ---------------------------------------------------------------------------
// Severity and its physical mapping
// ---------------------------------------------------------------------------

/// Rain, fog and sea-state severities on a normalized 0–10 scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSeverity", deny_unknown_fields)]
pub struct WeatherSeverity {
    rain: f64,
    fog: f64,
    sea: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSeverity {
    rain: f64,
    fog: f64,
    sea: f64,
}

impl TryFrom<RawSeverity> for WeatherSeverity {
    type Error = WeatherError;
    fn try_from(raw: RawSeverity) -> Result<Self> {
        Self::new(raw.rain, raw.fog, raw.sea)
    }
}

impl WeatherSeverity {
    pub fn new(rain: f64, fog: f64, sea: f64) -> Result<Self> {
        for (component, value) in [("rain", rain), ("fog", fog), ("sea", sea)] {
            if !(0.0..=10.0).contains(&value) {
                return Err(WeatherError::SeverityOutOfRange { component, value });
            }
        }
        Ok(Self { rain, fog, sea })
    }

    pub fn ideal() -> Self {
        Self { rain: 0.0, fog: 0.0, sea: 0.0 }
    }

    pub fn moderate() -> Self {
        Self { rain: 5.0, fog: 5.0, sea: 5.0 }
    }

    pub fn severe() -> Self {
        Self { rain: 10.0, fog: 10.0, sea: 10.0 }
    }

    pub fn rain(&self) -> f64 {
        self.rain
    }

    pub fn fog(&self) -> f64 {
        self.fog
    }

    pub fn sea(&self) -> f64 {
        self.sea
    }
}

/// Monotone nondecreasing piecewise-linear function of severity.
///
/// Breakpoints must be sorted by severity, start at 0 and end at 10.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PiecewiseLinear {
    points: Vec<(f64, f64)>,
}

impl PiecewiseLinear {
    pub fn new(name: &'static str, points: Vec<(f64, f64)>) -> Result<Self> {
        let bad = |reason: &str| WeatherError::InvalidMap { name, reason: reason.to_owned() };
        if points.len() < 2 {
            return Err(bad("needs at least two breakpoints"));
        }
        if points[0].0 != 0.0 || points[points.len() - 1].0 != 10.0 {
            return Err(bad("breakpoints must span severities 0 to 10"));
        }
        for w in points.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(bad("severities must be strictly increasing"));
            }
            if w[1].1 < w[0].1 {
                return Err(bad("values must be nondecreasing"));
            }
        }
        if points.iter().any(|p| !p.1.is_finite()) {
            return Err(bad("values must be finite"));
        }
        Ok(Self { points })
    }

    fn linear(name: &'static str, at_zero: f64, at_ten: f64) -> Self {
        Self::new(name, vec![(0.0, at_zero), (10.0, at_ten)]).expect("static map")
    }

    pub fn eval(&self, severity: f64) -> f64 {
        let pts = &self.points;
        let s = severity.clamp(0.0, 10.0);
        let i = pts.partition_point(|p| p.0 <= s).clamp(1, pts.len() - 1);
        let (x0, y0) = pts[i - 1];
        let (x1, y1) = pts[i];
        y0 + (y1 - y0) * (s - x0) / (x1 - x0)
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }
}

/// Configurable mapping from severities to physical weather.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SeverityMap {
    /// rain severity → rain rate, mm/h
    pub rain_rate: PiecewiseLinear,
    /// fog severity → liquid water content, g/m³
    pub liquid_water_content: PiecewiseLinear,
    /// sea severity → significant wave height, m
    pub significant_wave_height: PiecewiseLinear,
    /// sea severity → peak period, s
    pub peak_period: PiecewiseLinear,
    /// visibility = 1000 / (lwc · c_vis) m; logged only
    pub visibility_coefficient: f64,
    /// visibility reported in clear air, m
    pub clear_visibility: f64,
    pub air_temperature: f64,
}

impl Default for SeverityMap {
    fn default() -> Self {
        Self {
            rain_rate: PiecewiseLinear::linear("rain_rate", 0.0, 100.0),
            liquid_water_content: PiecewiseLinear::linear("liquid_water_content", 0.0, 0.5),
            significant_wave_height: PiecewiseLinear::linear("significant_wave_height", 0.5, 1.5),
            peak_period: PiecewiseLinear::linear("peak_period", 5.0, 8.0),
            visibility_coefficient: 20.0,
            clear_visibility: 50_000.0,
            air_temperature: DEFAULT_AIR_TEMPERATURE,
        }
    }
}

impl SeverityMap {
    pub fn validate(&self) -> Result<()> {
        PiecewiseLinear::new("rain_rate", self.rain_rate.points.clone())?;
        PiecewiseLinear::new("liquid_water_content", self.liquid_water_content.points.clone())?;
        PiecewiseLinear::new("significant_wave_height", self.significant_wave_height.points.clone())?;
        PiecewiseLinear::new("peak_period", self.peak_period.points.clone())?;
        let rain_max = self.rain_rate.eval(10.0);
        if self.rain_rate.eval(0.0) < 0.0 || rain_max > 100.0 {
            return Err(WeatherError::InvalidMap {
                name: "rain_rate",
                reason: "rain rate must stay within [0, 100] mm/h".into(),
            });
        }
        ensure_non_negative("liquid_water_content", self.liquid_water_content.eval(0.0))?;
        ensure_non_negative("significant_wave_height", self.significant_wave_height.eval(0.0))?;
        ensure_positive("peak_period", self.peak_period.eval(0.0))?;
        ensure_positive("visibility_coefficient", self.visibility_coefficient)?;
        ensure_positive("clear_visibility", self.clear_visibility)?;
        ensure_positive("air_temperature", self.air_temperature)
    }
}

/// Physical weather quantities derived from severities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalWeather {
    /// mm/h
    pub rain_rate: f64,
    /// g/m³
    pub liquid_water_content: f64,
    /// m
    pub visibility: f64,
    /// m
    pub significant_wave_height: f64,
    /// s
    pub peak_period: f64,
    /// K
    pub air_temperature: f64,
}

impl PhysicalWeather {
    pub fn clear() -> Self {
        severity_to_physical(&WeatherSeverity::ideal(), &SeverityMap::default())
    }
}

/// Maps a severity triple through the configured map.
pub fn severity_to_physical(sev: &WeatherSeverity, map: &SeverityMap) -> PhysicalWeather {
    let lwc = map.liquid_water_content.eval(sev.fog).max(0.0);
    let visibility = if lwc > 0.0 {
        (1000.0 / (lwc * map.visibility_coefficient)).min(map.clear_visibility)
    } else {
        map.clear_visibility
    };
    PhysicalWeather {
        rain_rate: map.rain_rate.eval(sev.rain).clamp(0.0, 100.0),
        liquid_water_content: lwc,
        visibility,
        significant_wave_height: map.significant_wave_height.eval(sev.sea).max(0.0),
        peak_period: map.peak_period.eval(sev.sea),
        air_temperature: map.air_temperature,
    }
}

// ---------------------------------------------------------------------------
// Rain: ITU-R P.838-3
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Polarization {
    #[default]
    Horizontal,
    Vertical,
}

#[derive(Debug, Clone, Copy)]
struct CoefficientRow {
    freq_ghz: f64,
    k_h: f64,
    alpha_h: f64,
    k_v: f64,
    alpha_v: f64,
}

static P838_TABLE: LazyLock<Vec<CoefficientRow>> = LazyLock::new(|| {
    parse_coefficient_table(include_str!("../data/itu_r_p838_3.txt"))
});

fn parse_coefficient_table(text: &str) -> Vec<CoefficientRow> {
    let rows: Vec<CoefficientRow> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|line| {
            let v: Vec<f64> = line
                .split_whitespace()
                .map(|t| t.parse().expect("numeric coefficient"))
                .collect();
            assert_eq!(v.len(), 5, "coefficient row needs 5 columns: {line}");
            CoefficientRow { freq_ghz: v[0], k_h: v[1], alpha_h: v[2], k_v: v[3], alpha_v: v[4] }
        })
        .collect();
    assert!(rows.windows(2).all(|w| w[0].freq_ghz < w[1].freq_ghz));
    rows
}

fn check_frequency(freq_hz: f64) -> Result<f64> {
    let ghz = freq_hz / 1e9;
    if !(MIN_FREQ_GHZ..=MAX_FREQ_GHZ).contains(&ghz) {
        return Err(WeatherError::FrequencyOutOfRange { ghz });
    }
    Ok(ghz)
}

/// `(k, α)` at `freq_hz`, interpolated log-log in frequency from the table.
pub fn rain_coefficients(freq_hz: f64, pol: Polarization) -> Result<(f64, f64)> {
    let ghz = check_frequency(freq_hz)?;
    let table = &*P838_TABLE;
    let pick = |r: &CoefficientRow| match pol {
        Polarization::Horizontal => (r.k_h, r.alpha_h),
        Polarization::Vertical => (r.k_v, r.alpha_v),
    };
    let hi = table.partition_point(|r| r.freq_ghz < ghz).min(table.len() - 1);
    if table[hi].freq_ghz == ghz || hi == 0 {
        return Ok(pick(&table[hi]));
    }
    let lo = hi - 1;
    let (k0, a0) = pick(&table[lo]);
    let (k1, a1) = pick(&table[hi]);
    let t = (ghz.ln() - table[lo].freq_ghz.ln()) / (table[hi].freq_ghz.ln() - table[lo].freq_ghz.ln());
    let k = (k0.ln() + t * (k1.ln() - k0.ln())).exp();
    let alpha = a0 + t * (a1 - a0);
    Ok((k, alpha))
}

/// Rain specific attenuation in dB/km for a rain rate in mm/h.
pub fn rain_specific_attenuation(rain_rate: f64, freq_hz: f64, pol: Polarization) -> Result<f64> {
    ensure_non_negative("rain_rate", rain_rate)?;
    let (k, alpha) = rain_coefficients(freq_hz, pol)?;
    if rain_rate == 0.0 {
        return Ok(0.0);
    }
    Ok(k * rain_rate.powf(alpha))
}

// ---------------------------------------------------------------------------
// Fog: ITU-R P.840
// ---------------------------------------------------------------------------

/// Liquid-water specific attenuation coefficient `K_l` in (dB/km)/(g/m³).
///
/// Rayleigh approximation with the double-Debye permittivity of water.
pub fn liquid_water_coefficient(freq_hz: f64, temperature: f64) -> Result<f64> {
    let f = check_frequency(freq_hz)?;
    ensure_positive("temperature", temperature)?;
    let theta = 300.0 / temperature;
    let eps0 = 77.66 + 103.3 * (theta - 1.0);
    let eps1 = 0.0671 * eps0;
    let eps2 = 3.52;
    let fp = 20.20 - 146.0 * (theta - 1.0) + 316.0 * (theta - 1.0).powi(2);
    let fs = 39.8 * fp;

    let rp = 1.0 + (f / fp).powi(2);
    let rs = 1.0 + (f / fs).powi(2);
    let eps_im = f * (eps0 - eps1) / (fp * rp) + f * (eps1 - eps2) / (fs * rs);
    let eps_re = (eps0 - eps1) / rp + (eps1 - eps2) / rs + eps2;
    let eta = (2.0 + eps_re) / eps_im;
    Ok(0.819 * f / (eps_im * (1.0 + eta * eta)))
}

/// Fog specific attenuation in dB/km for a liquid water content in g/m³.
pub fn fog_specific_attenuation(lwc: f64, freq_hz: f64, temperature: f64) -> Result<f64> {
    ensure_non_negative("liquid_water_content", lwc)?;
    Ok(liquid_water_coefficient(freq_hz, temperature)? * lwc)
}

// ---------------------------------------------------------------------------
// Path loss, SNR and measurement noise
// ---------------------------------------------------------------------------

/// Whether atmospheric loss is applied over the one-way or two-way path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathMode {
    /// Echo travels out and back: `d = 2·range`.
    #[default]
    RoundTrip,
    OneWay,
}

impl PathMode {
    pub fn path_km(self, range_m: f64) -> f64 {
        match self {
            PathMode::RoundTrip => 2.0 * range_m / 1000.0,
            PathMode::OneWay => range_m / 1000.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttenuationResult {
    /// dB/km
    pub gamma_rain: f64,
    /// dB/km
    pub gamma_fog: f64,
    /// dB
    pub path_loss: f64,
    /// 10^(path_loss/10)
    pub linear_loss: f64,
}

impl AttenuationResult {
    pub const NONE: AttenuationResult =
        AttenuationResult { gamma_rain: 0.0, gamma_fog: 0.0, path_loss: 0.0, linear_loss: 1.0 };
}

pub fn path_attenuation(
    gamma_rain: f64,
    gamma_fog: f64,
    range: f64,
    mode: PathMode,
) -> Result<AttenuationResult> {
    ensure_non_negative("gamma_rain", gamma_rain)?;
    ensure_non_negative("gamma_fog", gamma_fog)?;
    ensure_non_negative("range", range)?;
    let path_loss = (gamma_rain + gamma_fog) * mode.path_km(range);
    Ok(AttenuationResult {
        gamma_rain,
        gamma_fog,
        path_loss,
        linear_loss: 10f64.powf(path_loss / 10.0),
    })
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

/// Radar transmitter, receiver and tracker configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadarConfig {
    /// Hz
    pub frequency: f64,
    /// W
    pub transmit_power: f64,
    /// dB
    pub antenna_gain: f64,
    /// Hz
    pub bandwidth: f64,
    /// s
    pub dwell_time: f64,
    /// dB
    pub noise_figure: f64,
    /// K
    pub system_temperature: f64,
    /// m
    pub max_range: f64,
    /// Hz
    pub update_rate: f64,
    /// s
    pub track_window: f64,
    pub polarization: Polarization,
    pub path_mode: PathMode,
    /// Detections below this SNR are dropped. Disabled when `None`.
    pub snr_floor_db: Option<f64>,
}

impl Default for RadarConfig {
    fn default() -> Self {
        Self::nominal()
    }
}

impl RadarConfig {
    /// 10 kW, 26 dB, 20 MHz, 8 ms X-band set.
    pub fn nominal() -> Self {
        Self {
            frequency: 9.4e9,
            transmit_power: 10e3,
            antenna_gain: 26.0,
            bandwidth: 20e6,
            dwell_time: 8e-3,
            noise_figure: 5.0,
            system_temperature: 290.0,
            max_range: 12_000.0,
            update_rate: 1.0,
            track_window: 10.0,
            polarization: Polarization::Horizontal,
            path_mode: PathMode::RoundTrip,
            snr_floor_db: None,
        }
    }

    /// 25 kW, 30 dB, 28 MHz, 10 ms.
    pub fn high_power() -> Self {
        Self {
            transmit_power: 25e3,
            antenna_gain: 30.0,
            bandwidth: 28e6,
            dwell_time: 10e-3,
            ..Self::nominal()
        }
    }

    /// 7 kW, 22 dB, 10 MHz, 5 ms.
    pub fn low_power() -> Self {
        Self {
            transmit_power: 7e3,
            antenna_gain: 22.0,
            bandwidth: 10e6,
            dwell_time: 5e-3,
            ..Self::nominal()
        }
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.frequency
    }

    pub fn validate(&self) -> Result<()> {
        check_frequency(self.frequency)?;
        ensure_positive("transmit_power", self.transmit_power)?;
        ensure_positive("bandwidth", self.bandwidth)?;
        ensure_positive("dwell_time", self.dwell_time)?;
        ensure_positive("system_temperature", self.system_temperature)?;
        ensure_positive("max_range", self.max_range)?;
        ensure_positive("update_rate", self.update_rate)?;
        ensure_positive("track_window", self.track_window)?;
        if !self.antenna_gain.is_finite() || !self.noise_figure.is_finite() {
            return Err(WeatherError::NotPositive { name: "antenna_gain/noise_figure", value: f64::NAN });
        }
        Ok(())
    }

    /// Total specific attenuation for the given weather, split by cause.
    pub fn specific_attenuation(&self, weather: &PhysicalWeather) -> Result<(f64, f64)> {
        let rain = rain_specific_attenuation(weather.rain_rate, self.frequency, self.polarization)?;
        let fog = fog_specific_attenuation(
            weather.liquid_water_content,
            self.frequency,
            weather.air_temperature,
        )?;
        Ok((rain, fog))
    }
}

/// Monostatic radar equation SNR in dB.
pub fn compute_snr(cfg: &RadarConfig, range: f64, rcs: f64, loss: &AttenuationResult) -> Result<f64> {
    ensure_positive("range", range)?;
    ensure_positive("rcs", rcs)?;
    let gain = db_to_linear(cfg.antenna_gain);
    let noise_factor = db_to_linear(cfg.noise_figure);
    let lambda = cfg.wavelength();
    let signal = cfg.transmit_power * gain * gain * lambda * lambda * rcs;
    let noise = (4.0 * PI).powi(3)
        * range.powi(4)
        * BOLTZMANN
        * cfg.system_temperature
        * cfg.bandwidth
        * noise_factor
        * loss.linear_loss;
    Ok(linear_to_db(signal / noise))
}

/// `(σ_R, σ_v)` in m and m/s for a given SNR.
pub fn measurement_noise_stds(snr_db: f64, cfg: &RadarConfig) -> Result<(f64, f64)> {
    ensure_positive("bandwidth", cfg.bandwidth)?;
    ensure_positive("dwell_time", cfg.dwell_time)?;
    if !snr_db.is_finite() {
        return Err(WeatherError::NotPositive { name: "snr", value: snr_db });
    }
    let root = (2.0 * db_to_linear(snr_db)).sqrt();
    let sigma_range = SPEED_OF_LIGHT / (2.0 * cfg.bandwidth * root);
    let sigma_velocity = cfg.wavelength() / (2.0 * cfg.dwell_time * root);
    Ok((sigma_range, sigma_velocity))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn anchor_scenarios_map_exactly() {
        let map = SeverityMap::default();
        let ideal = severity_to_physical(&WeatherSeverity::ideal(), &map);
        assert_eq!(ideal.rain_rate, 0.0);
        assert_eq!(ideal.liquid_water_content, 0.0);
        assert_eq!(ideal.significant_wave_height, 0.5);

        let moderate = severity_to_physical(&WeatherSeverity::moderate(), &map);
        assert_eq!(moderate.rain_rate, 50.0);
        assert_relative_eq!(moderate.liquid_water_content, 0.25);
        assert_relative_eq!(moderate.significant_wave_height, 1.0);

        let severe = severity_to_physical(&WeatherSeverity::severe(), &map);
        assert_eq!(severe.rain_rate, 100.0);
        assert_relative_eq!(severe.liquid_water_content, 0.5);
        assert_relative_eq!(severe.significant_wave_height, 1.5);
    }

    #[test]
    fn severity_rejects_out_of_range_with_component() {
        let err = WeatherSeverity::new(3.0, 10.5, 0.0).unwrap_err();
        assert!(err.to_string().contains("fog"), "{err}");
        assert!(WeatherSeverity::new(-0.1, 0.0, 0.0).is_err());
        let from_toml: std::result::Result<WeatherSeverity, _> =
            toml::from_str("rain = 1.0\nfog = 2.0\nsea = 11.0\n");
        assert!(from_toml.unwrap_err().to_string().contains("sea"));
    }

    #[test]
    fn piecewise_map_rejects_decreasing() {
        assert!(PiecewiseLinear::new("x", vec![(0.0, 2.0), (10.0, 1.0)]).is_err());
        assert!(PiecewiseLinear::new("x", vec![(0.0, 0.0), (5.0, 1.0)]).is_err());
        let p = PiecewiseLinear::new("x", vec![(0.0, 0.0), (2.0, 10.0), (10.0, 20.0)]).unwrap();
        assert_relative_eq!(p.eval(1.0), 5.0);
        assert_relative_eq!(p.eval(6.0), 15.0);
        assert_relative_eq!(p.eval(10.0), 20.0);
    }

    #[test]
    fn rain_zero_and_monotone() {
        assert_eq!(rain_specific_attenuation(0.0, 9.4e9, Polarization::Horizontal).unwrap(), 0.0);
        let g50 = rain_specific_attenuation(50.0, 9.4e9, Polarization::Horizontal).unwrap();
        let g100 = rain_specific_attenuation(100.0, 9.4e9, Polarization::Horizontal).unwrap();
        assert!(g100 > g50);
    }

    #[test]
    fn rain_table_nodes_are_exact() {
        let (k, a) = rain_coefficients(10e9, Polarization::Horizontal).unwrap();
        assert_eq!((k, a), (0.01217, 1.2571));
        let (k, a) = rain_coefficients(1e9, Polarization::Vertical).unwrap();
        assert_eq!((k, a), (3.08e-5, 0.8592));
        let (k, a) = rain_coefficients(100e9, Polarization::Vertical).unwrap();
        assert_eq!((k, a), (1.368, 0.6765));
    }

    #[test]
    fn frequency_out_of_table_is_rejected() {
        assert!(matches!(
            rain_specific_attenuation(10.0, 0.5e9, Polarization::Horizontal),
            Err(WeatherError::FrequencyOutOfRange { .. })
        ));
        assert!(fog_specific_attenuation(0.1, 120e9, 293.15).is_err());
    }

    #[test]
    fn fog_is_linear_and_positive() {
        assert_eq!(fog_specific_attenuation(0.0, 9.4e9, 293.15).unwrap(), 0.0);
        for f in [1e9, 9.4e9, 35e9, 100e9] {
            assert!(liquid_water_coefficient(f, 293.15).unwrap() > 0.0);
        }
        let one = fog_specific_attenuation(0.2, 35e9, 283.15).unwrap();
        let two = fog_specific_attenuation(0.4, 35e9, 283.15).unwrap();
        assert_relative_eq!(two, 2.0 * one, max_relative = 1e-14);
    }

    #[test]
    fn path_attenuation_examples() {
        let r = path_attenuation(1.0, 0.5, 1000.0, PathMode::RoundTrip).unwrap();
        assert_relative_eq!(r.path_loss, 3.0, max_relative = 1e-15);
        assert_relative_eq!(r.linear_loss, 1.995_262_314_968_879_5, max_relative = 1e-15);
        let none = path_attenuation(0.0, 0.0, 5000.0, PathMode::RoundTrip).unwrap();
        assert_eq!((none.path_loss, none.linear_loss), (0.0, 1.0));
        let one_way = path_attenuation(1.0, 0.5, 1000.0, PathMode::OneWay).unwrap();
        assert_relative_eq!(one_way.path_loss, 1.5);
        assert!(path_attenuation(-1.0, 0.0, 1.0, PathMode::RoundTrip).is_err());
    }

    #[test]
    fn snr_rejects_nonpositive_range() {
        let cfg = RadarConfig::nominal();
        assert!(compute_snr(&cfg, 0.0, 1000.0, &AttenuationResult::NONE).is_err());
        assert!(compute_snr(&cfg, 10.0, 0.0, &AttenuationResult::NONE).is_err());
    }

    #[test]
    fn noise_rejects_bad_receiver() {
        let cfg = RadarConfig { bandwidth: 0.0, ..RadarConfig::nominal() };
        assert!(measurement_noise_stds(10.0, &cfg).is_err());
        let cfg = RadarConfig { dwell_time: -1.0, ..RadarConfig::nominal() };
        assert!(measurement_noise_stds(10.0, &cfg).is_err());
    }

    #[test]
    fn radar_presets_validate() {
        for cfg in [RadarConfig::nominal(), RadarConfig::high_power(), RadarConfig::low_power()] {
            cfg.validate().unwrap();
        }
        assert!(RadarConfig { max_range: 0.0, ..RadarConfig::nominal() }.validate().is_err());
    }
}
