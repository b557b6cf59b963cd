//! System parameters and Saleh-Valenzuela channel generation with
//! uniform-planar-array responses.

use nalgebra::DVector;
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{phasor, real, CMat, CVec, Real};
use crate::tensor::ComplexTensor;

/// Scalar parameters of the multiuser MIMO-OFDM downlink.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    /// Base-station antennas.
    pub n_tx: usize,
    /// Antennas per user.
    pub n_rx: usize,
    /// Transmit RF chains.
    pub n_rf_tx: usize,
    /// Receive RF chains per user.
    pub n_rf_rx: usize,
    pub n_users: usize,
    /// Streams per user per subcarrier.
    pub n_streams: usize,
    pub n_subcarriers: usize,
    /// Linear transmit power.
    pub tx_power: f64,
    /// Linear noise power.
    pub noise_power: f64,
    pub snr_db: f64,
}

impl SystemConfig {
    /// Builds a configuration with unit transmit power and the noise power
    /// implied by the nominal SNR `P / (K Ns F sigma^2)`.
    pub fn new(
        n_tx: usize,
        n_rx: usize,
        n_rf_tx: usize,
        n_rf_rx: usize,
        n_users: usize,
        n_streams: usize,
        n_subcarriers: usize,
    ) -> Self {
        SystemConfig {
            n_tx,
            n_rx,
            n_rf_tx,
            n_rf_rx,
            n_users,
            n_streams,
            n_subcarriers,
            tx_power: 1.0,
            noise_power: 1.0,
            snr_db: 0.0,
        }
        .with_snr_db(0.0)
    }

    pub fn with_snr_db(mut self, snr_db: f64) -> Self {
        self.snr_db = snr_db;
        self.tx_power = 1.0;
        self.noise_power = self.tx_power / (self.streams_total() as f64 * db_to_linear(snr_db));
        self
    }

    /// `K * Ns * F`, the column count of the concatenated digital target.
    pub fn streams_total(&self) -> usize {
        self.n_users * self.n_streams * self.n_subcarriers
    }

    /// Streams per subcarrier, `K * Ns`.
    pub fn streams_per_subcarrier(&self) -> usize {
        self.n_users * self.n_streams
    }

    /// Nominal per-stream SNR `P / (K Ns F sigma^2)` (linear).
    pub fn snr_linear(&self) -> f64 {
        self.tx_power / (self.streams_total() as f64 * self.noise_power)
    }

    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("n_tx", self.n_tx),
            ("n_rx", self.n_rx),
            ("n_rf_tx", self.n_rf_tx),
            ("n_rf_rx", self.n_rf_rx),
            ("n_users", self.n_users),
            ("n_streams", self.n_streams),
            ("n_subcarriers", self.n_subcarriers),
        ];
        for (name, v) in counts {
            if v == 0 {
                return Err(Error::config(format!("system.{name}"), "must be a positive integer"));
            }
        }
        let kns = self.streams_per_subcarrier();
        if !(kns <= self.n_rf_tx && self.n_rf_tx < self.n_tx) {
            return Err(Error::config(
                "system.n_rf_tx",
                format!("need K*Ns ({kns}) <= n_rf_tx ({}) < n_tx ({})", self.n_rf_tx, self.n_tx),
            ));
        }
        if !(self.n_streams <= self.n_rf_rx && self.n_rf_rx < self.n_rx) {
            return Err(Error::config(
                "system.n_rf_rx",
                format!("need Ns ({}) <= n_rf_rx ({}) < n_rx ({})", self.n_streams, self.n_rf_rx, self.n_rx),
            ));
        }
        if !(self.tx_power > 0.0 && self.noise_power > 0.0) {
            return Err(Error::config("system.tx_power", "powers must be positive"));
        }
        let implied = linear_to_db(self.snr_linear());
        if (implied - self.snr_db).abs() > 1e-9 * self.snr_db.abs().max(1.0) {
            return Err(Error::config(
                "system.snr_db",
                format!("snr_db {} inconsistent with P/(K Ns F sigma^2) = {implied} dB", self.snr_db),
            ));
        }
        Ok(())
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Saleh-Valenzuela model parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    pub n_clusters: usize,
    pub n_rays: usize,
    /// Per-cluster angular spread (standard deviation, degrees) in azimuth and elevation.
    pub angle_spread_deg: f64,
    /// Transmit UPA `(rows, cols)`.
    pub tx_array: (usize, usize),
    /// Receive UPA `(rows, cols)`.
    pub rx_array: (usize, usize),
    pub seed: u64,
}

impl ChannelParams {
    /// Default model (5 clusters, 10 rays, 10 degree spread) with near-square arrays.
    pub fn for_config(cfg: &SystemConfig, seed: u64) -> Self {
        ChannelParams {
            n_clusters: 5,
            n_rays: 10,
            angle_spread_deg: 10.0,
            tx_array: near_square(cfg.n_tx),
            rx_array: near_square(cfg.n_rx),
            seed,
        }
    }

    pub fn validate(&self, cfg: &SystemConfig) -> Result<()> {
        if self.n_clusters == 0 {
            return Err(Error::config("channel.n_clusters", "must be >= 1"));
        }
        if self.n_rays == 0 {
            return Err(Error::config("channel.n_rays", "must be >= 1"));
        }
        if !(self.angle_spread_deg >= 0.0 && self.angle_spread_deg.is_finite()) {
            return Err(Error::config("channel.angle_spread_deg", "must be finite and non-negative"));
        }
        if self.tx_array.0 * self.tx_array.1 != cfg.n_tx {
            return Err(Error::config("channel.tx_array", format!("{:?} does not multiply to n_tx = {}", self.tx_array, cfg.n_tx)));
        }
        if self.rx_array.0 * self.rx_array.1 != cfg.n_rx {
            return Err(Error::config("channel.rx_array", format!("{:?} does not multiply to n_rx = {}", self.rx_array, cfg.n_rx)));
        }
        Ok(())
    }
}

/// Factorization `rows * cols = n` with `rows` the largest divisor not above `sqrt(n)`.
pub fn near_square(n: usize) -> (usize, usize) {
    let mut rows = 1;
    let mut d = 1;
    while d * d <= n {
        if n % d == 0 {
            rows = d;
        }
        d += 1;
    }
    (rows, n / rows)
}

/// One propagation path, kept so a realization can be audited or replayed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RayRecord {
    pub cluster: usize,
    pub gain: Complex<f64>,
    pub aoa_azimuth: f64,
    pub aoa_elevation: f64,
    pub aod_azimuth: f64,
    pub aod_elevation: f64,
}

/// Frequency-domain channels `H[k, f]` (`n_rx x n_tx`) for every user and subcarrier.
#[derive(Debug, Clone)]
pub struct ChannelRealization<T: Real> {
    n_users: usize,
    n_subcarriers: usize,
    h: Vec<CMat<T>>,
    pub params: Option<ChannelParams>,
    /// Per-user ray records; empty for replayed realizations.
    pub rays: Vec<Vec<RayRecord>>,
}

impl<T: Real> ChannelRealization<T> {
    /// Wraps explicit channel matrices, indexed `[k][f]`.
    pub fn from_matrices(h: Vec<Vec<CMat<T>>>) -> Result<Self> {
        let n_users = h.len();
        let n_subcarriers = h.first().map_or(0, Vec::len);
        if n_users == 0 || n_subcarriers == 0 {
            return Err(Error::DimensionMismatch("empty channel".into()));
        }
        let shape = h[0][0].shape();
        for row in &h {
            if row.len() != n_subcarriers || row.iter().any(|m| m.shape() != shape) {
                return Err(Error::DimensionMismatch("ragged channel tensor".into()));
            }
        }
        Ok(Self {
            n_users,
            n_subcarriers,
            h: h.into_iter().flatten().collect(),
            params: None,
            rays: Vec::new(),
        })
    }

    pub fn get(&self, user: usize, subcarrier: usize) -> &CMat<T> {
        &self.h[user * self.n_subcarriers + subcarrier]
    }

    /// `(K, F, n_rx, n_tx)`.
    pub fn dims(&self) -> (usize, usize, usize, usize) {
        let (r, t) = self.h[0].shape();
        (self.n_users, self.n_subcarriers, r, t)
    }

    pub fn check_against(&self, cfg: &SystemConfig) -> Result<()> {
        let want = (cfg.n_users, cfg.n_subcarriers, cfg.n_rx, cfg.n_tx);
        if self.dims() != want {
            return Err(Error::DimensionMismatch(format!(
                "channel dims {:?} do not match config {want:?}",
                self.dims()
            )));
        }
        Ok(())
    }

    pub fn to_tensor(&self) -> ComplexTensor {
        let (k, f, r, t) = self.dims();
        let mut data = Vec::with_capacity(k * f * r * t);
        for m in &self.h {
            data.extend(ComplexTensor::from_matrix(m).data);
        }
        ComplexTensor { dims: vec![k, f, r, t], data }
    }

    pub fn from_tensor(t: &ComplexTensor) -> Result<Self> {
        let &[k, f, r, c] = t.dims.as_slice() else {
            return Err(Error::Format(format!("channel tensor must be rank 4, found {:?}", t.dims)));
        };
        let block = r * c;
        let h = (0..k)
            .map(|ki| {
                (0..f)
                    .map(|fi| {
                        let start = (ki * f + fi) * block;
                        ComplexTensor { dims: vec![r, c], data: t.data[start..start + block].to_vec() }
                            .to_matrix()
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_matrices(h)
    }
}

/// UPA response with half-wavelength spacing: element `(m, n)` (row-major)
/// has phase `pi * (m sin(az) sin(el) + n cos(el))`, normalized by `1/sqrt(N)`.
pub fn array_response<T: Real>(azimuth: T, elevation: T, dims: (usize, usize)) -> CVec<T> {
    let (rows, cols) = dims;
    assert!(rows > 0 && cols > 0, "array dimensions must be positive");
    let n = rows * cols;
    let norm = T::one() / T::from_usize(n).unwrap().sqrt();
    let u = azimuth.sin() * elevation.sin();
    let v = elevation.cos();
    DVector::from_fn(n, |idx, _| {
        let m = T::from_usize(idx / cols).unwrap();
        let c = T::from_usize(idx % cols).unwrap();
        phasor(T::pi() * (m * u + c * v)) * norm
    })
}

fn laplace(rng: &mut ChaCha8Rng, std_dev: f64) -> f64 {
    let b = std_dev / std::f64::consts::SQRT_2;
    let u: f64 = rng.random::<f64>() - 0.5;
    -b * u.signum() * (1.0 - 2.0 * u.abs()).ln()
}

/// Draws one Saleh-Valenzuela realization; a pure function of `(cfg, params)`.
///
/// `H[k, f] = gamma * sum_i sum_l g_il a_r a_t^H exp(-j 2 pi i f / F)` with
/// `gamma = sqrt(Nt Nr / (Ncl Nray))` and `g_il ~ CN(0, 1)`. Subcarriers are
/// indexed from zero.
pub fn generate_channel<T: Real>(cfg: &SystemConfig, params: &ChannelParams) -> Result<ChannelRealization<T>> {
    cfg.validate()?;
    params.validate(cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let spread = params.angle_spread_deg.to_radians();
    let two_pi = std::f64::consts::TAU;
    let half_pi = std::f64::consts::FRAC_PI_2;
    let gamma = ((cfg.n_tx * cfg.n_rx) as f64 / (params.n_clusters * params.n_rays) as f64).sqrt();

    let mut h = Vec::with_capacity(cfg.n_users);
    let mut rays = Vec::with_capacity(cfg.n_users);
    for _ in 0..cfg.n_users {
        let mut user_rays = Vec::with_capacity(params.n_clusters * params.n_rays);
        let mut clusters: Vec<CMat<T>> = Vec::with_capacity(params.n_clusters);
        for cluster in 0..params.n_clusters {
            let rx_az = rng.random::<f64>() * two_pi;
            let rx_el = rng.random::<f64>() * std::f64::consts::PI - half_pi;
            let tx_az = rng.random::<f64>() * two_pi;
            let tx_el = rng.random::<f64>() * std::f64::consts::PI - half_pi;
            let mut acc = CMat::<T>::zeros(cfg.n_rx, cfg.n_tx);
            for _ in 0..params.n_rays {
                let ray = RayRecord {
                    cluster,
                    aoa_azimuth: rx_az + laplace(&mut rng, spread),
                    aoa_elevation: rx_el + laplace(&mut rng, spread),
                    aod_azimuth: tx_az + laplace(&mut rng, spread),
                    aod_elevation: tx_el + laplace(&mut rng, spread),
                    gain: {
                        let re: f64 = rng.sample(StandardNormal);
                        let im: f64 = rng.sample(StandardNormal);
                        Complex::new(re, im) / std::f64::consts::SQRT_2
                    },
                };
                let a_r = array_response(T::lit(ray.aoa_azimuth), T::lit(ray.aoa_elevation), params.rx_array);
                let a_t = array_response(T::lit(ray.aod_azimuth), T::lit(ray.aod_elevation), params.tx_array);
                let g = Complex::new(T::lit(ray.gain.re), T::lit(ray.gain.im));
                acc += (a_r * a_t.adjoint()) * g;
                user_rays.push(ray);
            }
            clusters.push(acc * real(T::lit(gamma)));
        }
        let per_sub = (0..cfg.n_subcarriers)
            .map(|f| {
                let mut hf = CMat::<T>::zeros(cfg.n_rx, cfg.n_tx);
                for (i, c) in clusters.iter().enumerate() {
                    let angle = -two_pi * (i * f) as f64 / cfg.n_subcarriers as f64;
                    hf += c * phasor(T::lit(angle));
                }
                hf
            })
            .collect();
        h.push(per_sub);
        rays.push(user_rays);
    }
    let mut real = ChannelRealization::from_matrices(h)?;
    real.params = Some(params.clone());
    real.rays = rays;
    Ok(real)
}
