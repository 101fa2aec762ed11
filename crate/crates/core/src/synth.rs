//! Seeded generators for the synthetic experiment families.
//!
//! Every trial draws from its own [`RngStream`], so trials can run in any
//! order or in parallel and still reproduce bit for bit.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::{Rng, RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;

use crate::error::{Error, Result};
use crate::seqcore::{
    binarize_equiwidth, binarize_nonzero, Direction, RealSeries, SequencePair, SymbolSequence,
};

/// Reproducible random stream identified by `(seed, stream_index)`.
///
/// Backed by xoshiro256** seeded through SplitMix64 from
/// `seed ^ mix(stream_index)`, where `mix` is the SplitMix64 finaliser.
/// Normal variates use the Box–Muller transform.
#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    stream_index: u64,
    rng: Xoshiro256StarStar,
    spare_normal: Option<f64>,
}

fn splitmix_finalize(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl RngStream {
    pub fn new(seed: u64, stream_index: u64) -> Self {
        let rng = Xoshiro256StarStar::seed_from_u64(seed ^ splitmix_finalize(stream_index));
        Self {
            seed,
            stream_index,
            rng,
            spare_normal: None,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_index(&self) -> u64 {
        self.stream_index
    }

    /// Uniform in `[0, 1)` with 53 bits of precision.
    pub fn uniform(&mut self) -> f64 {
        self.rng.gen::<f64>()
    }

    /// Uniform in the open interval `(0, 1)`.
    pub fn uniform_open(&mut self) -> f64 {
        loop {
            let u = self.uniform();
            if u > 0.0 {
                return u;
            }
        }
    }

    pub fn bit(&mut self) -> u8 {
        (self.rng.next_u64() >> 63) as u8
    }

    /// Standard normal via Box–Muller; the second variate of each pair is
    /// cached for the next call.
    pub fn standard_normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        let u1 = self.uniform_open();
        let u2 = self.uniform();
        let radius = (-2.0 * u1.ln()).sqrt();
        let angle = std::f64::consts::TAU * u2;
        self.spare_normal = Some(radius * angle.sin());
        radius * angle.cos()
    }

    /// `k` distinct indices from `0..n`.
    pub fn sample_indices(&mut self, n: usize, k: usize) -> Vec<usize> {
        index::sample(&mut self.rng, n, k).into_vec()
    }
}

// ---------------------------------------------------------------------------
// Families

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    Delay,
    Ar1,
    Tent,
    Sparse,
}

impl Family {
    pub fn as_str(self) -> &'static str {
        match self {
            Family::Delay => "delay",
            Family::Ar1 => "ar1",
            Family::Tent => "tent",
            Family::Sparse => "sparse",
        }
    }

    /// Name of the swept parameter.
    pub fn parameter_name(self) -> &'static str {
        match self {
            Family::Delay => "delay",
            Family::Ar1 => "phi",
            Family::Tent => "eta",
            Family::Sparse => "k",
        }
    }

    /// The sweep grid used for the published curves.
    pub fn default_values(self) -> Vec<f64> {
        match self {
            Family::Delay => (0..=6).map(f64::from).collect(),
            Family::Ar1 => (0..=19).map(|i| f64::from(i) * 0.05).collect(),
            Family::Tent => (0..=9).map(|i| f64::from(i) * 0.1).collect(),
            Family::Sparse => (1..=10).map(|i| f64::from(i) * 5.0).collect(),
        }
    }

    /// Trial count per parameter value at publication scale.
    pub fn full_trials(self) -> usize {
        match self {
            Family::Delay => 1000,
            Family::Ar1 | Family::Tent => 2000,
            Family::Sparse => 100,
        }
    }

    pub fn default_length(self) -> usize {
        match self {
            Family::Delay => 100,
            Family::Ar1 | Family::Tent => 1500,
            Family::Sparse => SPARSE_LENGTH,
        }
    }

    pub fn default_drop(self) -> usize {
        match self {
            Family::Ar1 | Family::Tent => 500,
            Family::Delay | Family::Sparse => 0,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "delay" => Ok(Family::Delay),
            "ar1" => Ok(Family::Ar1),
            "tent" => Ok(Family::Tent),
            "sparse" => Ok(Family::Sparse),
            other => Err(Error::Input(format!("unknown family '{other}'"))),
        }
    }
}

/// One sweep over a family. `values` are the swept parameter values
/// (delay k, phi, eta or sparsity k).
#[derive(Clone, Debug, PartialEq)]
pub struct TrialSpec {
    pub family: Family,
    pub values: Vec<f64>,
    pub length: usize,
    pub drop_transients: usize,
    pub trials: usize,
    pub seed: u64,
}

impl TrialSpec {
    pub fn new(family: Family, trials: usize, seed: u64) -> Self {
        Self {
            family,
            values: family.default_values(),
            length: family.default_length(),
            drop_transients: family.default_drop(),
            trials,
            seed,
        }
    }

    pub fn with_values(mut self, values: Vec<f64>) -> Self {
        self.values = values;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Input("trials must be at least 1".into()));
        }
        if self.length <= self.drop_transients {
            return Err(Error::Input(format!(
                "length {} must exceed dropped transients {}",
                self.length, self.drop_transients
            )));
        }
        if self.values.is_empty() {
            return Err(Error::Input("no parameter values to sweep".into()));
        }
        for &v in &self.values {
            let ok = match self.family {
                Family::Delay => v.fract() == 0.0 && (0.0..=6.0).contains(&v) && self.length >= 8,
                Family::Ar1 => (0.0..1.0).contains(&v),
                Family::Tent => (0.0..=0.9 + 1e-9).contains(&v),
                Family::Sparse => v.fract() == 0.0 && (1.0..=50.0).contains(&v),
            };
            if !ok {
                return Err(Error::Input(format!(
                    "{} = {v} out of range for family {}",
                    self.family.parameter_name(),
                    self.family
                )));
            }
        }
        Ok(())
    }

    /// Generates trial `trial` at parameter `value`.
    pub fn generate(&self, value: f64, trial: u64) -> Result<SequencePair> {
        let mut rng = RngStream::new(self.seed, trial);
        match self.family {
            Family::Delay => gen_delayed_bitflip(self.length, value as usize, &mut rng),
            Family::Ar1 => gen_ar1(
                value,
                self.length,
                self.drop_transients,
                AR1_NOISE,
                &mut rng,
            ),
            Family::Tent => gen_skew_tent(value, self.length, self.drop_transients, &mut rng),
            Family::Sparse => gen_sparse(value as usize, &mut rng),
        }
    }

    /// Flat `key=value` block, one entry per line.
    pub fn to_config(&self) -> String {
        let values = self
            .values
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(",");
        format!(
            "family={}\nvalues={}\nlength={}\ndrop_transients={}\ntrials={}\nseed={}\n",
            self.family, values, self.length, self.drop_transients, self.trials, self.seed
        )
    }

    /// Parses [`TrialSpec::to_config`] output. Missing keys fall back to the
    /// family defaults; `family` is required.
    pub fn from_config(text: &str) -> Result<Self> {
        let mut kv = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::Input(format!("config line {}: expected key=value", i + 1))
            })?;
            kv.insert(k.trim().to_string(), v.trim().to_string());
        }
        let family: Family = kv
            .remove("family")
            .ok_or_else(|| Error::Input("config is missing 'family'".into()))?
            .parse()?;
        let num = |kv: &BTreeMap<String, String>, key: &str| -> Result<Option<u64>> {
            kv.get(key)
                .map(|v| {
                    v.parse::<u64>()
                        .map_err(|_| Error::Input(format!("config key '{key}': bad integer '{v}'")))
                })
                .transpose()
        };
        let mut spec = TrialSpec::new(family, 200, 0);
        if let Some(v) = num(&kv, "length")? {
            spec.length = v as usize;
        }
        if let Some(v) = num(&kv, "drop_transients")? {
            spec.drop_transients = v as usize;
        }
        if let Some(v) = num(&kv, "trials")? {
            spec.trials = v as usize;
        }
        if let Some(v) = num(&kv, "seed")? {
            spec.seed = v;
        }
        if let Some(v) = kv.get("values") {
            spec.values = parse_values(v)?;
        }
        for key in kv.keys() {
            if !["length", "drop_transients", "trials", "seed", "values"].contains(&key.as_str()) {
                return Err(Error::Input(format!("unknown config key '{key}'")));
            }
        }
        spec.validate()?;
        Ok(spec)
    }
}

/// Comma-separated list of numbers.
pub fn parse_values(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::Input(format!("bad parameter value '{t}'")))
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Generators

pub const DELAY_PATTERN: [u8; 4] = [1, 1, 0, 1];

/// X is i.i.d. fair bits; `y_i = 1` iff `1101` ends at `i - delay` in X.
pub fn gen_delayed_bitflip(
    length: usize,
    delay: usize,
    rng: &mut RngStream,
) -> Result<SequencePair> {
    if length < 8 || delay > 6 {
        return Err(Error::Input(format!(
            "delayed bit-flip needs length >= 8 and delay <= 6, got {length} and {delay}"
        )));
    }
    let x: Vec<u8> = (0..length).map(|_| rng.bit()).collect();
    let y = delayed_indicator(&x, delay);
    SequencePair::new(
        SymbolSequence::binary(x)?,
        SymbolSequence::binary(y)?,
        Some(Direction::XCausesY),
    )
}

fn delayed_indicator(x: &[u8], delay: usize) -> Vec<u8> {
    (0..x.len())
        .map(|i| {
            let hit = i >= delay + 3 && x[i - delay - 3..=i - delay] == DELAY_PATTERN;
            u8::from(hit)
        })
        .collect()
}

pub const AR1_COEFFICIENT: f64 = 0.8;
pub const AR1_NOISE: f64 = 0.01;

/// Coupled AR(1): `Y_t = 0.8 Y_{t-1} + e_y`, `X_t = 0.8 X_{t-1} + phi Y_{t-1} + e_x`
/// with `e = noise * N(0, 1)` and zero initial state. The first `drop`
/// samples are removed before equal-width binarisation. Y drives X.
pub fn gen_ar1(
    phi: f64,
    length: usize,
    drop: usize,
    noise: f64,
    rng: &mut RngStream,
) -> Result<SequencePair> {
    let (xs, ys) = simulate_ar1(phi, length, noise, rng)?;
    if drop >= length {
        return Err(Error::Input(format!(
            "drop {drop} must be below length {length}"
        )));
    }
    let x = binarize_equiwidth(&RealSeries::new(xs[drop..].to_vec())?)?;
    let y = binarize_equiwidth(&RealSeries::new(ys[drop..].to_vec())?)?;
    let truth = if phi == 0.0 {
        Direction::Independent
    } else {
        Direction::YCausesX
    };
    SequencePair::new(x.sequence, y.sequence, Some(truth))
}

/// Raw AR(1) orbits `(X, Y)` of the given length, including the zero
/// initial sample.
pub fn simulate_ar1(
    phi: f64,
    length: usize,
    noise: f64,
    rng: &mut RngStream,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if !(0.0..1.0).contains(&phi) {
        return Err(Error::Input(format!("phi = {phi} outside [0, 1)")));
    }
    let mut xs = vec![0.0; length];
    let mut ys = vec![0.0; length];
    for t in 1..length {
        let ex = noise * rng.standard_normal();
        let ey = noise * rng.standard_normal();
        ys[t] = AR1_COEFFICIENT * ys[t - 1] + ey;
        xs[t] = AR1_COEFFICIENT * xs[t - 1] + phi * ys[t - 1] + ex;
    }
    Ok((xs, ys))
}

pub const TENT_DRIVER_SKEW: f64 = 0.35;
pub const TENT_RESPONSE_SKEW: f64 = 0.76;

/// Skew-tent map with breakpoint `b`.
pub fn skew_tent(x: f64, b: f64) -> f64 {
    if x < b {
        x / b
    } else {
        (1.0 - x) / (1.0 - b)
    }
}

/// Raw driver / response orbits, initial states uniform in `(0, 1)`.
pub fn simulate_skew_tent(eta: f64, length: usize, rng: &mut RngStream) -> (Vec<f64>, Vec<f64>) {
    let mut d = Vec::with_capacity(length);
    let mut r = Vec::with_capacity(length);
    d.push(rng.uniform_open());
    r.push(rng.uniform_open());
    for t in 1..length {
        let dt = skew_tent(d[t - 1], TENT_DRIVER_SKEW);
        let rt = (1.0 - eta) * skew_tent(r[t - 1], TENT_RESPONSE_SKEW) + eta * dt;
        d.push(dt);
        r.push(rt);
    }
    (d, r)
}

/// Driver D = x, response R = y with `R_t = (1 - eta) T(R_{t-1}, 0.76) + eta D_t`.
pub fn gen_skew_tent(
    eta: f64,
    length: usize,
    drop: usize,
    rng: &mut RngStream,
) -> Result<SequencePair> {
    if !(0.0..=0.9 + 1e-9).contains(&eta) {
        return Err(Error::Input(format!("eta = {eta} outside [0, 0.9]")));
    }
    if drop >= length {
        return Err(Error::Input(format!(
            "drop {drop} must be below length {length}"
        )));
    }
    let (d, r) = simulate_skew_tent(eta, length, rng);
    let x = binarize_equiwidth(&RealSeries::new(d[drop..].to_vec())?)?;
    let y = binarize_equiwidth(&RealSeries::new(r[drop..].to_vec())?)?;
    let truth = if eta == 0.0 {
        Direction::Independent
    } else {
        Direction::XCausesY
    };
    SequencePair::new(x.sequence, y.sequence, Some(truth))
}

pub const SPARSE_LENGTH: usize = 2000;
pub const SPARSE_ALPHA: f64 = 0.8;
pub const SPARSE_BETA: f64 = 0.08;
pub const SPARSE_GAMMA: f64 = 0.75;
/// Standard deviation of the sparse-process innovations.
pub const SPARSE_NOISE_SD: f64 = 0.1;

/// Raw sparse observations `(z1, z2)`: `z1` equals the latent `Z1` on `k`
/// random instants `T1` and is zero elsewhere, `z2` equals `Z2` on the
/// successors of `T1`.
pub fn simulate_sparse(k: usize, rng: &mut RngStream) -> Result<(Vec<f64>, Vec<f64>)> {
    if !(1..=50).contains(&k) {
        return Err(Error::Input(format!("sparsity k = {k} outside 1..=50")));
    }
    let n = SPARSE_LENGTH;
    let mut in_t1 = vec![false; n];
    for i in rng.sample_indices(n, k) {
        in_t1[i] = true;
    }
    let mut in_t2 = vec![false; n];
    for t in 0..n - 1 {
        if in_t1[t] {
            in_t2[t + 1] = true;
        }
    }
    let (mut z1_latent, mut z2_latent) = (0.0, 0.0);
    let mut z1 = vec![0.0; n];
    let mut z2 = vec![0.0; n];
    let mut z1_prev_obs = 0.0;
    for t in 0..n {
        let e1 = SPARSE_NOISE_SD * rng.standard_normal();
        let e2 = SPARSE_NOISE_SD * rng.standard_normal();
        z1_latent = SPARSE_ALPHA * z1_latent + e1;
        z2_latent = SPARSE_BETA * z2_latent + SPARSE_GAMMA * z1_prev_obs + e2;
        if in_t1[t] {
            z1[t] = z1_latent;
        }
        if in_t2[t] {
            z2[t] = z2_latent;
        }
        z1_prev_obs = z1[t];
    }
    Ok((z1, z2))
}

/// Sparse driver z1 = x and follower z2 = y, binarised by nonzero indicator.
pub fn gen_sparse(k: usize, rng: &mut RngStream) -> Result<SequencePair> {
    let (z1, z2) = simulate_sparse(k, rng)?;
    let x = binarize_nonzero(&RealSeries::new(z1)?)?;
    let y = binarize_nonzero(&RealSeries::new(z2)?)?;
    SequencePair::new(x, y, Some(Direction::XCausesY))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let draw = |seed, stream| {
            let mut r = RngStream::new(seed, stream);
            (0..8).map(|_| r.uniform()).collect::<Vec<_>>()
        };
        assert_eq!(draw(42, 3), draw(42, 3));
        assert_ne!(draw(42, 3), draw(42, 4));
        assert_ne!(draw(42, 3), draw(43, 3));
    }

    #[test]
    fn box_muller_moments() {
        let mut r = RngStream::new(7, 0);
        let v: Vec<f64> = (0..200_000).map(|_| r.standard_normal()).collect();
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        let var = v.iter().map(|z| (z - mean).powi(2)).sum::<f64>() / v.len() as f64;
        assert!(mean.abs() < 0.01, "mean {mean}");
        assert!((var - 1.0).abs() < 0.01, "var {var}");
    }

    #[test]
    fn delayed_indicator_alignment() {
        // 1101 ends at index 5
        let x = [0, 0, 1, 1, 0, 1, 0, 0, 0, 0, 0];
        let y = delayed_indicator(&x, 2);
        assert_eq!(y, vec![0, 0, 0, 0, 0, 0, 0, 1, 0, 0, 0]);
        let y = delayed_indicator(&x, 0);
        assert_eq!(y, vec![0, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0]);
        assert!(delayed_indicator(&[0; 20], 3).iter().all(|&b| b == 0));
        // overlapping occurrences: 1101101
        let y = delayed_indicator(&[1, 1, 0, 1, 1, 0, 1], 0);
        assert_eq!(y, vec![0, 0, 0, 1, 0, 0, 1]);
    }

    #[test]
    fn delayed_generator_contract() {
        let mut r = RngStream::new(1, 0);
        let p = gen_delayed_bitflip(100, 2, &mut r).unwrap();
        assert_eq!(p.len(), 100);
        assert_eq!(p.ground_truth, Some(Direction::XCausesY));
        assert_eq!(
            p.y.symbols(),
            delayed_indicator(p.x.symbols(), 2).as_slice()
        );
        assert!(gen_delayed_bitflip(7, 0, &mut r).is_err());
        assert!(gen_delayed_bitflip(100, 7, &mut r).is_err());
    }

    #[test]
    fn ar1_shapes_and_truth() {
        let p = gen_ar1(0.4, 1500, 500, AR1_NOISE, &mut RngStream::new(1, 0)).unwrap();
        assert_eq!((p.x.len(), p.y.len()), (1000, 1000));
        assert_eq!(p.ground_truth, Some(Direction::YCausesX));
        let q = gen_ar1(0.4, 1500, 500, AR1_NOISE, &mut RngStream::new(1, 0)).unwrap();
        assert_eq!(p, q);
        let p = gen_ar1(0.0, 1500, 500, AR1_NOISE, &mut RngStream::new(1, 0)).unwrap();
        assert_eq!(p.ground_truth, Some(Direction::Independent));
        assert!(gen_ar1(1.0, 1500, 500, AR1_NOISE, &mut RngStream::new(1, 0)).is_err());
    }

    #[test]
    fn tent_map_values() {
        assert_abs_diff_eq!(
            skew_tent(0.2, 0.35),
            0.571_428_571_428_571_4,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            skew_tent(0.5, 0.35),
            0.769_230_769_230_769_2,
            epsilon = 1e-12
        );
    }

    #[test]
    fn tent_orbits_stay_in_unit_interval() {
        for (trial, eta) in [0.0, 0.3, 0.6, 0.9].into_iter().enumerate() {
            let (d, r) = simulate_skew_tent(eta, 1500, &mut RngStream::new(5, trial as u64));
            assert!(d.iter().chain(&r).all(|v| (0.0..=1.0).contains(v)));
        }
        let p = gen_skew_tent(0.0, 1500, 500, &mut RngStream::new(5, 0)).unwrap();
        assert_eq!(p.ground_truth, Some(Direction::Independent));
        assert_eq!(p.len(), 1000);
    }

    #[test]
    fn sparse_contract() {
        for k in [1, 5, 25, 50] {
            let (z1, z2) = simulate_sparse(k, &mut RngStream::new(9, k as u64)).unwrap();
            assert_eq!(z1.len(), SPARSE_LENGTH);
            assert_eq!(z1.iter().filter(|v| **v != 0.0).count(), k);
            assert!(z2.iter().filter(|v| **v != 0.0).count() <= k);
            for t in 1..SPARSE_LENGTH {
                if z2[t] != 0.0 {
                    assert!(z1[t - 1] != 0.0);
                }
            }
        }
        assert!(gen_sparse(0, &mut RngStream::new(0, 0)).is_err());
        assert!(gen_sparse(51, &mut RngStream::new(0, 0)).is_err());
    }

    #[test]
    fn config_round_trip() {
        let spec = TrialSpec::new(Family::Tent, 17, 99).with_values(vec![0.3, 0.6]);
        let back = TrialSpec::from_config(&spec.to_config()).unwrap();
        assert_eq!(spec, back);
        assert!(TrialSpec::from_config("length=10\n").is_err());
        assert!(TrialSpec::from_config("family=ar1\nbogus=1\n").is_err());
        assert!(TrialSpec::from_config("family=ar1\nlength=100\ndrop_transients=100\n").is_err());
    }
}
