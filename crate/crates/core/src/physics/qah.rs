//! Two-band quantum anomalous Hall model on the square lattice.
//!
//! Fourier transforming the real-space Hamiltonian gives `H(k) = d(k)·σ`
//! in the (↑, ↓) basis with
//!
//! ```text
//! d_x = −2 J_y sin k_y
//! d_y = −2 J_x sin k_x
//! d_z = μ − 2t (cos k_x + cos k_y)
//! ```
//!
//! The lower band is topological (`|C| = 1`) for `0 < |μ| < 4t` and trivial
//! for `|μ| > 4t`. Chern numbers use gauge-invariant link variables on a
//! uniform `N×N` momentum grid `k_j = −π + 2πj/N`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::data::{Dataset, LabeledSample};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, SplitMix64};

/// Smallest admissible band half-gap `min_k |d(k)|`.
pub const GAP_THRESHOLD: f64 = 1e-6;
/// Largest allowed distance of the raw Chern sum from an integer.
pub const ROUNDING_TOLERANCE: f64 = 0.01;
/// Momentum grid side of a time-of-flight image.
pub const TOF_GRID: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QahParams {
    pub jx: f64,
    pub jy: f64,
    pub t: f64,
    pub mu: f64,
}

impl QahParams {
    pub fn new(jx: f64, jy: f64, t: f64, mu: f64) -> Self {
        Self { jx, jy, t, mu }
    }

    pub fn validate(&self) -> Result<()> {
        if ![self.jx, self.jy, self.t, self.mu].iter().all(|v| v.is_finite()) {
            return Err(Error::invalid("QAH parameters must be finite"));
        }
        if self.t <= 0.0 {
            return Err(Error::invalid(format!("hopping t must be positive, got {}", self.t)));
        }
        if self.jx == 0.0 || self.jy == 0.0 {
            return Err(Error::invalid("spin-orbit couplings J_x and J_y must be nonzero"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Band {
    Lower,
    Upper,
}

pub fn bloch_d_vector(p: &QahParams, kx: f64, ky: f64) -> [f64; 3] {
    [
        -2.0 * p.jy * ky.sin(),
        -2.0 * p.jx * kx.sin(),
        p.mu - 2.0 * p.t * (kx.cos() + ky.cos()),
    ]
}

/// `2×2` Bloch Hamiltonian `d·σ`, row-major.
pub fn bloch_hamiltonian(d: [f64; 3]) -> [[Complex64; 2]; 2] {
    let [dx, dy, dz] = d;
    [
        [Complex64::new(dz, 0.0), Complex64::new(dx, -dy)],
        [Complex64::new(dx, dy), Complex64::new(-dz, 0.0)],
    ]
}

/// Normalised eigenvector of `d·σ` for the requested band. Of the two
/// closed-form candidates the better-conditioned one is returned.
pub fn band_state(d: [f64; 3], band: Band) -> [Complex64; 2] {
    let [dx, dy, dz] = d;
    let r = (dx * dx + dy * dy + dz * dz).sqrt();
    let (a, b) = match band {
        Band::Lower => (
            [Complex64::new(dx, -dy), Complex64::new(-(dz + r), 0.0)],
            [Complex64::new(r - dz, 0.0), Complex64::new(-dx, -dy)],
        ),
        Band::Upper => (
            [Complex64::new(dx, -dy), Complex64::new(r - dz, 0.0)],
            [Complex64::new(dz + r, 0.0), Complex64::new(dx, dy)],
        ),
    };
    let norm = |v: &[Complex64; 2]| (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
    let v = if norm(&a) >= norm(&b) { a } else { b };
    let n = norm(&v);
    [v[0] / n, v[1] / n]
}

pub fn grid_momentum(j: usize, n: usize) -> f64 {
    -PI + 2.0 * PI * j as f64 / n as f64
}

/// `min_k |d(k)|` over the `n×n` grid.
pub fn min_gap(p: &QahParams, n: usize) -> f64 {
    let mut min = f64::INFINITY;
    for j in 0..n {
        for l in 0..n {
            let [dx, dy, dz] = bloch_d_vector(p, grid_momentum(j, n), grid_momentum(l, n));
            min = min.min((dx * dx + dy * dy + dz * dz).sqrt());
        }
    }
    min
}

/// Band eigenvectors on the grid, indexed `[j * n + l]` for `(k_x, k_y) = (k_j, k_l)`.
pub fn band_states(p: &QahParams, n: usize, band: Band) -> Result<Vec<[Complex64; 2]>> {
    p.validate()?;
    let gap = min_gap(p, n);
    if gap < GAP_THRESHOLD {
        return Err(Error::Gapless { min_gap: gap });
    }
    let mut states = Vec::with_capacity(n * n);
    for j in 0..n {
        for l in 0..n {
            states.push(band_state(bloch_d_vector(p, grid_momentum(j, n), grid_momentum(l, n)), band));
        }
    }
    Ok(states)
}

/// Raw link-variable sum `Σ F / 2π` for an arbitrary-gauge band on an
/// `n×n` periodic grid.
pub fn chern_sum(states: &[[Complex64; 2]], n: usize) -> f64 {
    assert_eq!(states.len(), n * n);
    let at = |j: usize, l: usize| &states[(j % n) * n + (l % n)];
    let link = |a: &[Complex64; 2], b: &[Complex64; 2]| {
        let z = a[0].conj() * b[0] + a[1].conj() * b[1];
        z / z.norm()
    };
    let mut total = 0.0;
    for j in 0..n {
        for l in 0..n {
            let ux = link(at(j, l), at(j + 1, l));
            let uy_next = link(at(j + 1, l), at(j + 1, l + 1));
            let ux_next = link(at(j, l + 1), at(j + 1, l + 1));
            let uy = link(at(j, l), at(j, l + 1));
            total += (ux * uy_next * ux_next.conj() * uy.conj()).arg();
        }
    }
    total / (2.0 * PI)
}

/// Round a raw Chern sum, failing if it is not close to an integer.
pub fn round_chern(value: f64) -> Result<i32> {
    let rounded = value.round();
    let residual = (value - rounded).abs();
    if !(residual < ROUNDING_TOLERANCE) {
        return Err(Error::NotConverged { value, residual });
    }
    Ok(rounded as i32)
}

pub fn chern_number_of_band(p: &QahParams, grid_n: usize, band: Band) -> Result<i32> {
    if grid_n < 16 {
        return Err(Error::invalid(format!("Chern grid must be at least 16, got {grid_n}")));
    }
    round_chern(chern_sum(&band_states(p, grid_n, band)?, grid_n))
}

/// First Chern number of the lower band.
pub fn chern_number(p: &QahParams, grid_n: usize) -> Result<i32> {
    chern_number_of_band(p, grid_n, Band::Lower)
}

/// Lower-band spin-↑ momentum density `|⟨↑|φ(k)⟩|²` on the 16×16 grid,
/// row-major with `k_x` as the row index.
pub fn tof_image(p: &QahParams) -> Result<Vec<f64>> {
    let states = band_states(p, TOF_GRID, Band::Lower)?;
    let image: Vec<f64> = states.iter().map(|s| s[0].norm_sqr().clamp(0.0, 1.0)).collect();
    if !image.iter().any(|&v| v > 0.0) {
        return Err(Error::invalid("time-of-flight image has no positive density"));
    }
    Ok(image)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TofSampling {
    pub n_train_per_class: usize,
    pub n_test_per_class: usize,
    pub jx_range: (f64, f64),
    pub jy_range: (f64, f64),
    pub t: f64,
    pub mu_topological: (f64, f64),
    pub mu_trivial: (f64, f64),
    /// Grid used to label each sample.
    pub label_grid: usize,
    /// Redraws allowed per sample before giving up.
    pub max_redraws: usize,
}

impl Default for TofSampling {
    fn default() -> Self {
        Self {
            n_train_per_class: 500,
            n_test_per_class: 100,
            jx_range: (0.5, 1.5),
            jy_range: (0.5, 1.5),
            t: 1.0,
            mu_topological: (0.5, 3.5),
            mu_trivial: (4.5, 7.5),
            label_grid: 32,
            max_redraws: 20,
        }
    }
}

impl TofSampling {
    pub fn with_sizes(n_train_per_class: usize, n_test_per_class: usize) -> Self {
        Self { n_train_per_class, n_test_per_class, ..Self::default() }
    }
}

#[derive(Debug, Clone)]
struct TofDraw {
    params: QahParams,
    chern: i32,
    label: u8,
    image: Vec<f64>,
    alarms: Vec<String>,
}

fn draw_tof(s: &TofSampling, region_label: u8, seed: u64) -> Result<TofDraw> {
    let mut rng = SplitMix64::new(seed);
    let mu_range = if region_label == 1 { s.mu_topological } else { s.mu_trivial };
    let mut alarms = Vec::new();
    for _ in 0..=s.max_redraws {
        let params = QahParams::new(
            rng.uniform(s.jx_range.0, s.jx_range.1),
            rng.uniform(s.jy_range.0, s.jy_range.1),
            s.t,
            rng.uniform(mu_range.0, mu_range.1),
        );
        let chern = chern_number(&params, s.label_grid)?;
        let label = u8::from(chern.abs() == 1);
        if chern.abs() > 1 || label != region_label {
            alarms.push(format!(
                "jx={} jy={} t={} mu={} gave C={chern} in the {} region; redrawn",
                params.jx,
                params.jy,
                params.t,
                params.mu,
                if region_label == 1 { "topological" } else { "trivial" }
            ));
            continue;
        }
        return Ok(TofDraw { params, chern, label, image: tof_image(&params)?, alarms });
    }
    Err(Error::invalid(format!(
        "sampling region for label {region_label} produced no consistent point after {} draws",
        s.max_redraws + 1
    )))
}

fn check_range(name: &str, r: (f64, f64)) -> Result<()> {
    if !(r.0.is_finite() && r.1.is_finite() && r.0 < r.1) {
        return Err(Error::invalid(format!("{name} range [{}, {}] is empty", r.0, r.1)));
    }
    Ok(())
}

/// Time-of-flight images labelled by the computed Chern number
/// (label 1 ⇔ `|C| = 1`). Each sample has its own derived seed, so the
/// dataset does not depend on evaluation order.
pub fn gen_tof_dataset(s: &TofSampling, seed: u64) -> Result<Dataset> {
    check_range("J_x", s.jx_range)?;
    check_range("J_y", s.jy_range)?;
    check_range("topological mu", s.mu_topological)?;
    check_range("trivial mu", s.mu_trivial)?;
    if s.n_train_per_class == 0 || s.n_test_per_class == 0 {
        return Err(Error::invalid("split sizes must be positive"));
    }
    let mut jobs = Vec::new();
    for (split, n) in [("train", s.n_train_per_class), ("test", s.n_test_per_class)] {
        for label in [0u8, 1] {
            for i in 0..n {
                jobs.push((split, label, derive_seed(seed, &format!("tof/{split}/{label}/{i}"))));
            }
        }
    }
    let draws: Vec<Result<TofDraw>> = jobs.par_iter().map(|&(_, label, sd)| draw_tof(s, label, sd)).collect();

    let mut train = Vec::new();
    let mut test = Vec::new();
    for ((split, _, _), draw) in jobs.iter().zip(draws) {
        let d = draw?;
        if *split == "train" { train.push(d) } else { test.push(d) }
    }
    let mut order = SplitMix64::new(derive_seed(seed, "tof/order"));
    order.shuffle(&mut train);
    order.shuffle(&mut test);

    let mut provenance = vec![
        ("kind".to_string(), "tof".to_string()),
        ("seed".to_string(), seed.to_string()),
        ("jx_range".to_string(), format!("{},{}", s.jx_range.0, s.jx_range.1)),
        ("jy_range".to_string(), format!("{},{}", s.jy_range.0, s.jy_range.1)),
        ("t".to_string(), s.t.to_string()),
        ("mu_topological".to_string(), format!("{},{}", s.mu_topological.0, s.mu_topological.1)),
        ("mu_trivial".to_string(), format!("{},{}", s.mu_trivial.0, s.mu_trivial.1)),
        ("label_grid".to_string(), s.label_grid.to_string()),
    ];
    let mut alarm_count = 0;
    for (split, draws) in [("train", &train), ("test", &test)] {
        for (i, d) in draws.iter().enumerate() {
            let key = |f: &str| format!("{split}.{i}.{f}");
            provenance.push((key("jx"), d.params.jx.to_string()));
            provenance.push((key("jy"), d.params.jy.to_string()));
            provenance.push((key("mu"), d.params.mu.to_string()));
            provenance.push((key("chern"), d.chern.to_string()));
            provenance.push((key("label"), d.label.to_string()));
            for a in &d.alarms {
                provenance.push((format!("alarm.{alarm_count}"), a.clone()));
                alarm_count += 1;
            }
        }
    }
    let to_samples = |v: Vec<TofDraw>| v.into_iter().map(|d| LabeledSample::features(d.image, d.label)).collect();
    let mut ds = Dataset::new("tof", to_samples(train), to_samples(test), seed)?;
    ds.provenance = provenance;
    Ok(ds)
}
