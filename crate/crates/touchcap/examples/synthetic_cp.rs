//! Regenerates `data/synthetic_cp.csv`: the calibrated profile with the gap
//! moved to 650 µm, swept 0–60 kPa in 1 kPa steps, with 1% multiplicative
//! Gaussian noise from a fixed seed.
//!
//! cargo run -p touchcap --example synthetic_cp > crates/touchcap/data/synthetic_cp.csv

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use touchcap::io::{csv_bytes, fmt_f64};
use touchcap::DeviceConfig;
use touchcap_core::sweep_cp_curve;

const GAP: f64 = 650e-6;
const NOISE: f64 = 0.01;
const SEED: u64 = 20_240_611;

fn main() {
    let cfg = DeviceConfig::bundled();
    let mut geom = cfg.geometry("calibrated").expect("bundled profile");
    geom.gap = GAP;
    let pressures = DeviceConfig::pressures(0.0, 60e3, 61);
    let curve = sweep_cp_curve(&geom, &pressures, &cfg.sweep_settings()).expect("model sweep");
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let noise = Normal::new(0.0, NOISE).expect("valid distribution");
    let rows: Vec<Vec<String>> = curve
        .points
        .iter()
        .map(|p| {
            let c = p.capacitance * (1.0 + noise.sample(&mut rng));
            vec![fmt_f64(p.pressure), fmt_f64(c)]
        })
        .collect();
    let bytes = csv_bytes(&["pressure_pa", "capacitance_f"], &rows);
    print!("{}", String::from_utf8(bytes).expect("ascii"));
}
