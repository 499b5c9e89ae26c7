//! End-to-end smoke drive: construct, verify, persist, reload, decode, and
//! simulate a small overloaded matrix, printing what happened at each step.

use gco_core::decode::{
    decode_exhaustive, decode_tail_search, default_head, DecodeProblem, DecoderKind,
};
use gco_core::matrix::{read_matrix_str, write_matrix_string};
use gco_core::matrix::presets::build_recipe;
use gco_core::sim::{simulate_error_rate, Activity, NoiseKind, SimConfig};
use num_complex::Complex64;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mat = build_recipe("seed-4x6")?;
    println!(
        "built seed-4x6: {}x{} over {} input symbols, verification {:?}",
        mat.m(),
        mat.n(),
        mat.input().len(),
        mat.verification
    );

    let text = write_matrix_string(&mat)?;
    let back = read_matrix_str(&text)?;
    println!(
        "file round-trip: {} bytes, dims preserved: {}",
        text.len(),
        back.m() == mat.m() && back.n() == mat.n()
    );

    // Encode a fixed word, perturb it, decode with both decoders.
    let x = vec![0usize, 1, 2, 0, 1, 2];
    let symbols: Vec<Complex64> = mat.input().values().iter().map(|v| v.approx()).collect();
    let scale = 0.5;
    let mut y = vec![Complex64::default(); mat.m()];
    for (j, &k) in x.iter().enumerate() {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi += mat.entry(i, j).approx() * scale * symbols[k];
        }
    }
    y[0] += Complex64::new(0.05, -0.02);
    let p = DecodeProblem {
        matrix: &mat,
        y,
        scale,
    };
    let a = decode_exhaustive(&p, 1 << 20)?;
    let head = default_head(&mat)?;
    let b = decode_tail_search(&p, &head)?;
    println!(
        "decode: exhaustive {:?} ({} evals), tail {:?} ({} evals, heuristic={})",
        a.x_hat, a.metric_evaluations, b.x_hat, b.metric_evaluations, b.heuristic
    );
    assert_eq!(a.x_hat, x, "perturbed word should decode back");

    let cfg = SimConfig {
        matrix: &mat,
        trials: 2000,
        seed: 7,
        decoder: DecoderKind::Exhaustive,
        eta_grid_db: vec![2.0, 6.0, 10.0],
        activity: Activity::AllActive,
        noise: NoiseKind::ComplexGaussian,
        budget: 1 << 30,
    };
    let report = simulate_error_rate(&cfg)?;
    print!(
        "{}",
        report.to_csv(&[("example", "roundtrip".to_string())])
    );
    Ok(())
}
