//! Compares backpropagated gradients with central finite differences for
//! the reconstructor and classifier stacks.
//!
//! ```text
//! cargo run --release --example gradient_check
//! ```

use fraudlens::detector::Architecture;
use fraudlens::{nn, DenseMatrix};
use rand::Rng;

fn probe(net: &nn::Network, x: &DenseMatrix, g: &DenseMatrix) -> f64 {
    let (out, _) = net.forward_cached(x).expect("forward");
    out.as_slice().iter().zip(g.as_slice()).map(|(a, b)| a * b).sum()
}

fn main() -> fraudlens::Result<()> {
    let arch = Architecture::default();
    let mut rng = fraudlens::rng::stream(1, "example");
    for (name, specs) in [("reconstructor", &arch.reconstructor), ("classifier", &arch.classifier)] {
        let mut net = nn::init_network(specs, 1)?;
        for p in net.params_mut() {
            p.iter_mut().for_each(|v| *v = rng.random_range(-0.5..0.5));
        }
        let x = DenseMatrix::from_vec(8, 28, (0..8 * 28).map(|_| rng.random_range(-2.0..2.0)).collect())?;
        let out_dim = net.output_dim();
        let g = DenseMatrix::from_vec(8, out_dim, (0..8 * out_dim).map(|_| rng.random_range(-1.0..1.0)).collect())?;
        let (_, cache) = net.forward_cached(&x)?;
        let analytic: Vec<Vec<f64>> = net.backward(&cache, &g)?.param_slices().iter().map(|s| s.to_vec()).collect();

        let h = 1e-5;
        let mut worst: f64 = 0.0;
        let mut work = net.clone();
        for (pi, grads) in analytic.iter().enumerate() {
            for (k, &a) in grads.iter().enumerate() {
                let orig = work.params_mut()[pi][k];
                work.params_mut()[pi][k] = orig + h;
                let up = probe(&work, &x, &g);
                work.params_mut()[pi][k] = orig - h;
                let down = probe(&work, &x, &g);
                work.params_mut()[pi][k] = orig;
                let n = (up - down) / (2.0 * h);
                worst = worst.max((a - n).abs() / a.abs().max(n.abs()).max(1e-4));
            }
        }
        println!("{name}: {} parameters, max relative error {worst:.2e}", net.param_count());
    }
    Ok(())
}
