//! Folding Gaussian draws onto the signs of a uniformly random codeword
//! leaves the marginal distribution standard normal.

use qtag::watermark::{fold_into_partitions, gaussian_draws};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, Normal};

fn main() {
    let n = 200_000;
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let bits: Vec<bool> = (0..n).map(|_| rng.random()).collect();
    let mut z = gaussian_draws(42, n);
    fold_into_partitions(&bits, &mut z);
    assert!(bits.iter().zip(&z).all(|(&b, &x)| b == (x >= 0.0)));

    let mean = z.iter().sum::<f64>() / n as f64;
    let var = z.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;

    z.sort_by(f64::total_cmp);
    let normal = Normal::standard();
    let d = z
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = normal.cdf(x);
            (f - i as f64 / n as f64).max((i + 1) as f64 / n as f64 - f)
        })
        .fold(0.0, f64::max);

    println!("n = {n}");
    println!("mean      {mean:+.5}");
    println!("variance  {var:.5}");
    println!(
        "KS D      {d:.5}  (5% critical value {:.5})",
        1.358 / (n as f64).sqrt()
    );
}
