//! Chi-bar-squared weights: closed forms, simulation, quantiles and CSV.

use conetest::dist::{isotonic_weights, mc_weights, mixture_quantile, orthant_weights};
use conetest::project::CovarianceSpec;
use conetest::{ChiBarMixture, PolyhedralCone};

fn main() -> conetest::Result<()> {
    for p in 2..=6 {
        let w = orthant_weights(p);
        let q = mixture_quantile(&w, 0.05)?;
        println!("orthant  p={p} q(0.05)={q:.4} w={:.4?}", w.weights());
    }
    for p in 2..=6 {
        let w = isotonic_weights(p)?;
        let q = mixture_quantile(&w, 0.05)?;
        println!("isotonic p={p} q(0.05)={q:.4} w={:.4?}", w.weights());
    }

    let cone = PolyhedralCone::isotonic(4)?;
    let sim = mc_weights(&cone, &CovarianceSpec::identity(4), 200_000, 1)?;
    println!("simulated isotonic p=4: {:.4?}", sim.weights());

    let mut csv = Vec::new();
    isotonic_weights(4)?.write_csv(&mut csv)?;
    print!("{}", String::from_utf8_lossy(&csv));
    let back = ChiBarMixture::read_csv(csv.as_slice())?;
    println!("read back, provenance {:?}", back.provenance());
    Ok(())
}
