//! How many violated constraints the adaptive test tolerates before the
//! mixture quantile becomes the smaller critical value.

use conetest::cone::ConeFamily;
use conetest::sim::crossover_curve;

fn main() -> conetest::Result<()> {
    for family in [ConeFamily::Orthant, ConeFamily::Isotonic] {
        let curve = crossover_curve(family, 2..=30, 0.05)?;
        println!("{family}");
        for row in curve.rows.iter().filter(|r| r.p <= 10 || r.p % 5 == 0) {
            println!(
                "  p={:>3} max_violations={:>2} mixture q={:.3}",
                row.p, row.max_violations, row.mixture_quantile
            );
        }
    }
    let mut csv = Vec::new();
    crossover_curve(ConeFamily::Isotonic, 2..=5, 0.05)?.write_csv(&mut csv)?;
    print!("{}", String::from_utf8_lossy(&csv));
    Ok(())
}
