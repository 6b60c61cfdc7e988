//! Bounded distortion for a nonlinear expanding circle map.

use ergolab::entropy_mixing::distortion_ratio;
use ergolab::{Params, Point, SystemSpec};

fn main() -> ergolab::Result<()> {
    let p: Params = [("k".to_string(), 2.0), ("eps".to_string(), 0.3)].into();
    let f = SystemSpec::build("expanding", &p)?;
    let (x, y) = (Point::float(&[0.1]), Point::float(&[0.1 + 1e-7]));
    for n in [1, 5, 10, 15, 20] {
        match distortion_ratio(&f, &x, &y, n) {
            Ok(r) => println!("n = {n:>2}: ratio {r:.6}"),
            Err(e) => println!("n = {n:>2}: {e}"),
        }
    }
    Ok(())
}
