//! Lyapunov exponents by QR, the horseshoe hyperbolicity check and the solenoid.

use ergolab::lyapunov::{hyperbolicity_check, log_det_average, scalar_exponent, spectrum_qr, QrOptions};
use ergolab::systems::horseshoe_cylinder_point;
use ergolab::{Params, Point, SystemSpec};

fn main() -> ergolab::Result<()> {
    let cat = SystemSpec::build("cat_map", &Params::new())?;
    let x = Point::float(&[0.1234567, 0.7654321]);
    let s = spectrum_qr(&cat, &x, 10_000, &QrOptions::default())?;
    println!("cat map: {:?}, expected ±{:.12}", s.exponents, ((3.0 + 5f64.sqrt()) / 2.0).ln());
    println!("log|det| average: {:.3e}", log_det_average(&cat, &x, 0, 10_000)?);

    let sol = SystemSpec::build("solenoid", &Params::new())?;
    let s = spectrum_qr(&sol, &sol.default_start(), 10_000, &QrOptions::default())?;
    println!("solenoid: {:?}", s.exponents);

    let ns = SystemSpec::build("north_south", &Params::new())?;
    println!("north-south from 0.3: {:.6}", scalar_exponent(&ns, &Point::float(&[0.3]), 10_000)?);

    let horseshoe = SystemSpec::build("horseshoe", &Params::new())?;
    let code = [0, 1, 1, 0, 1, 0, 0, 1, 1, 1, 0, 0];
    let y = horseshoe_cylinder_point(&code)?;
    let opts = QrOptions { transient: Some(0), ..QrOptions::default() };
    println!("horseshoe: {:?}", spectrum_qr(&horseshoe, &y, code.len(), &opts)?.exponents);
    let rep = hyperbolicity_check(&horseshoe, &y, code.len() - 1, 0.2, 5.0, 1.0, None)?;
    println!("hyperbolic: {} with C = {}", rep.pass, rep.c);
    Ok(())
}
