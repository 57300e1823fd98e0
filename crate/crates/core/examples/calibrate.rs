//! Prints the mass calibration constant committed as `fixtures::C_CAL`.

use ahglue::fixtures::calibration_field;
use ahglue::grid::GridSpec;
use ahglue::mass::calibrate;

fn main() -> ahglue::Result<()> {
    let c = calibrate(&calibration_field(&GridSpec::default())?)?;
    println!("c_cal = {c:.15}");
    let fine = calibrate(&calibration_field(&GridSpec { level: 1, ..GridSpec::default() })?)?;
    println!("c_cal (level 1) = {fine:.15}");
    Ok(())
}
