//! Builds the affine plane of order L and the tightness instance on it.
use crslab::geometry::{affine_plane, tightness_instance};
use crslab::model::{save_instance, validate};

fn main() -> crslab::Result<()> {
    let l: u64 = std::env::args()
        .nth(1)
        .and_then(|a| a.parse().ok())
        .unwrap_or(3);
    let plane = affine_plane(l)?;
    plane.check()?;
    println!(
        "order {} plane: {} points, {} parallel classes",
        plane.order(),
        plane.num_points(),
        plane.classes().len()
    );
    for (c, class) in plane.classes().iter().enumerate().take(2) {
        let pts: Vec<String> = class[0].iter().map(|&p| plane.point_id(p)).collect();
        println!("  class {c}, first line: {}", pts.join(" "));
    }

    let inst = tightness_instance(l, 0.1)?;
    let report = validate(&inst, 1e-9);
    println!(
        "tightness instance: {} products in {} batches, valid = {}",
        inst.products().len(),
        inst.num_batches(),
        report.ok
    );
    if l == 2 {
        println!("{}", save_instance(&inst));
    }
    Ok(())
}
