use nsi_workbench::cutoff::structure_recipe;
use nsi_workbench::field::Rect;
use nsi_workbench::pressure::*;
use std::time::Instant;

fn main() {
    let rect = Rect::new(0.0, 1.0, 1.0, 2.0).unwrap();
    let s = structure_recipe(rect, 0.3).unwrap();
    for (name, u) in [("azimuthal", s.azimuthal_lift()), ("full", s.lift())] {
        println!("== {name}");
        let mut p = PressureEvaluator::new(u.clone());
        p.settings.use_elliptic = true;
        for (x1, x2) in [(0.5, 1.5), (0.5, 1.2), (0.2, 1.15), (0.8, 1.85), (0.5, 1.62)] {
            let t0 = Instant::now();
            let v = p.eval(x1, x2).unwrap();
            let te = t0.elapsed();
            let t0 = Instant::now();
            let (mc, se) = reference_monte_carlo(&u, [x1, x2, 0.0], 1_000_000, 42);
            println!("  ({x1},{x2}): p2d={v:.6} ({te:?})  mc={mc:.6} +- {se:.6} ({:?})  se1e7/|p|={:.3}", t0.elapsed(), se/3.1623/v.abs());
        }
    }
}
