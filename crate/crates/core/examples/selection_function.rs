//! Tabulates the selection function c(y) and its integral.
use crslab::rcrs::solve_selection_function;

fn main() -> crslab::Result<()> {
    for l in [2usize, 3, 5] {
        let sf = solve_selection_function(l, 4000)?;
        let samples: Vec<String> = [0.0, 0.25, 0.5, 0.75, 1.0]
            .iter()
            .map(|&y| format!("{:.4}", sf.c_at(y)))
            .collect();
        println!(
            "L={l}: integral {:.5}, c(1) {:.6}, residual {:.1e}, c at quarters [{}]",
            sf.integral,
            sf.c_one(),
            sf.residual,
            samples.join(", ")
        );
    }
    Ok(())
}
