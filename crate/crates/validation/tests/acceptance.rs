//! One line per criterion; exits nonzero if any criterion fails.

use circqft_validation::*;

fn main() {
    let (phases, phases_total) = adiabatic_phases();
    let results: Vec<(&str, &str, Outcome)> = vec![
        ("1", "circulant diagonalization by the DFT", circulant_diagonalization()),
        ("2", "closed-form eigenvalues vs dense solver", eigenvalues_vs_dense()),
        ("3", "eigenvalue trajectories of the 4-level model", eigenvalue_trajectories()),
        ("4", "phase estimation at φ = 0.75, r = 2", phase_estimation_demo()),
        ("5", "integrator unitarity and order", integrator_quality()),
        ("6", "factorization residual in the adiabatic limit", adiabatic_limit()),
        ("7", "adiabatic phases vs dynamical phase", phases),
        ("7+", "adiabatic phases vs dynamical + geometric phase (report)", phases_total),
        ("8", "Zeeman/Stark level-shift solver", level_shift_solver()),
        ("9", "six-level gauge reduction", six_level_gauge()),
        ("10", "simulated QPE vs phased-QFT oracle", oracle_equivalence()),
        ("11", "outcome distributions independent of α", phase_irrelevance()),
    ];
    let mut failed = 0;
    for (id, name, o) in &results {
        // the supplementary line is informational only
        if !o.pass && !id.ends_with('+') {
            failed += 1;
        }
        println!("[{}] {id:>3} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("acceptance: {} of 11 criteria passed", 11 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
