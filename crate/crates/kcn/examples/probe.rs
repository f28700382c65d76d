//! Scratch probe: canonical local solve at selectable resolution.

use kcn::constants::problem_constants;
use kcn::energy::Kernels;
use kcn::exponents::{compute_thresholds, ProblemParams};
use kcn::fiber::g_profile;
use kcn::radial::RadialGrid;
use kcn::solver::{gaussian_init, solve_local_min, SolverConstants};

fn main() {
    let m: usize = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(1024);
    let t = std::time::Instant::now();
    let grid = RadialGrid::uniform(3, m, 16.0).unwrap();
    let kernels = Kernels::build(&grid, 2.0).unwrap();
    let shl = RadialGrid::graded(3, 512, 256.0, 1e-4).unwrap();
    let kshl = Kernels::build(&shl, 2.0).unwrap();
    eprintln!("kernels built ({:?})", t.elapsed());

    let base = ProblemParams::new(3, 2.0, 1.0, 1.0, 2.0, 1.0, 1.5, 3.0, 0.1).unwrap();
    let t = std::time::Instant::now();
    let pc = problem_constants(&base, &kernels, &kshl, 7).unwrap();
    let constants = SolverConstants::from(pc);
    eprintln!(
        "constants ({:?}): c_p {:.6e} c_q {:.6e} s_hl {:.6e}",
        t.elapsed(),
        constants.c_p,
        constants.c_q,
        constants.s_hl
    );
    let thr = compute_thresholds(&base, constants.c_p, constants.c_q, constants.s_hl).unwrap();
    let alpha = 0.5 * thr.admissible_alpha();
    eprintln!(
        "a1 {:.6e} a2 {:.6e} -> alpha {alpha:.6e}",
        thr.alpha1, thr.alpha2
    );
    let params = ProblemParams::new(3, 2.0, 1.0, 1.0, 2.0, 1.0, 1.5, 3.0, alpha).unwrap();
    let env = g_profile(&params, constants.c_p, constants.c_q).unwrap();
    eprintln!("envelope t0 {:.6e} t1 {:.6e}", env.t0, env.t1);

    let init = gaussian_init(kernels.grid(), 1.0).unwrap();
    let t = std::time::Instant::now();
    match solve_local_min(&params, &kernels, &constants, &init) {
        Ok(rec) => eprintln!(
            "OK ({:?}): J {:.9e}  |P| {:.3e}  lam {:.6e}  gl2 {:.6e}  sig {:.6e}  it {}",
            t.elapsed(),
            rec.energy,
            rec.pohozaev_residual,
            rec.lambda,
            rec.grad_l2,
            rec.sigma,
            rec.iterations
        ),
        Err(e) => eprintln!("ERR ({:?}): {e}", t.elapsed()),
    }
}
