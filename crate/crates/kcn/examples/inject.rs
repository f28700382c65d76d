//! Scratch diagnostic: re-evaluate a dumped solver state on finer grids.
//!
//! Reads /tmp/fence_state.csv (produced by the solver's KCN_DUMP hook),
//! reconstructs the physical profile, interpolates it onto finer grids of
//! the same physical extent, and recomputes mass, kinetic term, both
//! Choquard terms, the raw Gagliardo-Nirenberg quotients, and the energy.
//! If the quotients collapse under refinement the state is a coarse-grid
//! artifact; if they persist the constant estimates are at fault.

use kcn::energy::{base_quantities, energy_from_base, Kernels};
use kcn::exponents::{derive_exponents, ProblemParams};
use kcn::radial::{RadialFunction, RadialGrid};

fn main() {
    let text = std::fs::read_to_string("/tmp/fence_state.csv").expect("dump exists");
    let mut lines = text.lines();
    let sigma: f64 = lines
        .next()
        .and_then(|l| l.strip_prefix("# sigma "))
        .and_then(|s| s.parse().ok())
        .expect("sigma header");
    let v: Vec<f64> = lines.map(|l| l.parse().expect("value")).collect();
    let m0 = v.len();
    eprintln!("loaded state: sigma {sigma:.6e}  m {m0}");

    let alpha = 6.611465e2;
    let params = ProblemParams::new(3, 2.0, 1.0, 1.0, 2.0, 1.0, 1.5, 3.0, alpha).unwrap();
    let d = derive_exponents(&params);

    let ref0 = RadialGrid::uniform(3, m0, 16.0).unwrap();
    let x0: Vec<f64> = ref0.nodes().to_vec();

    for factor in [1usize, 2, 4, 8] {
        let m = m0 * factor;
        let refg = RadialGrid::uniform(3, m, 16.0).unwrap();
        // Interpolate in reference coordinates: the same sigma scales both
        // grids, so matching reference positions match physical radii.
        let mut w = Vec::with_capacity(m);
        let mut k = 0usize;
        for &x in refg.nodes() {
            let val = if x <= x0[0] {
                v[0]
            } else if x >= x0[m0 - 1] {
                0.0
            } else {
                while x0[k + 1] < x {
                    k += 1;
                }
                let t = (x - x0[k]) / (x0[k + 1] - x0[k]);
                (1.0 - t) * v[k] + t * v[k + 1]
            };
            w.push(val);
        }
        let phys = refg.rescaled(sigma).unwrap();
        let kern = Kernels::build(&phys, params.mu).unwrap();
        let f = RadialFunction::new(phys.clone(), w.clone()).unwrap();
        let bq = base_quantities(&f, &params, &kern).unwrap();
        // Renormalize to unit mass and re-evaluate.
        let s = (params.c * params.c / bq.mass_sq).sqrt();
        let f = RadialFunction::new(phys, w.iter().map(|&y| s * y).collect()).unwrap();
        let bq = base_quantities(&f, &params, &kern).unwrap();
        let qq = bq.dq
            / (bq.mass_sq.sqrt().powf(2.0 * params.q * (1.0 - d.delta_q))
                * bq.g.powf(params.q * d.delta_q));
        let qp = bq.dp
            / (bq.mass_sq.sqrt().powf(2.0 * params.p * (1.0 - d.delta_p))
                * bq.g.powf(params.p * d.delta_p));
        eprintln!(
            "M {m:5}  mass_pre {:.9e}  G {:.9e}  Dq {:.9e}  Dp {:.9e}  Qq_raw {qq:.6e}  Qp_raw {qp:.6e}  J {:.9e}",
            bq.mass_sq / (s * s),
            bq.g,
            bq.dq,
            bq.dp,
            energy_from_base(&bq, &params).total,
        );
    }
}
