//! The three inner solvers on hand-made single-vehicle problems: the cloud
//! ratio by the genetic algorithm, the edge ratio in closed form, and the
//! edge resource by the penalty method.

use mscet::scenario::EconParams;
use mscet::solvers::{
    ga_solve_alpha_c, ipm_solve_f, kkt_maximize, RatioProblem, ResourceItem, SolverConfig,
};

fn main() -> mscet::Result<()> {
    let econ = EconParams::default();
    let cfg = SolverConfig::default();

    let cloud = RatioProblem {
        gain: 8.0,
        omega: 6.0,
        delta: 1.0,
        deadline: 5.0,
        upper: 0.8,
    };
    let ga = ga_solve_alpha_c(&[cloud], &[0], &econ, &cfg);
    println!(
        "cloud ratio {:.4} (feasible {})",
        ga[0].value, ga[0].feasible
    );

    let edge = RatioProblem {
        gain: 8.0,
        omega: 4.0,
        delta: 2.0,
        deadline: 5.0,
        upper: 0.6,
    };
    let kkt = kkt_maximize(&edge, &econ);
    println!("edge ratio {:.4} ({:?})", kkt.value, kkt.case);

    let items = [
        ResourceItem {
            comm: 1.0,
            work: 2.0e9,
            deadline: 5.0,
            floor: 2.0,
        },
        ResourceItem {
            comm: 0.5,
            work: 1.0e9,
            deadline: 4.0,
            floor: 3.5,
        },
    ];
    let out = ipm_solve_f(&items, 2.0e9, &econ, &cfg)?;
    for (i, (it, f)) in items.iter().zip(&out.f).enumerate() {
        println!("vehicle {i}: f = {:.3e} Hz, delay {:.3} s", f, it.delay(*f));
    }
    Ok(())
}
