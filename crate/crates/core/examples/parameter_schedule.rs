// Scheduled (β, δ, α) per cutoff level for a Lipschitz field, and how
// c_k(1) grows with k.

use ceflow::diagnostics::schedule::linear_c_at_one_log;
use ceflow::diagnostics::{build_cutoff, parameter_schedule};
use ceflow::fields::catalog;

pub fn run_example() -> Result<Vec<f64>, Box<dyn std::error::Error>> {
    let field = catalog::rotation(1.0);
    let i_total = 1e-9;
    let mut c_at_one = Vec::new();
    for k in [2u32, 4, 8, 16] {
        let r_k = build_cutoff(&field.growth, k)?.r_k;
        let c_omega = field.c_omega(r_k + 1.0);
        let s = parameter_schedule(k, i_total, 0.0, c_omega, field.c_growth, &field.modulus, &field.growth)?;
        let terms = s.recheck(i_total, s.i_k, c_omega, field.c_growth, &field.modulus, &field.growth)?;
        println!(
            "k={k:<3} R_k={r_k:<10.3e} β={:.6} δ={:.3e} α=2^-{} terms={terms:.4?} c_k(1)={:.4}",
            s.beta, s.delta, s.alpha_exponent, s.c_at_one
        );
        c_at_one.push(s.c_at_one);
    }
    for k in [64u32, 1024, 4096] {
        println!("k={k:<5} c_k(1) = {:.2}", linear_c_at_one_log(k, i_total, field.c_omega(1.0), field.c_growth));
    }
    Ok(c_at_one)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example().map(|_| ())
}
