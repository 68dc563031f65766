// Signed atomic measures: Jordan parts, reservoir balancing, push-forward.

use ceflow::measure::{balance_with_reservoir, jordan_decompose, push_forward, Atom, AtomicSignedMeasure};

pub fn run_example() -> Result<(f64, f64), Box<dyn std::error::Error>> {
    let rho = AtomicSignedMeasure::new(
        2,
        vec![
            Atom::new(vec![0.0, 0.0], 1.0),
            Atom::new(vec![1.0, 0.0], -0.25),
            Atom::new(vec![0.0, 2.0], -0.5),
        ],
        0.0,
    )?;
    let (pos, neg) = jordan_decompose(&rho);
    println!("mass {} total variation {}", rho.mass(), rho.total_variation());
    println!("positive part {} / negative part {}", pos.mass(), neg.mass());

    // the lighter side gets the difference at ◊
    let pair = balance_with_reservoir(&pos, &neg)?;
    println!("balanced: μ(◊) = {}, ν(◊) = {}", pair.mu().reservoir(), pair.nu().reservoir());

    let shifted = push_forward(&rho, |_, x| Ok(vec![x[0] + 1.0, x[1]]))?;
    assert_eq!(shifted.mass(), rho.mass());
    Ok((rho.mass(), pair.nu().reservoir()))
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example().map(|_| ())
}
