//! Theoretical speedups from Amdahl's law and how far measured speedups
//! fall from them.

use mandelbrot_rows::analysis::{
    amdahl_speedup, percentage_difference, AmdahlModel, TaskCount, REFERENCE_ASYMPTOTIC_SPEEDUP,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let model = AmdahlModel::from_asymptotic_speedup(REFERENCE_ASYMPTOTIC_SPEEDUP)?;
    println!("serial fraction {:.7}, parallel fraction {:.7}", model.serial_fraction(), model.parallel_fraction());
    println!("{:>4}  {:>10}", "N", "speedup");
    for n in [2usize, 4, 8, 16, 32] {
        println!("{n:>4}  {:>10.5}", amdahl_speedup(&model, n)?);
    }
    println!("{:>4}  {:>10.5}", "inf", amdahl_speedup(&model, TaskCount::Unbounded)?);

    let measured = [(2, 1.97812), (8, 2.49809), (32, 22.87749)];
    println!();
    for (n, actual) in measured {
        let theoretical = amdahl_speedup(&model, n)?;
        println!(
            "N = {n:>2}: theoretical {theoretical:.5}, measured {actual:.5}, difference {:.3}%",
            percentage_difference(theoretical, actual)?
        );
    }
    Ok(())
}
