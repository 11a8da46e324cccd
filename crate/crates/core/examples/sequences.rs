//! Summability and support diagnostics for the built-in sequences.

use perctrunc::{ProbSequence, SumMode};

fn main() -> perctrunc::Result<()> {
    for spec in ["invsqrt", "remark-p", "remark-q", "powlaw:c=0.5,alpha=1", "const:p=0.3"] {
        let seq: ProbSequence = spec.parse()?;
        let horizon = 100_000;
        println!("{spec}");
        println!("  p_1..p_10  {:?}", (1..=10).map(|n| seq.p(n)).collect::<Vec<_>>());
        println!("  sum p_n    {:.4}", seq.partial_sum(SumMode::Plain, horizon)?);
        println!("  sum p_n^2  {:.4}", seq.partial_sum(SumMode::Squares, horizon)?);
        for shift in 1..=2 {
            println!("  cross({shift})   {:.4}", seq.partial_sum(SumMode::Cross(shift), horizon)?);
        }
        println!("  min support {:?}, gcd {:?}", seq.support_min(horizon), seq.support_gcd(horizon));
    }

    // truncation zeroes every length beyond K
    let t = ProbSequence::InverseSqrt.truncate(4)?;
    println!("invsqrt truncated at 4: p_4 = {}, p_5 = {}", t.eval(4)?, t.eval(5)?);
    Ok(())
}
