//! Runs the ten acceptance criteria and prints one line per criterion.

use ludics::acceptance::run;

fn main() {
    let seed = std::env::var("LUDICS_SEED").ok().and_then(|s| s.parse().ok()).unwrap_or(0);
    let only: Option<usize> = std::env::args().skip(1).find_map(|a| a.parse().ok());
    let mut failed = 0;
    for id in 1..=10 {
        if only.is_some_and(|o| o != id) {
            continue;
        }
        let r = run(id, seed);
        println!("{r}");
        failed += !r.passed as usize;
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
