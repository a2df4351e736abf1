fn main() {
    let inst = flexsched::ingest::generate(122, 137, (1, 10), 22703).unwrap();
    let profile = flexsched::TemporalProfile::compute(&inst, 1.1);
    let fs = flexsched::FeasibleSet::new(&inst, profile.deadline).unwrap();
    let t0 = std::time::Instant::now();
    match flexsched::solve_max_total_flex(&fs) {
        Ok((total, _)) => println!("ok total={total:.6} in {:?}", t0.elapsed()),
        Err(e) => println!("ERROR {e} in {:?}", t0.elapsed()),
    }
}
