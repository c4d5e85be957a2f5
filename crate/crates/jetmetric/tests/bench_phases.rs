use std::time::Instant;

#[test]
fn bench_closedness_phases() {
    let t0 = Instant::now();
    let ctx = jetmetric::geometry::build_context(3).unwrap();
    println!("build_context(3): {:?}", t0.elapsed());
    let ok = jetmetric::charforms::check_closed_pontryagin(
        &ctx, 1,
        jetmetric::geometry::CheckMode::Sampled { cases: 5, seed: 81 },
    );
    println!("5 closedness samples: {:?} ok={ok}", t0.elapsed());
}

#[test]
fn bench_n4_context() {
    let t0 = Instant::now();
    let ctx = jetmetric::geometry::build_context(4).unwrap();
    println!("build_context(4): {:?}", t0.elapsed());
    let t1 = Instant::now();
    let ok = jetmetric::charforms::check_euler_square(
        &ctx,
        jetmetric::geometry::CheckMode::Sampled { cases: 2, seed: 82 },
    ).unwrap();
    println!("2 euler-square samples (n=4): {:?} ok={ok}", t1.elapsed());
}
