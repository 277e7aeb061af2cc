use abelchain::hierarchy::OperatorKind;
use abelchain::poly::JetSpace;
use abelchain::verify;
use std::time::Instant;

fn main() {
    let space = JetSpace::default();
    let t = Instant::now();
    let d = verify::run_darboux(space, OperatorKind::Abel, (1, 8));
    println!("darboux 1..8: {:?} verified={}", t.elapsed(), d.all_verified());
    let t = Instant::now();
    let m = verify::run_multipliers(space, OperatorKind::Abel, (2, 8));
    println!("multipliers 2..8: {:?} verified={}", t.elapsed(), m.all_verified());
    let t = Instant::now();
    let i = verify::run_integrals(space, OperatorKind::Abel, (2, 6), 0xabe1);
    println!("integrals 2..6: {:?} verified={}", t.elapsed(), i.all_verified());
    for r in &i.records { if r.status != verify::Status::Pass { println!("  {:?}", r); } }
    let t = Instant::now();
    let l = verify::run_lagrangian(space);
    println!("lagrangian: {:?} verified={}", t.elapsed(), l.all_verified());
}
