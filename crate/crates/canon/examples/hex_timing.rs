// timing probe for the hexagon pq5 realization
fn main() {
    let g = canon::library::hexagon();
    let kin = canon::library::hexagon_kin();
    let t = std::time::Instant::now();
    let kb = canon::forms::KinBundle::build(&g, &kin).unwrap();
    println!("bundle: {:?}", t.elapsed());
    let t = std::time::Instant::now();
    let spec = canon::forms::FormSpec::parse("pq5").unwrap();
    let f = canon::forms::realize(&spec, &kb, &kin).unwrap();
    println!("realize pq5: {:?}", t.elapsed());
    let masks: Vec<u32> = f.coeffs().map(|(m, _)| m).collect();
    println!("nonzero coefficient subsets: {}", masks.len());
}
