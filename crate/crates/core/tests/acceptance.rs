use vhj_lab::verify::Battery;

#[test]
fn acceptance() {
    let battery = Battery::new(20240601);
    let mut failed = Vec::new();
    for id in 1..=13u8 {
        let start = std::time::Instant::now();
        let o = battery.criterion(id);
        println!("{}  ({:.1} s)", o.summary_line(), start.elapsed().as_secs_f64());
        for note in &o.notes {
            println!("      {note}");
        }
        if !o.pass {
            failed.push(id);
        }
    }
    println!("failed criteria: {failed:?}");
}
