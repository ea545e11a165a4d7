//! A small sweep driven from a TOML document, printed as CSV.

use gapfield::experiments::{jikang, output, sweep, Config};

const CONFIG: &str = r#"
[sweep]
eps = [0.1, 0.01, 0.001]
orders = [1, 2]

[[sweep.regime]]
label = "theorem"
k1 = 0.1
k2 = 10.0
"#;

fn main() -> gapfield::error::Result<()> {
    let cfg = Config::from_toml(CONFIG)?;
    let records = sweep::run_sweep(&cfg);
    output::write_csv(&records, std::io::stdout().lock())?;
    println!();
    output::write_csv(&jikang::jikang_from_sweep(&cfg, &records), std::io::stdout().lock())?;
    Ok(())
}
