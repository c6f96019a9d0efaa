// The configuration-driven pipeline behind the `bsts` binary, run in a
// temporary directory.

use bsts::run::{run, Command, RunConfig};

pub fn run_example() -> bsts::Result<()> {
    let dir = std::env::temp_dir().join(format!("bsts-pipeline-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|source| bsts::Error::Io {
        path: dir.display().to_string(),
        source,
    })?;
    let mut csv = String::from("date,y,lead,noise\n");
    for t in 0..96usize {
        let lead = ((t * 13 % 17) as f64 - 8.0) / 4.0;
        let prev = (((t + 16) * 13 % 17) as f64 - 8.0) / 4.0;
        let y = 20.0 + 0.05 * t as f64 + 1.5 * (t as f64 * std::f64::consts::PI / 6.0).sin() + 0.8 * prev;
        let noise = ((t * 7 % 11) as f64 - 5.0) / 3.0;
        csv.push_str(&format!("{}-{:02},{y:.4},{lead:.4},{noise:.4}\n", 2010 + t / 12, t % 12 + 1));
    }
    let data = dir.join("data.csv");
    std::fs::write(&data, csv).map_err(|source| bsts::Error::Io {
        path: data.display().to_string(),
        source,
    })?;
    let cfg = RunConfig::from_toml(&format!(
        r#"
seed = 1
out = "{out}"
[data]
path = "{data}"
target = "y"
train_end = "2016-12"
[model]
preset = "h6"
[mcmc]
iterations = 300
burn_in = 100
[forecast]
horizon = 6
[eval]
forecasts = "{out}/forecast.csv"
models = ["mean", "median"]
"#,
        out = dir.join("out").display(),
        data = data.display()
    ))?;
    for cmd in [Command::Ingest, Command::Diagnose, Command::Fit, Command::Forecast, Command::Evaluate] {
        let files = run(cmd, &cfg)?;
        let names: Vec<_> = files.iter().filter_map(|p| p.file_name()).map(|n| n.to_string_lossy().into_owned()).collect();
        println!("{cmd:<9} -> {}", names.join(", "));
    }
    let metrics = std::fs::read_to_string(dir.join("out/metrics.csv")).unwrap_or_default();
    print!("{metrics}");
    let _ = std::fs::remove_dir_all(&dir);
    Ok(())
}

fn main() -> bsts::Result<()> {
    run_example()
}
