use std::collections::BTreeMap;
use std::fs;

pub const TOOL_VERSION: &str = concat!("gemmbench ", env!("CARGO_PKG_VERSION"));

/// Describes the host: OS, architecture, CPU model, thread count and tool version.
pub fn capture() -> BTreeMap<String, String> {
    let mut env = BTreeMap::new();
    env.insert("os".into(), std::env::consts::OS.into());
    env.insert("arch".into(), std::env::consts::ARCH.into());
    env.insert("tool_version".into(), TOOL_VERSION.into());
    if let Ok(n) = std::thread::available_parallelism() {
        env.insert("logical_cpus".into(), n.to_string());
    }
    env.insert("worker_threads".into(), rayon::current_num_threads().to_string());
    if let Some(cpu) = cpu_model() {
        env.insert("cpu".into(), cpu);
    }
    env
}

fn cpu_model() -> Option<String> {
    let info = fs::read_to_string("/proc/cpuinfo").ok()?;
    info.lines()
        .find(|l| l.starts_with("model name") || l.starts_with("Hardware"))
        .and_then(|l| l.split_once(':'))
        .map(|(_, v)| v.trim().to_string())
}
