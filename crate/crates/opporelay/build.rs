use std::process::Command;

fn main() {
    // Embed a build identifier in emitted CSV headers so experiment artifacts
    // are traceable to the code that produced them.
    let describe = Command::new("git")
        .args(["describe", "--always", "--dirty", "--tags"])
        .output()
        .ok()
        .filter(|o| o.status.success())
        .map(|o| String::from_utf8_lossy(&o.stdout).trim().to_string())
        .unwrap_or_else(|| "unknown".to_string());
    println!("cargo:rustc-env=OPPORELAY_BUILD={describe}");
    println!("cargo:rerun-if-changed=../../.git/HEAD");
}
