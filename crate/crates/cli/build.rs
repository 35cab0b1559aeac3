//! Hashes the sources of both crates into BLOWUP_CODE_HASH for the
//! provenance record written next to every output.

use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

fn collect(dir: &Path, out: &mut Vec<PathBuf>) {
    let Ok(entries) = fs::read_dir(dir) else { return };
    for e in entries.flatten() {
        let p = e.path();
        if p.is_dir() {
            collect(&p, out);
        } else if p.extension().is_some_and(|x| x == "rs" || x == "toml") {
            out.push(p);
        }
    }
}

fn main() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("..");
    let mut files = Vec::new();
    for krate in ["core", "cli"] {
        let base = root.join(krate);
        collect(&base.join("src"), &mut files);
        files.push(base.join("Cargo.toml"));
        files.push(base.join("build.rs"));
        println!("cargo:rerun-if-changed={}", base.join("src").display());
        println!("cargo:rerun-if-changed={}", base.join("Cargo.toml").display());
    }
    let mut rel: Vec<(String, PathBuf)> = files
        .into_iter()
        .filter(|p| p.exists())
        .map(|p| (p.strip_prefix(&root).unwrap_or(&p).to_string_lossy().replace('\\', "/"), p))
        .collect();
    rel.sort();
    let mut h = Sha256::new();
    for (name, path) in &rel {
        h.update(name.as_bytes());
        h.update([0]);
        h.update(fs::read(path).unwrap_or_default());
        h.update([0]);
    }
    let hex: String = h.finalize().iter().map(|b| format!("{b:02x}")).collect();
    println!("cargo:rustc-env=BLOWUP_CODE_HASH={hex}");
}
