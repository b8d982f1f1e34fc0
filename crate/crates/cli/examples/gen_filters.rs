//! Regenerates the bundled filter files: `cargo run --example gen_filters`.

use std::path::Path;

use transop::catalog;
use transop_cli::filefmt::FilterFile;

/// Seed of the bundled random 2×2 filter.
const RANDOM_SEED: u64 = 2024;

fn main() -> std::io::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("filters");
    std::fs::create_dir_all(&dir)?;
    let files = [
        FilterFile::from_filter("haar", &catalog::haar(), vec![]),
        FilterFile::from_filter(
            "stretched_haar",
            &catalog::stretched_haar(),
            vec![("autocorrelation".into(), catalog::stretched_haar_autocorrelation())],
        ),
        FilterFile::from_filter("diag_haar_one", &catalog::diag_haar_one(), vec![]),
        FilterFile::from_filter("random_qmf_d2", &catalog::random_qmf(RANDOM_SEED), vec![]),
    ];
    for f in &files {
        let path = dir.join(format!("{}.json", f.name));
        std::fs::write(&path, f.to_json())?;
        println!("{}", path.display());
    }
    Ok(())
}
