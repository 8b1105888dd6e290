//! The bundled fault ride-through case as spec files, for demos and tests.

use std::io;
use std::path::Path;

/// (file name, contents). Specs refer to each other by these names.
pub const FRT_FILES: [(&str, &str); 5] = [
    ("frt_test_case.json", include_str!("../fixtures/frt_test_case.json")),
    ("frt_screening.json", include_str!("../fixtures/frt_screening.json")),
    ("frt_blocked.json", include_str!("../fixtures/frt_blocked.json")),
    ("frt_experiment.json", include_str!("../fixtures/frt_experiment.json")),
    (
        "frt_screening_experiment.json",
        include_str!("../fixtures/frt_screening_experiment.json"),
    ),
];

/// Writes every bundled spec into `dir`, creating it if needed.
pub fn write_frt(dir: &Path) -> io::Result<()> {
    std::fs::create_dir_all(dir)?;
    for (name, text) in FRT_FILES {
        std::fs::write(dir.join(name), text)?;
    }
    Ok(())
}
