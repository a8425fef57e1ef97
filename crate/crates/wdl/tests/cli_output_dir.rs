//! Kept in its own binary: it sets a process-wide environment variable.

use wdl::cli::{execute, EXIT_PASS, OUTPUT_DIR_VAR};

#[test]
fn output_directory_from_environment() {
    let dir = std::env::temp_dir().join(format!("wdl-env-{}", std::process::id()));
    std::env::set_var(OUTPUT_DIR_VAR, &dir);
    let o = execute(["wdl", "schedule", "--family", "square", "--depth", "2", "--format", "md"]);
    std::env::remove_var(OUTPUT_DIR_VAR);
    assert_eq!(o.code, EXIT_PASS, "{}", o.stderr);
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(dir.join("schedule-square-2.md")).unwrap();
    assert!(text.starts_with("| n |"));
    std::fs::remove_dir_all(&dir).unwrap();
}
