//! The build script writes the C header next to the crate; consumers vendor
//! it, so a build must always leave it present and complete.

use std::path::Path;

#[test]
fn generated_header_declares_the_full_surface() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("include")
        .join("dissent.h");
    let header = std::fs::read_to_string(&path)
        .unwrap_or_else(|e| panic!("missing generated header {}: {e}", path.display()));

    for needle in [
        "#ifndef DISSENT_H",
        "typedef struct DissentSystem DissentSystem;",
        "typedef struct DissentCycle DissentCycle;",
        "DissentStatus_Ok = 0",
        "DissentStatus_GuardExceeded = 5",
        "dissent_system_parse",
        "dissent_system_free",
        "dissent_system_vertex_count",
        "dissent_system_init_count",
        "dissent_system_render",
        "dissent_generate_preset",
        "dissent_generate_gk",
        "dissent_run_to_cycle",
        "dissent_cycle_free",
        "dissent_cycle_period",
        "dissent_cycle_transient",
        "dissent_cycle_state",
        "dissent_cycle_hub_sequence",
        "dissent_period_counts",
        "dissent_last_error",
        "dissent_string_free",
    ] {
        assert!(header.contains(needle), "header lacks {needle:?}");
    }

    // Handles stay opaque: no field list for either struct.
    assert!(!header.contains("struct DissentSystem {"));
    assert!(!header.contains("struct DissentCycle {"));
}
