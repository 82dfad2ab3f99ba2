//! Randomized property suites, 1000 cases each.

mod props;

fn suite(name: &str) {
    let (_, f) = props::SUITES
        .iter()
        .find(|(n, _)| *n == name)
        .expect("known suite");
    f();
}

#[test]
fn substitution_lemma() {
    suite("substitution_lemma");
}

#[test]
fn pinned_binder_matches_substitution() {
    suite("pinned_binder_matches_substitution");
}

#[test]
fn sub_base_cover() {
    suite("sub_base_cover");
}

#[test]
fn sub_base_over() {
    suite("sub_base_over");
}

#[test]
fn existential_vc_matches_search() {
    suite("existential_vc_matches_search");
}

#[test]
fn anf_preserves_outcomes() {
    suite("anf_preserves_outcomes");
}

#[test]
fn desugar_preserves_outcomes() {
    suite("desugar_preserves_outcomes");
}

#[test]
fn window_monotonicity() {
    suite("window_monotonicity");
}
