#[path = "support/props.rs"]
mod props;

#[test]
fn smith_forms_reconstruct() {
    props::smith_forms_reconstruct();
}

#[test]
fn complement_forms_are_negatives() {
    props::complement_forms_are_negatives();
}

#[test]
fn short_vectors_match_box_oracle() {
    props::short_vectors_match_box_oracle();
}

#[test]
fn ade_round_trip() {
    props::ade_round_trip();
}
