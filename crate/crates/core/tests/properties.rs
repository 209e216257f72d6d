mod support;

use support::*;

#[test]
fn operator_recurrence_round_trip() {
    round_trip(TRIALS).unwrap();
}

#[test]
fn fourier_laplace_sequence_consistency() {
    fl_consistency(TRIALS).unwrap();
}

#[test]
fn polar_dual_is_an_involution() {
    polar_involution(TRIALS).unwrap();
}

#[test]
fn pruned_and_unpruned_sequences_agree() {
    pruning_agreement(TRIALS).unwrap();
}

#[test]
fn planted_relations_are_recovered() {
    planted_relations(TRIALS).unwrap();
}

#[test]
fn constant_shift_preserves_the_limit() {
    constant_shift(TRIALS).unwrap();
}
