//! Small hand-built networks used across tests and the CLI examples.

use crate::network::{Colour, Labelling, LabelledNetwork, SocialNetwork};

/// The nine-node example of a well-placed red minority seen as a majority
/// by everyone: a red 4-clique with five blue nodes attached so that every
/// neighbourhood, including the clique's own, shows a strict red majority
/// while blue wins globally 5 to 4.
///
/// The attachment is pinned by that property: clique nodes 0 and 1 share
/// two blue neighbours (one more each would tie them), nodes 2 and 3 take
/// the remaining pendants.
pub fn minority_fixture() -> LabelledNetwork {
    let edges = [
        // red 4-clique
        (0, 1),
        (0, 2),
        (0, 3),
        (1, 2),
        (1, 3),
        (2, 3),
        // blue attachments
        (4, 2),
        (5, 6),
        (5, 0),
        (5, 1),
        (6, 0),
        (6, 1),
        (7, 3),
        (8, 3),
    ];
    let sn = SocialNetwork::from_edges(9, &edges).expect("fixed wiring is valid");
    let mut lab = Labelling::uniform(9, Colour::Blue);
    for red in 0..4 {
        lab.set(red, Colour::Red);
    }
    LabelledNetwork::new(sn, lab).expect("sizes match")
}

/// Five nodes with exactly one under illusion: a blue centre adjacent to
/// two red leaves, plus a disjoint blue edge.
pub fn single_illuded_example() -> LabelledNetwork {
    let sn = SocialNetwork::from_edges(5, &[(0, 1), (0, 2), (3, 4)]).expect("valid");
    let mut lab = Labelling::uniform(5, Colour::Blue);
    lab.set(1, Colour::Red);
    lab.set(2, Colour::Red);
    LabelledNetwork::new(sn, lab).expect("sizes match")
}
