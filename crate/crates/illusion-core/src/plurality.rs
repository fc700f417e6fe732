//! The multi-colour generalisation: plurality winners, plurality-illusion
//! detection, and the thirteen-node separating example that admits a full
//! plurality illusion with three colours but no binary majority illusion.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::fraction::Fraction;
use crate::network::{Colour, Labelling, SocialNetwork};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PluralityError {
    #[error("palette size must be at least 2, got {0}")]
    PaletteTooSmall(u32),
    #[error("colour {0} is outside palette of size {1}")]
    ColourOutOfPalette(u32, u32),
    #[error("labelling has {0} entries but the network has {1} nodes")]
    SizeMismatch(usize, usize),
    #[error("palette has {0} colours; a binary labelling needs exactly 2")]
    NotBinary(u32),
}

/// Total assignment of palette colours (0-based) to nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiLabelling {
    colours: Vec<u32>,
    palette_size: u32,
}

impl MultiLabelling {
    pub fn new(colours: Vec<u32>, palette_size: u32) -> Result<Self, PluralityError> {
        if palette_size < 2 {
            return Err(PluralityError::PaletteTooSmall(palette_size));
        }
        if let Some(&bad) = colours.iter().find(|&&c| c >= palette_size) {
            return Err(PluralityError::ColourOutOfPalette(bad, palette_size));
        }
        Ok(MultiLabelling { colours, palette_size })
    }

    pub fn len(&self) -> usize {
        self.colours.len()
    }

    pub fn is_empty(&self) -> bool {
        self.colours.is_empty()
    }

    pub fn palette_size(&self) -> u32 {
        self.palette_size
    }

    pub fn colour(&self, i: usize) -> u32 {
        self.colours[i]
    }

    pub fn colours(&self) -> &[u32] {
        &self.colours
    }

    pub fn from_binary(lab: &Labelling) -> MultiLabelling {
        let colours = lab
            .colours()
            .iter()
            .map(|&c| if c == Colour::Red { 1 } else { 0 })
            .collect();
        MultiLabelling { colours, palette_size: 2 }
    }

    /// Interprets palette colours 0 and 1 as blue and red.
    pub fn to_binary(&self) -> Result<Labelling, PluralityError> {
        if self.palette_size != 2 {
            return Err(PluralityError::NotBinary(self.palette_size));
        }
        Ok(Labelling::new(
            self.colours
                .iter()
                .map(|&c| if c == 1 { Colour::Red } else { Colour::Blue })
                .collect(),
        ))
    }
}

/// Illusion report under plurality semantics: a node is under illusion iff
/// the global plurality winner and its neighbourhood plurality winner both
/// exist and differ.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PluralityReport {
    pub global_winner: Option<u32>,
    pub per_node_local_winner: Vec<Option<u32>>,
    pub under_illusion: BTreeSet<usize>,
    pub illuded_count: usize,
    pub fraction: Fraction,
}

fn unique_argmax(counts: &[usize]) -> Option<u32> {
    let max = *counts.iter().max()?;
    if max == 0 {
        return None;
    }
    let mut winners = counts.iter().enumerate().filter(|&(_, &c)| c == max);
    let first = winners.next()?.0 as u32;
    if winners.next().is_some() {
        None
    } else {
        Some(first)
    }
}

/// The unique most popular colour overall, if any.
pub fn plurality_winner(sn: &SocialNetwork, ml: &MultiLabelling) -> Result<Option<u32>, PluralityError> {
    check_sizes(sn, ml)?;
    let mut counts = vec![0usize; ml.palette_size as usize];
    for &c in ml.colours() {
        counts[c as usize] += 1;
    }
    Ok(unique_argmax(&counts))
}

/// The unique most popular colour in `i`'s open neighbourhood, if any.
pub fn local_plurality_winner(
    sn: &SocialNetwork,
    ml: &MultiLabelling,
    i: usize,
) -> Result<Option<u32>, PluralityError> {
    check_sizes(sn, ml)?;
    let mut counts = vec![0usize; ml.palette_size as usize];
    for j in sn.neighbours(i) {
        counts[ml.colour(j) as usize] += 1;
    }
    Ok(unique_argmax(&counts))
}

fn check_sizes(sn: &SocialNetwork, ml: &MultiLabelling) -> Result<(), PluralityError> {
    if ml.len() != sn.node_count() {
        return Err(PluralityError::SizeMismatch(ml.len(), sn.node_count()));
    }
    Ok(())
}

pub fn plurality_illusion_report(
    sn: &SocialNetwork,
    ml: &MultiLabelling,
) -> Result<PluralityReport, PluralityError> {
    check_sizes(sn, ml)?;
    let n = sn.node_count();
    let global_winner = plurality_winner(sn, ml)?;
    let mut local = Vec::with_capacity(n);
    let mut under = BTreeSet::new();
    for i in 0..n {
        let lw = local_plurality_winner(sn, ml, i)?;
        if let (Some(g), Some(l)) = (global_winner, lw) {
            if g != l {
                under.insert(i);
            }
        }
        local.push(lw);
    }
    let fraction = Fraction::ratio(under.len(), n.max(1)).expect("counts fit");
    Ok(PluralityReport {
        global_winner,
        per_node_local_winner: local,
        illuded_count: under.len(),
        under_illusion: under,
        fraction,
    })
}

/// The thirteen-node, three-colour separating example: a 4-clique of two
/// red and two green nodes with a blue pendant each, next to a green-centred
/// star with one blue, two red, and one green leaf.
///
/// Colours: 0 = blue (5 nodes), 1 = red (4), 2 = green (4). The builder
/// asserts the full plurality illusion; the companion claim that no binary
/// labelling induces a full majority illusion is covered by tests.
pub fn separating_example() -> (SocialNetwork, MultiLabelling) {
    let edges = [
        // left 4-clique: 0, 1 red; 2, 3 green
        (0, 1),
        (0, 2),
        (0, 3),
        (1, 2),
        (1, 3),
        (2, 3),
        // blue pendants
        (0, 4),
        (1, 5),
        (2, 6),
        (3, 7),
        // right star: centre 8 green; leaves 9 blue, 10, 11 red, 12 green
        (8, 9),
        (8, 10),
        (8, 11),
        (8, 12),
    ];
    let sn = SocialNetwork::from_edges(13, &edges).expect("fixed wiring is valid");
    let colours = vec![1, 1, 2, 2, 0, 0, 0, 0, 2, 0, 1, 1, 2];
    let ml = MultiLabelling::new(colours, 3).expect("palette fits");

    let report = plurality_illusion_report(&sn, &ml).expect("sizes match");
    assert_eq!(report.global_winner, Some(0), "blue must win the global plurality");
    assert_eq!(report.illuded_count, 13, "every node must be under plurality illusion");
    (sn, ml)
}
