#![allow(dead_code)]

use knotforge::moves::MoveKind;
use knotforge::walker::{ScriptedSource, WalkState};

/// A state reduced to what the energy sees: `(n, N1, N2)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Profile(pub usize, pub usize, pub usize);

impl WalkState for Profile {
    fn crossings(&self) -> usize {
        self.0
    }

    fn small_faces(&self) -> (usize, usize) {
        (self.1, self.2)
    }
}

pub const WORKED_EXAMPLE_ENERGIES: [f64; 11] = [0.15, 0.15, 0.75, 0.25, 0.25, 0.25, 0.25, 0.25, 0.25, 0.85, 0.35];

/// The ten-step trefoil walk: proposals, candidate profiles (None = no
/// applicable site) and uniform draws. Steps with acceptance probability 1
/// still consume a draw; any value accepts, 0.5 is used.
pub fn worked_example_script() -> ScriptedSource<Profile> {
    use MoveKind::*;
    let steps: [(MoveKind, Option<Profile>, Option<f64>); 10] = [
        (R1Plus, Some(Profile(4, 1, 0)), Some(0.62)),
        (R2Plus, Some(Profile(5, 0, 1)), Some(0.18)),
        (R3, Some(Profile(5, 0, 0)), Some(0.5)),
        (R2Plus, Some(Profile(7, 0, 1)), Some(0.71)),
        (R3, Some(Profile(5, 0, 0)), Some(0.5)),
        (R1Plus, Some(Profile(6, 1, 0)), Some(0.91)),
        (R1Minus, None, None),
        (R3, Some(Profile(5, 0, 0)), Some(0.5)),
        (R2Plus, Some(Profile(7, 0, 1)), Some(0.34)),
        (R3, Some(Profile(7, 0, 0)), Some(0.5)),
    ];
    ScriptedSource {
        length: 10,
        kinds: steps.iter().map(|s| s.0).collect(),
        candidates: steps.iter().map(|s| s.1).collect(),
        draws: steps.iter().filter_map(|s| s.2).collect(),
    }
}
