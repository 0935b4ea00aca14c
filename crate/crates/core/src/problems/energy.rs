use rand::{Rng, RngCore};

use crate::error::{usage, Result};

/// A finite system of `2^bits` states, each with an energy, enumerated
/// exactly so that the density of states is known.
///
/// Proposals flip one uniformly chosen bit, which is symmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteEnergyModel {
    bits: u32,
    level_of_state: Vec<usize>,
    level_energies: Vec<f64>,
    density: Vec<u64>,
}

impl DiscreteEnergyModel {
    pub const MAX_BITS: u32 = 16;

    /// Build from per-state energies. States with equal energy share a level.
    pub fn from_energies(bits: u32, energies: &[f64]) -> Result<Self> {
        if bits == 0 || bits > Self::MAX_BITS {
            return usage(format!(
                "bit count must be in 1..={}, got {bits}",
                Self::MAX_BITS
            ));
        }
        if energies.len() != 1usize << bits {
            return usage("need one energy per state");
        }
        if energies.iter().any(|e| !e.is_finite()) {
            return usage("energies must be finite");
        }
        let mut levels: Vec<f64> = energies.to_vec();
        levels.sort_by(f64::total_cmp);
        levels.dedup();
        let mut density = vec![0u64; levels.len()];
        let level_of_state: Vec<usize> = energies
            .iter()
            .map(|e| {
                let i = levels.partition_point(|l| l < e);
                density[i] += 1;
                i
            })
            .collect();
        Ok(DiscreteEnergyModel {
            bits,
            level_of_state,
            level_energies: levels,
            density,
        })
    }

    /// Ising ladder of `rows × cols` spins, periodic along its length, with
    /// energy `-J Σ s_i s_j` over nearest-neighbour bonds.
    pub fn ising_strip(rows: u32, cols: u32, coupling: f64) -> Result<Self> {
        if rows == 0 || cols < 2 {
            return usage("strip needs at least one row and two columns");
        }
        let bits = rows * cols;
        if bits > Self::MAX_BITS {
            return usage(format!(
                "strip has {bits} sites, at most {} allowed",
                Self::MAX_BITS
            ));
        }
        let site = |r: u32, c: u32| r * cols + c;
        let mut bonds = Vec::new();
        for r in 0..rows {
            for c in 0..cols {
                let right = (c + 1) % cols;
                if cols > 2 || c == 0 {
                    bonds.push((site(r, c), site(r, right)));
                }
                if r + 1 < rows {
                    bonds.push((site(r, c), site(r + 1, c)));
                }
            }
        }
        let energies: Vec<f64> = (0..1u32 << bits)
            .map(|state| {
                let spin = |i: u32| if state >> i & 1 == 1 { 1.0 } else { -1.0 };
                -coupling * bonds.iter().map(|&(i, j)| spin(i) * spin(j)).sum::<f64>()
            })
            .collect();
        Self::from_energies(bits, &energies)
    }

    /// One state at energy 0 and one at energy 1.
    pub fn two_level() -> Self {
        Self::from_energies(1, &[0.0, 1.0]).expect("valid two-level model")
    }

    pub fn n_states(&self) -> usize {
        self.level_of_state.len()
    }

    pub fn n_levels(&self) -> usize {
        self.level_energies.len()
    }

    pub fn level_of(&self, state: usize) -> usize {
        self.level_of_state[state]
    }

    pub fn level_energies(&self) -> &[f64] {
        &self.level_energies
    }

    /// `N(s)`: number of states at each level, lowest energy first.
    pub fn density_of_states(&self) -> &[u64] {
        &self.density
    }

    /// `Z(s) = Σ_{t ≤ s} N(t)`.
    pub fn cumulative_states(&self) -> Vec<u64> {
        self.density
            .iter()
            .scan(0u64, |acc, &n| {
                *acc += n;
                Some(*acc)
            })
            .collect()
    }

    /// Exact prior mass of each level under the uniform measure on states.
    pub fn level_masses(&self) -> Vec<f64> {
        let total = self.n_states() as f64;
        self.density.iter().map(|&n| n as f64 / total).collect()
    }

    pub fn random_state(&self, rng: &mut dyn RngCore) -> usize {
        rng.random_range(0..self.n_states())
    }

    pub fn propose(&self, state: usize, rng: &mut dyn RngCore) -> usize {
        state ^ (1usize << rng.random_range(0..self.bits))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ladder_density_of_states() {
        let m = DiscreteEnergyModel::ising_strip(2, 6, 1.0).unwrap();
        assert_eq!(m.n_states(), 4096);
        assert_eq!(m.density_of_states().iter().sum::<u64>(), 4096);
        assert_eq!(m.level_energies().first(), Some(&-18.0));
        assert_eq!(m.level_energies().last(), Some(&18.0));
        assert_eq!(
            m.density_of_states(),
            &[2, 24, 54, 120, 266, 456, 702, 848, 702, 456, 266, 120, 54, 24, 2]
        );
        assert_eq!(*m.cumulative_states().last().unwrap(), 4096);
    }

    #[test]
    fn two_level_tables() {
        let m = DiscreteEnergyModel::two_level();
        assert_eq!(m.density_of_states(), &[1, 1]);
        assert_eq!(m.cumulative_states(), vec![1, 2]);
    }

    #[test]
    fn rejects_oversized_strip() {
        assert!(DiscreteEnergyModel::ising_strip(3, 6, 1.0).is_err());
    }
}
