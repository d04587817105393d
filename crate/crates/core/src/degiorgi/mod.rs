//! Level-set truncations, the energies of the De Giorgi iteration, and the
//! inequalities the iteration and the oscillation argument rest on.

mod cordoba;
mod isoperimetric;
mod levels;
mod local_energy;
mod quadrature;

pub use cordoba::{cordoba_check, ConvexFn, CordobaReport};
pub use isoperimetric::{
    change_of_variables_check, default_p, isoperimetric_check, weighted_set_measures, BoxSample, BoxSpec,
    IsoperimetricReport, WeightedSets,
};
pub use levels::{
    interpolation_check, interpolation_ratio, level_energy_sequence, level_set_energy_check, linf_decay_check,
    truncate, InterpolationReport, LevelEnergyReport, LevelSetFamily, LinfDecayReport, DIM, LEVEL_CONVERGENCE,
};
pub use local_energy::{local_energy_check, EtaSpec, LocalEnergyReport};
