//! Buffered states, footsteps and the footprints of pomsets under
//! global-write environments.

pub mod audit;
mod charac;
mod engine;
mod env;
mod footstep;
mod grouped;
mod oracle;
mod state;

pub use charac::{characteristic, differential, Characteristic};
pub use engine::{footprint, footprint_in, FootprintError};
pub use env::{EnvError, EnvItem, WriteEnv};
pub use footstep::{
    action_footprint, env_footprint, env_step, footstep_par, footstep_seq, sorted, unit_set, FootprintCtx, Footstep,
    FootstepSet,
};
pub use grouped::{Grouped, Visibility};
pub use oracle::{footprint_oracle, footprint_oracle_in, ORACLE_NODE_MAX};
pub use state::{consistent, update, zeta, BufferEntry, BufferedState};
