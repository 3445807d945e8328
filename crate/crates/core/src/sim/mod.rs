//! Plant simulation, scenarios, closed-loop episodes and campaigns.

mod campaign;
mod episode;
pub mod output;
mod scenario;
mod system;

pub use campaign::{run_campaign, CampaignCell, CampaignResult, EpisodeSummary, Timing};
pub use episode::{
    cell_seed, fixed_quantizers, run_episode, run_episode_on, simulate_truth, RunMetrics, StepRecord, Truth,
};
pub use scenario::{Disturbance, FixedThresholds, InitialBox, Mode, Scenario, SystemSpec, Window};
pub use system::LinearSystem;
