//! One function per experiment. Each returns the run summary after writing
//! its tables into the output directory.

mod bcl;
mod chain;
mod classical;
mod entanglement;
mod evolve;
mod jointqp;
mod locality;
mod trigger;

use crate::config::ConfigFile;
use crate::report::Summary;
use crate::{CliError, Context, Experiment};

pub fn dispatch(exp: Experiment, cfg: &ConfigFile, ctx: &Context<'_>) -> Result<Summary, CliError> {
    match exp {
        Experiment::MepacketEvolve => evolve::run(&cfg.mepacket_evolve, ctx),
        Experiment::ChainScaling => chain::run(&cfg.chain_scaling, ctx),
        Experiment::BclReport => bcl::run(&cfg.bcl_report, ctx),
        Experiment::TriggerReport => trigger::run(&cfg.trigger_report, ctx),
        Experiment::JointqpConvergence => jointqp::run(&cfg.jointqp_convergence, ctx),
        Experiment::LocalityCheck => locality::run(&cfg.locality_check, ctx),
        Experiment::ClassicalLimitTable => classical::run(&cfg.classical_limit_table, ctx),
        Experiment::EntanglementDemo => entanglement::run(&cfg.entanglement_demo, ctx),
    }
}

/// Output files written so far, relative to the output directory.
#[derive(Default)]
struct Files(Vec<String>);

impl Files {
    fn add(&mut self, ctx: &Context<'_>, name: &str) -> std::path::PathBuf {
        self.0.push(name.to_string());
        ctx.path(name)
    }
}
