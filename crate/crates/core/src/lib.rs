//! Online advance-reservation scheduling for bulk transfers.
//!
//! * [`netgraph`]: capacitated topologies, parsing and built-in generators.
//! * [`flowsolve`]: max flow, multicommodity feasibility, max concurrent flow.
//! * [`pathdisp`]: widest-path decomposition with a bounded path budget.
//! * [`schedulers`]: Greedy, Greedy-shortest, BatchAll and BatchLim.
//! * [`simcore`]: workload generation and the discrete-event runner.
//! * [`metrics`]: fluid capacity bound and load-sweep aggregation.
//! * [`config`]: JSON experiment configuration.

pub mod config;
pub mod flowsolve;
pub mod metrics;
pub mod netgraph;
pub mod pathdisp;
pub mod schedulers;
pub mod simcore;
pub mod units;
