// runner.hpp
// Dispatches a RunConfig to the protocol and concentration modules with
// seeded determinism. Stochastic commands derive per-trial streams from
// (seed, trial index); trials are reduced in fixed blocks so reports do not
// depend on the worker count.

#pragma once

#include "entsim/report.hpp"

namespace entsim {

Report run(const RunConfig& config, int threads = 1);

} // namespace entsim
