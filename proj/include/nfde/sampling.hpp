#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "nfde/base_flow.hpp"

namespace nfde {

/// How suprema over the base space are estimated: a uniform grid on the torus
/// plus points along one long orbit (dense by minimality).
struct OmegaSampling {
    int grid_per_dim = 64;
    int orbit_points = 512;
    double orbit_dt = 0.7548776662466927;
    std::vector<double> orbit_start;  // empty: the torus origin
};

std::vector<TorusPoint> sample_points(const TorusFlow& flow, const OmegaSampling& sampling);

/// Worker count from NFDE_THREADS, capped by the hardware; at least 1.
unsigned thread_count();

/// Runs body(i) for i in [0, n), split into contiguous chunks over worker threads.
/// Bodies must only write to slot i of caller-owned storage.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace nfde
