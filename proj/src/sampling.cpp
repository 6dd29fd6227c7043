#include "nfde/sampling.hpp"

#include <algorithm>
#include <exception>
#include <cstdlib>
#include <string>
#include <thread>

#include "nfde/errors.hpp"

namespace nfde {

std::vector<TorusPoint> sample_points(const TorusFlow& flow, const OmegaSampling& sampling) {
    if (sampling.grid_per_dim < 0 || sampling.orbit_points < 0) {
        throw StructuralError("sampling: counts must be nonnegative");
    }
    const std::size_t d = flow.dim();
    std::vector<TorusPoint> pts;
    if (sampling.grid_per_dim > 0) {
        std::size_t total = 1;
        for (std::size_t i = 0; i < d; ++i) total *= static_cast<std::size_t>(sampling.grid_per_dim);
        pts.reserve(total + static_cast<std::size_t>(sampling.orbit_points));
        std::vector<int> idx(d, 0);
        for (std::size_t n = 0; n < total; ++n) {
            std::vector<double> theta(d);
            for (std::size_t i = 0; i < d; ++i) theta[i] = static_cast<double>(idx[i]) / sampling.grid_per_dim;
            pts.push_back(TorusPoint{std::move(theta)});
            for (std::size_t i = 0; i < d; ++i) {
                if (++idx[i] < sampling.grid_per_dim) break;
                idx[i] = 0;
            }
        }
    }
    TorusPoint start = sampling.orbit_start.empty() ? flow.origin() : flow.point(sampling.orbit_start);
    for (int k = 0; k < sampling.orbit_points; ++k) {
        pts.push_back(flow.advance(start, k * sampling.orbit_dt));
    }
    if (pts.empty()) throw StructuralError("sampling: no sample points requested");
    return pts;
}

unsigned thread_count() {
    unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("NFDE_THREADS")) {
        try {
            const long v = std::stol(env);
            if (v >= 1) return std::min<unsigned>(static_cast<unsigned>(v), hw);
        } catch (const std::exception&) {
        }
    }
    return hw;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(thread_count(), n));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    const std::size_t chunk = (n + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                const std::size_t lo = w * chunk;
                const std::size_t hi = std::min(n, lo + chunk);
                for (std::size_t i = lo; i < hi; ++i) body(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

}  // namespace nfde
