#pragma once

#include "routh/bubbles.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <vector>

namespace routh {

// Deterministic importance-sampled Monte Carlo over the half-space
// {x_n >= 0}.  The proposal density is the stratified bubble mixture
//
//   q(x) = (1/m) sum_j delta_j(x)^{p+1} / S_n,
//
// which integrates to one exactly because each bubble is centered on the
// boundary.  Points are drawn in antithetic pairs: the partner of a point
// drawn from stratum j is its tangential reflection through that stratum's
// center, which leaves delta_j^{p+1} invariant, so the pair average stays
// unbiased under the mixture weights while cancelling the odd part of the
// integrand's noise.
//
// Determinism: work is split into blocks of a fixed number of pairs.  Block
// b consumes only the stream mt19937_64(mix_seed(seed, stream_tag, b)), the
// stratum of a pair depends only on its global index, and the per-block
// partial sums are combined in block order after all workers finish.  The
// result is byte-identical across runs and across worker counts.
struct McOptions {
    std::uint64_t samples = 0;   // requested number of points (pairs count double)
    std::uint64_t seed = 0;
    int workers = 0;             // <= 0: ROUTH_WORKERS env var, else hardware
    std::uint64_t stream_tag = 0; // separates independent estimates under one seed
};

struct McResult {
    Eigen::VectorXd value;   // componentwise integral estimates
    Eigen::VectorXd stderr_; // standard errors (pairs are the sampling unit)
    std::uint64_t npoints = 0;
    std::uint64_t npairs = 0;
};

// Integrand: fills out (size out_dim) with f(x) at an ambient half-space
// point x.  It must be pure (no state), as it is called from worker threads.
using McIntegrand = std::function<void(const Eigen::VectorXd& x, Eigen::VectorXd& out)>;

McResult mc_integrate_halfspace(int n, const std::vector<Bubble>& strata, int out_dim,
                                const McIntegrand& f, const McOptions& opts);

// Effective worker count: `requested` if positive, otherwise the
// ROUTH_WORKERS environment variable, otherwise the hardware concurrency
// (clamped to [1, 8]).
int resolve_worker_count(int requested);

} // namespace routh
