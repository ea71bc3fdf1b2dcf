#include "routh/mc.hpp"

#include "routh/constants.hpp"
#include "routh/errors.hpp"
#include "routh/rng.hpp"
#include "routh/special_functions.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>

namespace routh {
namespace {

constexpr std::uint64_t pairs_per_block = 2048;

struct BlockPartial {
    std::vector<double> sum;
    std::vector<double> sumsq;
    std::uint64_t npairs = 0;
};

} // namespace

int resolve_worker_count(int requested)
{
    if (requested > 0)
        return requested;
    if (const char* env = std::getenv("ROUTH_WORKERS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0 && v <= 1024)
            return static_cast<int>(v);
    }
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0)
        hw = 1;
    if (hw > 8)
        hw = 8;
    return static_cast<int>(hw);
}

McResult mc_integrate_halfspace(int n, const std::vector<Bubble>& strata, int out_dim,
                                const McIntegrand& f, const McOptions& opts)
{
    if (n < 5)
        throw validation_error("mc_integrate_halfspace: dimension must satisfy n >= 5");
    if (strata.empty())
        throw validation_error("mc_integrate_halfspace: at least one proposal stratum is required");
    if (out_dim < 1)
        throw validation_error("mc_integrate_halfspace: out_dim must be positive");
    if (opts.samples == 0)
        throw validation_error("mc_integrate_halfspace: samples must be positive");
    for (const Bubble& b : strata) {
        if (b.center.size() != n - 1)
            throw validation_error("mc_integrate_halfspace: stratum center must have n-1 coordinates");
        if (!(b.lambda > 0.0) || !std::isfinite(b.lambda))
            throw validation_error("mc_integrate_halfspace: stratum rate must be positive and finite");
    }

    const std::uint64_t m = strata.size();
    // Pairs are the sampling unit; round the pair count up to a multiple of
    // the stratum count so the round-robin stratum weights are exactly 1/m.
    std::uint64_t npairs = (opts.samples + 1) / 2;
    npairs = ((npairs + m - 1) / m) * m;
    const std::uint64_t nblocks = (npairs + pairs_per_block - 1) / pairs_per_block;

    // Mixture density ingredients: q(x) = sum_j w_j (lambda_j/(1+t_j))^n with
    // w_j = c0^{p+1} / (m S_n), so that q integrates to one on the half-space.
    const double c0 = bubble_c0(n);
    const double c0p1 = std::pow(c0, 2.0 * n / (n - 2));
    const double S_n = closed_form_constants(n).S_n;
    const double w_stratum = c0p1 / (static_cast<double>(m) * S_n);

    std::vector<Eigen::VectorXd> ambient_centers(m);
    for (std::uint64_t j = 0; j < m; ++j) {
        ambient_centers[j] = Eigen::VectorXd::Zero(n);
        ambient_centers[j].head(n - 1) = strata[j].center;
    }

    std::vector<BlockPartial> partials(nblocks);

    auto run_block = [&](std::uint64_t block) {
        BlockPartial part;
        part.sum.assign(out_dim, 0.0);
        part.sumsq.assign(out_dim, 0.0);

        const std::uint64_t first_pair = block * pairs_per_block;
        const std::uint64_t block_pairs = std::min<std::uint64_t>(pairs_per_block, npairs - first_pair);
        part.npairs = block_pairs;

        NormalGen gen(mix_seed(opts.seed, opts.stream_tag, block));

        Eigen::VectorXd x(n);
        Eigen::VectorXd xr(n);
        Eigen::VectorXd dir(n);
        Eigen::VectorXd out1(out_dim);
        Eigen::VectorXd out2(out_dim);

        auto mixture_density = [&](const Eigen::VectorXd& pt) {
            double q = 0.0;
            for (std::uint64_t j = 0; j < m; ++j) {
                double d2 = pt[n - 1] * pt[n - 1];
                for (int k = 0; k < n - 1; ++k) {
                    const double dk = pt[k] - strata[j].center[k];
                    d2 += dk * dk;
                }
                const double lam = strata[j].lambda;
                q += w_stratum * pow_int(lam / (1.0 + lam * lam * d2), n);
            }
            return q;
        };

        for (std::uint64_t k = 0; k < block_pairs; ++k) {
            const std::uint64_t pair_index = first_pair + k;
            const std::uint64_t j = pair_index % m;
            const double lam = strata[j].lambda;

            // Radial draw: |y| = sqrt(t/(1-t)) with t ~ Beta(n/2, n/2),
            // realized as the first-coordinate law of a uniform point on the
            // n-sphere (n+1 standard normals).
            double g1 = 0.0;
            double ss = 0.0;
            for (int a = 0; a <= n; ++a) {
                const double g = gen();
                if (a == 0)
                    g1 = g;
                ss += g * g;
            }
            double t = 0.5 * (1.0 - g1 / std::sqrt(ss));
            if (t > 1.0 - 1e-16)
                t = 1.0 - 1e-16;
            if (t < 0.0)
                t = 0.0;
            const double r = std::sqrt(t / (1.0 - t));

            // Direction: uniform on the upper unit hemisphere.
            double ss2 = 0.0;
            for (int a = 0; a < n; ++a) {
                dir[a] = gen();
                ss2 += dir[a] * dir[a];
            }
            dir /= std::sqrt(ss2);
            dir[n - 1] = std::abs(dir[n - 1]);

            x = ambient_centers[j] + (r / lam) * dir;
            // Antithetic partner: tangential reflection through this
            // stratum's center (leaves its own density invariant).
            xr[n - 1] = x[n - 1];
            for (int a = 0; a < n - 1; ++a)
                xr[a] = 2.0 * strata[j].center[a] - x[a];

            const double q1 = mixture_density(x);
            const double q2 = mixture_density(xr);
            f(x, out1);
            f(xr, out2);

            for (int c = 0; c < out_dim; ++c) {
                const double v = 0.5 * (out1[c] / q1 + out2[c] / q2);
                part.sum[c] += v;
                part.sumsq[c] += v * v;
            }
        }

        partials[block] = std::move(part);
    };

    const int workers = resolve_worker_count(opts.workers);
    if (workers <= 1 || nblocks == 1) {
        for (std::uint64_t b = 0; b < nblocks; ++b)
            run_block(b);
    } else {
        std::atomic<std::uint64_t> next{0};
        std::exception_ptr first_error;
        std::mutex error_mutex;
        auto worker_main = [&]() {
            for (;;) {
                const std::uint64_t b = next.fetch_add(1);
                if (b >= nblocks)
                    return;
                try {
                    run_block(b);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!first_error)
                        first_error = std::current_exception();
                    return;
                }
            }
        };
        std::vector<std::thread> pool;
        const int nthreads = static_cast<int>(std::min<std::uint64_t>(workers, nblocks));
        pool.reserve(nthreads);
        for (int w = 0; w < nthreads; ++w)
            pool.emplace_back(worker_main);
        for (std::thread& th : pool)
            th.join();
        if (first_error)
            std::rethrow_exception(first_error);
    }

    // Combine per-block partials in block order: the result is independent
    // of which worker computed which block.
    std::vector<double> sum(out_dim, 0.0);
    std::vector<double> sumsq(out_dim, 0.0);
    std::uint64_t total_pairs = 0;
    for (std::uint64_t b = 0; b < nblocks; ++b) {
        for (int c = 0; c < out_dim; ++c) {
            sum[c] += partials[b].sum[c];
            sumsq[c] += partials[b].sumsq[c];
        }
        total_pairs += partials[b].npairs;
    }

    McResult res;
    res.npairs = total_pairs;
    res.npoints = 2 * total_pairs;
    res.value = Eigen::VectorXd::Zero(out_dim);
    res.stderr_ = Eigen::VectorXd::Zero(out_dim);
    const double N = static_cast<double>(total_pairs);
    for (int c = 0; c < out_dim; ++c) {
        const double mean = sum[c] / N;
        res.value[c] = mean;
        if (total_pairs > 1) {
            const double var = std::max(0.0, (sumsq[c] - N * mean * mean) / (N - 1.0));
            res.stderr_[c] = std::sqrt(var / N);
        }
        if (!std::isfinite(res.value[c]))
            throw numerical_error("mc_integrate_halfspace: non-finite estimate (component " +
                                  std::to_string(c) + ")");
    }
    return res;
}

} // namespace routh
