#pragma once

#include "popsynth/marginal.hpp"
#include "popsynth/population.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace popsynth {

// Candidate-to-cell incidence for each tabulation of a zone. Every candidate
// falls in exactly one cell of each tabulation, so the 0/1 matrix is stored
// as one cell index per candidate.
class AttributeMatrix {
  public:
    struct Tabulation {
        std::vector<std::size_t> attr_idx;
        std::vector<std::uint32_t> cell_of;  // per candidate
        std::vector<std::int64_t> expected;  // per cell (E_ki)
        std::int64_t target_total = 0;       // N_k
        double chi2_crit = 0.0;              // C_k, 5% critical value, df = cells-1
    };

    static AttributeMatrix build(const Population &pool, const std::vector<MarginalTable> &targets);

    std::size_t tabulation_count() const { return tabs_.size(); }
    std::size_t pool_size() const { return pool_size_; }
    const Tabulation &tabulation(std::size_t k) const { return tabs_.at(k); }
    bool indicator(std::size_t k, std::size_t cell, std::size_t candidate) const {
        return tabs_.at(k).cell_of.at(candidate) == cell;
    }

    // Synthetic cell counts Ax for tabulation k under a replication vector.
    std::vector<std::int64_t> counts(const std::vector<std::int64_t> &x, std::size_t k) const;

  private:
    std::vector<Tabulation> tabs_;
    std::size_t pool_size_ = 0;
};

// Replications x_i per pool candidate; sum(x) equals the target total N.
struct SelectionVector {
    std::vector<std::int64_t> x;
    std::int64_t total = 0;
};

struct FbscoConfig {
    std::uint64_t max_iterations = 100000; // proposal batches per restart
    double rssz_threshold = 1.0;
    int restarts = 5;
    std::uint64_t seed = 0;
    int moves_per_iteration = 64;
    bool record_trace = false;
    // local-optimality handling: exhaustive certification for small pools,
    // stall cutoff for large ones
    std::size_t full_scan_limit = 512;
    int stall_limit = 256;
};

struct FbscoResult {
    SelectionVector selection;
    double rssz = 0.0;
    bool converged = false;
    bool no_population = false;
    std::uint64_t iterations_used = 0;
    std::vector<std::pair<std::uint64_t, double>> trace; // (iteration, rssz) per accepted move
};

// Relative sum of squared Z scores of the selection against the targets.
double rssz(const SelectionVector &selection, const AttributeMatrix &A,
            const std::vector<MarginalTable> &targets);

// Seeded start: N candidates drawn uniformly with replacement.
SelectionVector initialize(const Population &pool, const std::vector<MarginalTable> &targets,
                           std::uint64_t seed);

// Greedy first-improvement swap search (decrement one positive x_i,
// increment another) with restarts; the sum constraint holds after every
// move. Deterministic given the seed.
FbscoResult optimize(const Population &pool, const std::vector<MarginalTable> &targets,
                     const FbscoConfig &config);

// Synthetic population with candidate i repeated x_i times, pool order,
// repeats adjacent.
Population materialize(const SelectionVector &selection, const Population &pool);

} // namespace popsynth
