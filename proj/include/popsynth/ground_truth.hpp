#pragma once

#include "popsynth/marginal.hpp"
#include "popsynth/population.hpp"
#include "popsynth/schema.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace popsynth {

struct PairwiseInjection {
    std::string attr_a;
    std::string attr_b;
    double strength = 0.0; // >= 0; 0 keeps independence
};

// Distribution to draw a synthetic world from: either an explicit joint
// probability table over all combinations (canonical cell order, NA slots
// included where allowed) or per-attribute distributions with optional
// pairwise dependency injections.
struct GroundTruthSpec {
    SchemaPtr schema;
    std::vector<double> explicit_joint;           // empty unless explicit form
    std::vector<std::vector<double>> factored;    // per attr, over the vocabulary
    std::vector<PairwiseInjection> injections;
    std::uint64_t population_size = 0;
    std::vector<std::uint64_t> zone_sizes;
    std::uint64_t seed = 0;
    double micro_sample_fraction = 0.1;
    std::vector<std::string> zone_attrs;
};

struct World {
    Population ground_truth;
    Population micro_sample;
    std::vector<MarginalTable> zone_targets;
    std::vector<Population> zone_truths; // aligned with zone_targets
    std::vector<std::string> zone_ids;
    // per ground-truth row: zone index, or npos for rows outside every zone
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);
    std::vector<std::size_t> zone_of_row;
};

// Materialized joint over all combinations (normalized). Bounded to keep the
// dense table desk-sized.
std::vector<double> joint_distribution(const GroundTruthSpec &spec);

// Ground truth drawn i.i.d. from the joint; micro sample is a uniform random
// subset; zones are contiguous blocks of the shuffled ground truth, each
// aggregated exactly over zone_attrs. Fully deterministic given the seed.
World generate_ground_truth(const GroundTruthSpec &spec);

GroundTruthSpec load_ground_truth_spec(const std::string &path);
GroundTruthSpec parse_ground_truth_spec_json(const std::string &text);

} // namespace popsynth
