#pragma once

#include "popsynth/nn.hpp"
#include "popsynth/population.hpp"
#include "popsynth/rng.hpp"
#include "popsynth/schema.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace popsynth {

// One-hot layout: one block per attribute, vocabulary order, NA slot
// included where allowed.
struct Encoding {
    SchemaPtr schema;
    std::vector<std::size_t> offset; // per attribute
    std::size_t width = 0;

    static Encoding from_schema(SchemaPtr schema);

    std::vector<std::pair<std::size_t, std::size_t>> heads() const; // (offset, width)

    template <typename T> void encode_row(const Population::Row &row, T *out) const {
        for (std::size_t i = 0; i < width; ++i) out[i] = T(0);
        for (std::size_t a = 0; a < offset.size(); ++a) out[offset[a] + row[a]] = T(1);
    }
    Population::Row decode_argmax(const float *vec) const;
};

// (column, value) condition; encodes to a one-hot of Encoding width.
struct Condition {
    std::size_t attr = 0;
    std::uint16_t value = 0;
};

// Training-by-sampling source: columns uniform, values by log frequency.
class ConditionSampler {
  public:
    explicit ConditionSampler(const Population &pop);

    Condition sample(Rng &rng) const;                 // log-frequency weights
    Condition sample_original(Rng &rng) const;        // raw-frequency weights
    std::size_t sample_row_for(const Condition &cond, Rng &rng) const;
    std::int64_t count(std::size_t attr, std::uint16_t value) const {
        return counts_[attr][value];
    }
    const std::vector<std::vector<std::int64_t>> &counts() const { return counts_; }

  private:
    std::vector<std::vector<std::int64_t>> counts_;
    std::vector<std::vector<double>> log_cdf_;  // per attr, unnormalized cumulative
    std::vector<std::vector<double>> raw_cdf_;
    std::vector<std::vector<std::vector<std::uint32_t>>> rows_by_value_;
};

Condition sample_condition(const Population &training_pop, Rng &rng);

struct TrainConfig {
    int epochs = 400;
    int batch_size = 500;
    int z_dim = 128;
    int hidden = 256;
    double tau = 0.2;
    int pac_size = 10;
    double gp_lambda = 10.0;
    double lr_g = 2e-4;
    double lr_d = 2e-4;
    double beta1 = 0.5;
    double beta2 = 0.9;
    std::uint64_t seed = 0;

    void validate() const;
};

// Persisted generator: parameters, encoding, the config used, per-epoch
// loss trace and the schema fingerprint checked at sampling time.
struct TrainedGenerator {
    SchemaPtr schema;
    Encoding encoding;
    TrainConfig config;
    nn::Generator<float> net;
    std::vector<std::vector<std::int64_t>> category_counts; // training frequencies
    std::vector<std::pair<float, float>> loss_trace;        // (g_loss, d_loss) per epoch
    std::uint64_t schema_fingerprint = 0;

    void save(const std::string &path) const;
    static TrainedGenerator load(const std::string &path);
    void write_loss_csv(std::ostream &out) const;
};

// WGAN-GP training with conditional vectors and training-by-sampling.
// Deterministic given config.seed. Throws NumericError on divergence.
TrainedGenerator train(const Population &micro_sample, const TrainConfig &config);

// n decoded rows; when a condition is given the conditional vector is fixed
// and emitted rows are filtered to satisfy it exactly. max_attempts <= 0
// means the default budget of 1000 generated rows per requested row.
Population generate(const TrainedGenerator &model, std::size_t n,
                    const std::optional<std::pair<std::string, std::string>> &condition,
                    std::uint64_t seed, std::int64_t max_attempts = 0);

// n rows under a fixed conditional vector, without output filtering; callers
// that enforce richer conditions do their own accept/reject accounting.
Population generate_unfiltered(const TrainedGenerator &model, std::size_t n,
                               const std::pair<std::string, std::string> &condition,
                               std::uint64_t seed);

} // namespace popsynth
