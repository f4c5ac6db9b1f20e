#pragma once

#include "popsynth/population.hpp"
#include "popsynth/schema.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace popsynth {

enum class NaMode {
    include, // "NA" participates as a normal category
    exclude  // rows with "NA" in the histogram's attributes are dropped
};

// Joint frequency table over an ordered attribute subset. Bins span the full
// cartesian product of the attributes' vocabularies in canonical order.
class CategoricalHistogram {
  public:
    CategoricalHistogram(SchemaPtr schema, std::vector<std::string> attrs);

    static CategoricalHistogram from_population(const Population &pop,
                                                const std::vector<std::string> &attrs,
                                                NaMode mode = NaMode::include);

    const Schema &schema() const { return *schema_; }
    const std::vector<std::string> &attrs() const { return attr_names_; }
    const std::vector<std::size_t> &attr_indices() const { return attr_idx_; }

    std::size_t n_bins() const { return bins_.size(); }
    std::int64_t count_at(std::size_t flat) const { return bins_.at(flat); }
    std::int64_t total() const { return total_; }
    double frequency_at(std::size_t flat) const {
        return total_ > 0 ? static_cast<double>(bins_[flat]) / static_cast<double>(total_) : 0.0;
    }
    std::size_t observed_bins() const;

    void add(std::size_t flat, std::int64_t delta);
    std::size_t flat_of_row(const Population::Row &row) const;
    std::vector<std::uint16_t> tuple_of(std::size_t flat) const;

    bool same_layout(const CategoricalHistogram &other) const;

  private:
    SchemaPtr schema_;
    std::vector<std::string> attr_names_;
    std::vector<std::size_t> attr_idx_;
    std::vector<std::size_t> radix_;
    std::vector<std::int64_t> bins_;
    std::int64_t total_ = 0;
};

} // namespace popsynth
