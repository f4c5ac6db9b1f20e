#pragma once

#include "popsynth/population.hpp"
#include "popsynth/schema.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace popsynth {

// Target counts over one attribute combination for one zone. Cells span the
// full cartesian product of the conditioning attributes' vocabularies in
// canonical order (first attribute most significant); absent tuples count 0.
class MarginalTable {
  public:
    MarginalTable(SchemaPtr schema, std::string zone_id, std::vector<std::string> attrs);

    const SchemaPtr &schema_ptr() const { return schema_; }
    const Schema &schema() const { return *schema_; }
    const std::string &zone_id() const { return zone_id_; }
    const std::vector<std::string> &attrs() const { return attr_names_; }
    const std::vector<std::size_t> &attr_indices() const { return attr_idx_; }

    std::size_t n_cells() const { return cells_.size(); }
    std::int64_t count_at(std::size_t flat) const { return cells_.at(flat); }
    std::int64_t total() const { return total_; }

    // mixed-radix addressing over the conditioning attributes
    std::size_t flat_of(const std::vector<std::uint16_t> &tuple) const;
    std::vector<std::uint16_t> tuple_of(std::size_t flat) const;
    std::size_t flat_of_row(const Population::Row &row) const;

    void set_count(const std::vector<std::uint16_t> &tuple, std::int64_t count);
    void add_count(std::size_t flat, std::int64_t delta);

    std::vector<std::string> tuple_labels(std::size_t flat) const;

  private:
    SchemaPtr schema_;
    std::string zone_id_;
    std::vector<std::string> attr_names_;
    std::vector<std::size_t> attr_idx_;
    std::vector<std::size_t> radix_;
    std::vector<std::int64_t> cells_;
    std::int64_t total_ = 0;
};

// Exact joint frequency of `attrs` in `pop`; total equals the row count.
MarginalTable aggregate_marginals(const Population &pop, const std::vector<std::string> &attrs,
                                  const std::string &zone_id = "");

// Long format: zone_id,<attr columns...>,count. One table per distinct zone,
// ordered by zone id. Duplicate (zone, tuple) rows and negative counts are
// rejected.
std::vector<MarginalTable> parse_marginals(std::istream &in, SchemaPtr schema);
std::vector<MarginalTable> load_marginals(const std::string &path, SchemaPtr schema);

void emit_marginals(const std::vector<MarginalTable> &tables, std::ostream &out);
void save_marginals(const std::vector<MarginalTable> &tables, const std::string &path);

} // namespace popsynth
