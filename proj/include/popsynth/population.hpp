#pragma once

#include "popsynth/schema.hpp"

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace popsynth {

enum class Provenance { micro_sample, ground_truth, synthetic, candidate_pool };

const char *to_string(Provenance p);

// A table of agent records over a Schema. Each record holds one category
// code per attribute. Immutable after construction.
class Population {
  public:
    using Row = std::vector<std::uint16_t>;

    // Invalid placeholder; every accessor except is_empty()/size() requires a
    // schema-bearing population.
    Population() = default;
    Population(SchemaPtr schema, std::vector<Row> rows, Provenance provenance);

    static Population empty(SchemaPtr schema, Provenance provenance) {
        return Population(std::move(schema), {}, provenance);
    }

    const SchemaPtr &schema_ptr() const { return schema_; }
    const Schema &schema() const { return *schema_; }
    Provenance provenance() const { return provenance_; }

    std::size_t size() const { return rows_.size(); }
    bool is_empty() const { return rows_.empty(); }
    const std::vector<Row> &rows() const { return rows_; }
    const Row &row(std::size_t i) const { return rows_.at(i); }
    std::uint16_t code(std::size_t row, std::size_t attr) const { return rows_[row][attr]; }
    const std::string &label(std::size_t row, std::size_t attr) const {
        return schema_->label_of(attr, rows_[row][attr]);
    }

  private:
    SchemaPtr schema_;
    std::vector<Row> rows_;
    Provenance provenance_ = Provenance::synthetic;
};

// Header must name a superset of the schema attributes; extra columns are
// ignored and row order is preserved. Empty cells become "NA" where allowed.
Population parse_population(std::istream &in, SchemaPtr schema,
                            Provenance provenance = Provenance::synthetic);
Population load_population(const std::string &path, SchemaPtr schema,
                           Provenance provenance = Provenance::synthetic);

// One column per attribute, in schema order; optional extra leading columns
// (e.g. a zone id) supplied by the caller.
void emit_population(const Population &pop, std::ostream &out);
void save_population(const Population &pop, const std::string &path);

// Rewrites one attribute under a full old->new category mapping. Every old
// category must be mapped and every target must be listed in new_vocab.
// "NA" passes through unchanged when the attribute allows missing values.
Population recode_attribute(const Population &pop, const std::string &attr,
                            const std::map<std::string, std::string> &mapping,
                            const std::vector<std::string> &new_vocab);

} // namespace popsynth
