#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace popsynth {

// Reserved label appended to an attribute's vocabulary when missing values
// are allowed. It never collides with a real category.
inline constexpr const char *kMissingLabel = "NA";

struct AttributeDef {
    std::string name;
    std::vector<std::string> categories; // real categories, "NA" excluded
    bool allow_missing = false;
};

// Ordered dictionary of categorical attributes. The declared category order
// is canonical everywhere: category codes, cell enumeration and histogram
// layouts all follow it. Immutable after construction.
class Schema {
  public:
    explicit Schema(std::vector<AttributeDef> attributes);

    std::size_t attribute_count() const { return attrs_.size(); }
    const std::vector<AttributeDef> &attributes() const { return attrs_; }
    const AttributeDef &attribute(std::size_t idx) const { return attrs_.at(idx); }

    std::optional<std::size_t> find(const std::string &name) const;
    std::size_t index_of(const std::string &name) const; // throws DataError

    // Vocabulary including the trailing "NA" slot where missing is allowed.
    const std::vector<std::string> &vocabulary(std::size_t attr) const { return vocab_[attr]; }
    std::size_t cardinality(std::size_t attr) const { return vocab_[attr].size(); }
    std::size_t real_cardinality(std::size_t attr) const { return attrs_[attr].categories.size(); }

    std::optional<std::uint16_t> code_of(std::size_t attr, const std::string &label) const;
    const std::string &label_of(std::size_t attr, std::uint16_t code) const;
    bool is_missing_code(std::size_t attr, std::uint16_t code) const;

    // Product of real category counts; the "NA" slot never multiplies in.
    std::uint64_t total_combinations() const;

    // Stable textual form used for fingerprints and equality.
    std::string canonical_text() const;
    std::uint64_t fingerprint() const;

    bool operator==(const Schema &other) const;

  private:
    std::vector<AttributeDef> attrs_;
    std::vector<std::vector<std::string>> vocab_;
    std::vector<std::unordered_map<std::string, std::uint16_t>> code_;
};

using SchemaPtr = std::shared_ptr<const Schema>;

// Schema file: JSON {"attributes":[{"name","categories",["allow_missing"]}...]}.
SchemaPtr load_schema(const std::string &path);
SchemaPtr parse_schema_json(const std::string &text);
std::string schema_to_json(const Schema &schema);
void save_schema(const Schema &schema, const std::string &path);

} // namespace popsynth
