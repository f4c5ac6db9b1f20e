#include "popsynth/schema.hpp"

#include "popsynth/errors.hpp"
#include "popsynth/rng.hpp"

#include <fstream>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

namespace popsynth {

Schema::Schema(std::vector<AttributeDef> attributes) : attrs_(std::move(attributes)) {
    if (attrs_.empty()) throw DataError("schema: needs at least one attribute");
    std::unordered_set<std::string> names;
    vocab_.reserve(attrs_.size());
    code_.reserve(attrs_.size());
    for (const auto &attr : attrs_) {
        if (attr.name.empty()) throw DataError("schema: empty attribute name");
        if (!names.insert(attr.name).second)
            throw DataError("schema: duplicate attribute name '" + attr.name + "'");
        if (attr.categories.size() < 2)
            throw DataError("schema: attribute '" + attr.name + "' needs at least 2 categories");
        std::unordered_set<std::string> labels;
        for (const auto &cat : attr.categories) {
            if (cat == kMissingLabel)
                throw DataError("schema: attribute '" + attr.name + "' uses the reserved label '" +
                                kMissingLabel + "'");
            if (!labels.insert(cat).second)
                throw DataError("schema: attribute '" + attr.name + "' duplicates category '" + cat + "'");
        }
        std::vector<std::string> vocab = attr.categories;
        if (attr.allow_missing) vocab.emplace_back(kMissingLabel);
        std::unordered_map<std::string, std::uint16_t> codes;
        for (std::size_t i = 0; i < vocab.size(); ++i)
            codes.emplace(vocab[i], static_cast<std::uint16_t>(i));
        vocab_.push_back(std::move(vocab));
        code_.push_back(std::move(codes));
    }
}

std::optional<std::size_t> Schema::find(const std::string &name) const {
    for (std::size_t i = 0; i < attrs_.size(); ++i)
        if (attrs_[i].name == name) return i;
    return std::nullopt;
}

std::size_t Schema::index_of(const std::string &name) const {
    auto idx = find(name);
    if (!idx) throw DataError("schema: unknown attribute '" + name + "'");
    return *idx;
}

std::optional<std::uint16_t> Schema::code_of(std::size_t attr, const std::string &label) const {
    const auto &codes = code_.at(attr);
    auto it = codes.find(label);
    if (it == codes.end()) return std::nullopt;
    return it->second;
}

const std::string &Schema::label_of(std::size_t attr, std::uint16_t code) const {
    return vocab_.at(attr).at(code);
}

bool Schema::is_missing_code(std::size_t attr, std::uint16_t code) const {
    return attrs_.at(attr).allow_missing &&
           static_cast<std::size_t>(code) + 1 == vocab_[attr].size();
}

std::uint64_t Schema::total_combinations() const {
    std::uint64_t product = 1;
    for (const auto &attr : attrs_) product *= attr.categories.size();
    return product;
}

std::string Schema::canonical_text() const {
    std::ostringstream out;
    for (const auto &attr : attrs_) {
        out << attr.name << '\x1f';
        for (const auto &cat : attr.categories) out << cat << '\x1e';
        out << (attr.allow_missing ? '1' : '0') << '\x1d';
    }
    return out.str();
}

std::uint64_t Schema::fingerprint() const { return fnv1a64(canonical_text()); }

bool Schema::operator==(const Schema &other) const {
    return canonical_text() == other.canonical_text();
}

SchemaPtr parse_schema_json(const std::string &text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception &e) {
        throw DataError(std::string("schema: invalid JSON: ") + e.what());
    }
    if (!doc.contains("attributes") || !doc["attributes"].is_array())
        throw DataError("schema: missing 'attributes' array");
    std::vector<AttributeDef> attrs;
    for (const auto &node : doc["attributes"]) {
        AttributeDef def;
        if (!node.contains("name") || !node.contains("categories"))
            throw DataError("schema: attribute entries need 'name' and 'categories'");
        def.name = node["name"].get<std::string>();
        for (const auto &cat : node["categories"]) def.categories.push_back(cat.get<std::string>());
        def.allow_missing = node.value("allow_missing", false);
        attrs.push_back(std::move(def));
    }
    return std::make_shared<const Schema>(std::move(attrs));
}

SchemaPtr load_schema(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("schema: cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_schema_json(buf.str());
}

std::string schema_to_json(const Schema &schema) {
    nlohmann::json doc;
    doc["attributes"] = nlohmann::json::array();
    for (const auto &attr : schema.attributes()) {
        nlohmann::json node;
        node["name"] = attr.name;
        node["categories"] = attr.categories;
        node["allow_missing"] = attr.allow_missing;
        doc["attributes"].push_back(std::move(node));
    }
    return doc.dump(2);
}

void save_schema(const Schema &schema, const std::string &path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("schema: cannot write '" + path + "'");
    out << schema_to_json(schema) << '\n';
}

} // namespace popsynth
