#include "popsynth/population.hpp"

#include "popsynth/csv.hpp"
#include "popsynth/errors.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace popsynth {

const char *to_string(Provenance p) {
    switch (p) {
    case Provenance::micro_sample: return "micro_sample";
    case Provenance::ground_truth: return "ground_truth";
    case Provenance::synthetic: return "synthetic";
    case Provenance::candidate_pool: return "candidate_pool";
    }
    return "synthetic";
}

Population::Population(SchemaPtr schema, std::vector<Row> rows, Provenance provenance)
    : schema_(std::move(schema)), rows_(std::move(rows)), provenance_(provenance) {
    if (!schema_) throw DataError("population: null schema");
    const std::size_t n_attrs = schema_->attribute_count();
    for (const auto &row : rows_) {
        if (row.size() != n_attrs) throw DataError("population: row arity mismatch");
        for (std::size_t a = 0; a < n_attrs; ++a)
            if (row[a] >= schema_->cardinality(a))
                throw DataError("population: code out of range for attribute '" +
                                schema_->attribute(a).name + "'");
    }
}

Population parse_population(std::istream &in, SchemaPtr schema, Provenance provenance) {
    auto records = csv::read_all(in);
    if (records.empty()) throw DataError("population: missing header row");
    const auto &header = records.front();
    const std::size_t n_attrs = schema->attribute_count();

    // column position of each schema attribute in the file
    std::vector<std::size_t> col_of(n_attrs);
    for (std::size_t a = 0; a < n_attrs; ++a) {
        const auto &name = schema->attribute(a).name;
        bool found = false;
        for (std::size_t c = 0; c < header.size(); ++c) {
            if (header[c] == name) {
                col_of[a] = c;
                found = true;
                break;
            }
        }
        if (!found) throw DataError("population: missing required column '" + name + "'");
    }

    std::vector<Population::Row> rows;
    rows.reserve(records.size() - 1);
    for (std::size_t r = 1; r < records.size(); ++r) {
        const auto &rec = records[r];
        Population::Row row(n_attrs);
        for (std::size_t a = 0; a < n_attrs; ++a) {
            if (col_of[a] >= rec.size())
                throw DataError("population: row " + std::to_string(r) + " is too short");
            const std::string &value = rec[col_of[a]];
            const auto &def = schema->attribute(a);
            if (value.empty()) {
                if (!def.allow_missing)
                    throw DataError("population: row " + std::to_string(r) + ": empty value for '" +
                                    def.name + "' which does not allow missing");
                row[a] = static_cast<std::uint16_t>(schema->cardinality(a) - 1);
                continue;
            }
            auto code = schema->code_of(a, value);
            if (!code)
                throw DataError("population: row " + std::to_string(r) + ": unknown category '" +
                                value + "' for attribute '" + def.name + "'");
            row[a] = *code;
        }
        rows.push_back(std::move(row));
    }
    return Population(std::move(schema), std::move(rows), provenance);
}

Population load_population(const std::string &path, SchemaPtr schema, Provenance provenance) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("population: cannot open '" + path + "'");
    return parse_population(in, std::move(schema), provenance);
}

void emit_population(const Population &pop, std::ostream &out) {
    const auto &schema = pop.schema();
    std::vector<std::string> fields;
    fields.reserve(schema.attribute_count());
    for (const auto &attr : schema.attributes()) fields.push_back(attr.name);
    csv::write_row(out, fields);
    for (std::size_t r = 0; r < pop.size(); ++r) {
        fields.clear();
        for (std::size_t a = 0; a < schema.attribute_count(); ++a) fields.push_back(pop.label(r, a));
        csv::write_row(out, fields);
    }
}

void save_population(const Population &pop, const std::string &path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("population: cannot write '" + path + "'");
    emit_population(pop, out);
}

Population recode_attribute(const Population &pop, const std::string &attr,
                            const std::map<std::string, std::string> &mapping,
                            const std::vector<std::string> &new_vocab) {
    const Schema &schema = pop.schema();
    const std::size_t target = schema.index_of(attr);
    const auto &def = schema.attribute(target);

    std::map<std::string, std::uint16_t> new_code;
    for (std::size_t i = 0; i < new_vocab.size(); ++i)
        new_code.emplace(new_vocab[i], static_cast<std::uint16_t>(i));

    // code translation over the full vocabulary (incl. the NA slot)
    std::vector<std::uint16_t> translate(schema.cardinality(target));
    for (std::size_t c = 0; c < def.categories.size(); ++c) {
        auto it = mapping.find(def.categories[c]);
        if (it == mapping.end())
            throw DataError("recode: mapping misses category '" + def.categories[c] + "'");
        auto code = new_code.find(it->second);
        if (code == new_code.end())
            throw DataError("recode: target '" + it->second + "' is not in the new vocabulary");
        translate[c] = code->second;
    }
    if (def.allow_missing)
        translate[def.categories.size()] = static_cast<std::uint16_t>(new_vocab.size());

    std::vector<AttributeDef> attrs = schema.attributes();
    attrs[target] = AttributeDef{attr, new_vocab, def.allow_missing};
    auto new_schema = std::make_shared<const Schema>(std::move(attrs));

    std::vector<Population::Row> rows = pop.rows();
    for (auto &row : rows) row[target] = translate[row[target]];
    return Population(std::move(new_schema), std::move(rows), pop.provenance());
}

} // namespace popsynth
