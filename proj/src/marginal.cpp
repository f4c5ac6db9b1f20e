#include "popsynth/marginal.hpp"

#include "popsynth/csv.hpp"
#include "popsynth/errors.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>

namespace popsynth {

MarginalTable::MarginalTable(SchemaPtr schema, std::string zone_id, std::vector<std::string> attrs)
    : schema_(std::move(schema)), zone_id_(std::move(zone_id)), attr_names_(std::move(attrs)) {
    if (!schema_) throw DataError("marginal: null schema");
    if (attr_names_.empty()) throw DataError("marginal: needs at least one attribute");
    std::size_t n_cells = 1;
    for (const auto &name : attr_names_) {
        const std::size_t idx = schema_->index_of(name);
        if (std::find(attr_idx_.begin(), attr_idx_.end(), idx) != attr_idx_.end())
            throw DataError("marginal: attribute '" + name + "' listed twice");
        attr_idx_.push_back(idx);
        radix_.push_back(schema_->cardinality(idx));
        n_cells *= radix_.back();
    }
    cells_.assign(n_cells, 0);
}

std::size_t MarginalTable::flat_of(const std::vector<std::uint16_t> &tuple) const {
    if (tuple.size() != attr_idx_.size()) throw DataError("marginal: tuple arity mismatch");
    std::size_t flat = 0;
    for (std::size_t k = 0; k < tuple.size(); ++k) {
        if (tuple[k] >= radix_[k]) throw DataError("marginal: tuple code out of range");
        flat = flat * radix_[k] + tuple[k];
    }
    return flat;
}

std::vector<std::uint16_t> MarginalTable::tuple_of(std::size_t flat) const {
    std::vector<std::uint16_t> tuple(attr_idx_.size());
    for (std::size_t k = attr_idx_.size(); k-- > 0;) {
        tuple[k] = static_cast<std::uint16_t>(flat % radix_[k]);
        flat /= radix_[k];
    }
    return tuple;
}

std::size_t MarginalTable::flat_of_row(const Population::Row &row) const {
    std::size_t flat = 0;
    for (std::size_t k = 0; k < attr_idx_.size(); ++k) flat = flat * radix_[k] + row[attr_idx_[k]];
    return flat;
}

void MarginalTable::set_count(const std::vector<std::uint16_t> &tuple, std::int64_t count) {
    if (count < 0) throw DataError("marginal: negative count");
    const std::size_t flat = flat_of(tuple);
    total_ += count - cells_[flat];
    cells_[flat] = count;
}

void MarginalTable::add_count(std::size_t flat, std::int64_t delta) {
    cells_.at(flat) += delta;
    total_ += delta;
    if (cells_[flat] < 0) throw DataError("marginal: count went negative");
}

std::vector<std::string> MarginalTable::tuple_labels(std::size_t flat) const {
    auto tuple = tuple_of(flat);
    std::vector<std::string> labels(tuple.size());
    for (std::size_t k = 0; k < tuple.size(); ++k)
        labels[k] = schema_->label_of(attr_idx_[k], tuple[k]);
    return labels;
}

MarginalTable aggregate_marginals(const Population &pop, const std::vector<std::string> &attrs,
                                  const std::string &zone_id) {
    MarginalTable table(pop.schema_ptr(), zone_id, attrs);
    for (const auto &row : pop.rows()) table.add_count(table.flat_of_row(row), 1);
    return table;
}

std::vector<MarginalTable> parse_marginals(std::istream &in, SchemaPtr schema) {
    auto records = csv::read_all(in);
    if (records.empty()) throw DataError("marginals: missing header row");
    const auto &header = records.front();
    if (header.size() < 3 || header.front() != "zone_id" || header.back() != "count")
        throw DataError("marginals: header must be zone_id,<attrs...>,count");

    std::vector<std::string> attrs(header.begin() + 1, header.end() - 1);
    std::vector<std::size_t> attr_idx;
    for (const auto &name : attrs) attr_idx.push_back(schema->index_of(name));

    std::map<std::string, MarginalTable> tables; // ordered by zone id
    std::map<std::string, std::vector<bool>> seen;
    for (std::size_t r = 1; r < records.size(); ++r) {
        const auto &rec = records[r];
        if (rec.size() != header.size())
            throw DataError("marginals: row " + std::to_string(r) + " has wrong field count");
        const std::string &zone = rec.front();
        auto [it, inserted] = tables.try_emplace(zone, schema, zone, attrs);
        if (inserted) seen.emplace(zone, std::vector<bool>(it->second.n_cells(), false));

        std::vector<std::uint16_t> tuple(attrs.size());
        for (std::size_t k = 0; k < attrs.size(); ++k) {
            auto code = schema->code_of(attr_idx[k], rec[k + 1]);
            if (!code)
                throw DataError("marginals: row " + std::to_string(r) + ": unknown category '" +
                                rec[k + 1] + "' for attribute '" + attrs[k] + "'");
            tuple[k] = *code;
        }
        std::int64_t count = 0;
        try {
            count = std::stoll(rec.back());
        } catch (const std::exception &) {
            throw DataError("marginals: row " + std::to_string(r) + ": bad count '" + rec.back() + "'");
        }
        if (count < 0)
            throw DataError("marginals: row " + std::to_string(r) + ": negative count");
        const std::size_t flat = it->second.flat_of(tuple);
        if (seen[zone][flat])
            throw DataError("marginals: duplicate row for zone '" + zone + "' tuple at row " +
                            std::to_string(r));
        seen[zone][flat] = true;
        it->second.set_count(tuple, count);
    }

    std::vector<MarginalTable> out;
    out.reserve(tables.size());
    for (auto &entry : tables) out.push_back(std::move(entry.second));
    return out;
}

std::vector<MarginalTable> load_marginals(const std::string &path, SchemaPtr schema) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("marginals: cannot open '" + path + "'");
    return parse_marginals(in, std::move(schema));
}

void emit_marginals(const std::vector<MarginalTable> &tables, std::ostream &out) {
    if (tables.empty()) throw DataError("marginals: nothing to emit");
    const auto &attrs = tables.front().attrs();
    for (const auto &t : tables)
        if (t.attrs() != attrs) throw DataError("marginals: mixed attribute sets in one file");

    std::vector<std::string> fields;
    fields.push_back("zone_id");
    fields.insert(fields.end(), attrs.begin(), attrs.end());
    fields.push_back("count");
    csv::write_row(out, fields);

    for (const auto &t : tables) {
        for (std::size_t flat = 0; flat < t.n_cells(); ++flat) {
            // zero cells for empty zones keep the zone present in the file
            if (t.count_at(flat) == 0 && t.total() > 0) continue;
            fields.clear();
            fields.push_back(t.zone_id());
            auto labels = t.tuple_labels(flat);
            fields.insert(fields.end(), labels.begin(), labels.end());
            fields.push_back(std::to_string(t.count_at(flat)));
            csv::write_row(out, fields);
            if (t.total() == 0) break; // single marker row is enough
        }
    }
}

void save_marginals(const std::vector<MarginalTable> &tables, const std::string &path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("marginals: cannot write '" + path + "'");
    emit_marginals(tables, out);
}

} // namespace popsynth
