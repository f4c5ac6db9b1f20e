#include "popsynth/histogram.hpp"

#include "popsynth/errors.hpp"

#include <algorithm>

namespace popsynth {

CategoricalHistogram::CategoricalHistogram(SchemaPtr schema, std::vector<std::string> attrs)
    : schema_(std::move(schema)), attr_names_(std::move(attrs)) {
    if (!schema_) throw DataError("histogram: null schema");
    if (attr_names_.empty()) throw DataError("histogram: needs at least one attribute");
    std::size_t n = 1;
    for (const auto &name : attr_names_) {
        const std::size_t idx = schema_->index_of(name);
        if (std::find(attr_idx_.begin(), attr_idx_.end(), idx) != attr_idx_.end())
            throw DataError("histogram: attribute '" + name + "' listed twice");
        attr_idx_.push_back(idx);
        radix_.push_back(schema_->cardinality(idx));
        n *= radix_.back();
    }
    bins_.assign(n, 0);
}

CategoricalHistogram CategoricalHistogram::from_population(const Population &pop,
                                                           const std::vector<std::string> &attrs,
                                                           NaMode mode) {
    CategoricalHistogram hist(pop.schema_ptr(), attrs);
    const Schema &schema = pop.schema();
    for (const auto &row : pop.rows()) {
        if (mode == NaMode::exclude) {
            bool has_na = false;
            for (std::size_t idx : hist.attr_idx_)
                if (schema.is_missing_code(idx, row[idx])) {
                    has_na = true;
                    break;
                }
            if (has_na) continue;
        }
        hist.add(hist.flat_of_row(row), 1);
    }
    return hist;
}

std::size_t CategoricalHistogram::observed_bins() const {
    std::size_t n = 0;
    for (auto c : bins_)
        if (c != 0) ++n;
    return n;
}

void CategoricalHistogram::add(std::size_t flat, std::int64_t delta) {
    bins_.at(flat) += delta;
    total_ += delta;
    if (bins_[flat] < 0) throw DataError("histogram: bin went negative");
}

std::size_t CategoricalHistogram::flat_of_row(const Population::Row &row) const {
    std::size_t flat = 0;
    for (std::size_t k = 0; k < attr_idx_.size(); ++k) flat = flat * radix_[k] + row[attr_idx_[k]];
    return flat;
}

std::vector<std::uint16_t> CategoricalHistogram::tuple_of(std::size_t flat) const {
    std::vector<std::uint16_t> tuple(attr_idx_.size());
    for (std::size_t k = attr_idx_.size(); k-- > 0;) {
        tuple[k] = static_cast<std::uint16_t>(flat % radix_[k]);
        flat /= radix_[k];
    }
    return tuple;
}

bool CategoricalHistogram::same_layout(const CategoricalHistogram &other) const {
    return attr_names_ == other.attr_names_ && radix_ == other.radix_ &&
           schema_->fingerprint() == other.schema_->fingerprint();
}

} // namespace popsynth
