#include "popsynth/metrics.hpp"

#include "popsynth/csv.hpp"
#include "popsynth/errors.hpp"

#include <cmath>
#include <ostream>
#include <set>
#include <sstream>

namespace popsynth {

namespace {

std::string fmt(double v) {
    std::ostringstream out;
    out.precision(12);
    out << v;
    return out.str();
}

} // namespace

double tvd(const CategoricalHistogram &real_hist, const CategoricalHistogram &synth_hist) {
    if (!real_hist.same_layout(synth_hist)) throw DataError("tvd: attribute mismatch");
    if (real_hist.total() == 0 || synth_hist.total() == 0)
        throw DataError("tvd: zero-total histogram");
    double sum = 0.0;
    for (std::size_t i = 0; i < real_hist.n_bins(); ++i)
        sum += std::abs(real_hist.frequency_at(i) - synth_hist.frequency_at(i));
    return 0.5 * sum;
}

double tvc(const CategoricalHistogram &real_hist, const CategoricalHistogram &synth_hist) {
    return 1.0 - tvd(real_hist, synth_hist);
}

double category_adherence(const Population &real_pop, const Population &synth_pop,
                          const std::string &attr, NaMode mode) {
    const Schema &schema = synth_pop.schema();
    const std::size_t idx = schema.index_of(attr);
    if (real_pop.schema().fingerprint() != schema.fingerprint())
        throw DataError("category_adherence: schema mismatch");

    std::set<std::uint16_t> real_values;
    for (const auto &row : real_pop.rows()) {
        if (mode == NaMode::exclude && schema.is_missing_code(idx, row[idx])) continue;
        real_values.insert(row[idx]);
    }
    std::int64_t adherent = 0, considered = 0;
    for (const auto &row : synth_pop.rows()) {
        if (mode == NaMode::exclude && schema.is_missing_code(idx, row[idx])) continue;
        ++considered;
        if (real_values.count(row[idx])) ++adherent;
    }
    if (considered == 0) throw DataError("category_adherence: empty synthetic column");
    return static_cast<double>(adherent) / static_cast<double>(considered);
}

double srmse(const CategoricalHistogram &real_hist, const CategoricalHistogram &synth_hist,
             std::uint64_t n_bins) {
    if (!real_hist.same_layout(synth_hist)) throw DataError("srmse: attribute mismatch");
    if (real_hist.total() == 0) throw DataError("srmse: zero-total real histogram");
    if (n_bins == 0) throw DataError("srmse: n_bins must be positive");

    std::uint64_t observed = 0;
    for (std::size_t i = 0; i < real_hist.n_bins(); ++i)
        if (real_hist.count_at(i) != 0 || synth_hist.count_at(i) != 0) ++observed;
    if (n_bins < observed)
        throw DataError("srmse: n_bins smaller than observed distinct tuples");

    double sq = 0.0;
    for (std::size_t i = 0; i < real_hist.n_bins(); ++i) {
        const double d = real_hist.frequency_at(i) - synth_hist.frequency_at(i);
        sq += d * d;
    }
    const double nb = static_cast<double>(n_bins);
    const double rmse = std::sqrt(sq / nb);
    const double mean_freq = 1.0 / nb; // frequencies sum to 1
    return rmse / mean_freq;
}

double r_squared(const std::vector<std::pair<double, double>> &pairs) {
    if (pairs.size() < 2) throw DataError("r_squared: needs at least 2 pairs");
    double mean_real = 0.0;
    for (const auto &[r, s] : pairs) mean_real += r;
    mean_real /= static_cast<double>(pairs.size());

    double ss_res = 0.0, ss_tot = 0.0;
    for (const auto &[r, s] : pairs) {
        ss_res += (s - r) * (s - r);
        ss_tot += (r - mean_real) * (r - mean_real);
    }
    if (ss_tot == 0.0) throw DataError("r_squared: degenerate variance in real counts");
    return 1.0 - ss_res / ss_tot;
}

const AttributeScores &MetricReport::scores(const std::string &attr) const {
    for (const auto &entry : per_attribute)
        if (entry.first == attr) return entry.second;
    throw DataError("metric report: no attribute '" + attr + "'");
}

void MetricReport::to_csv(std::ostream &out) const {
    csv::write_row(out, {"name", "tvc", "ca", "pct_na", "srmse", "k", "n_bins"});
    for (const auto &[name, scores] : per_attribute)
        csv::write_row(out, {name, fmt(scores.tvc), fmt(scores.ca), fmt(scores.pct_na), "", "", ""});
    csv::write_row(out, {"(joint)", "", "", "", fmt(srmse), std::to_string(k), std::to_string(n_bins)});
    for (const auto &[key, value] : extras)
        csv::write_row(out, {"extra:" + key, "", "", "", fmt(value), "", ""});
}

MetricReport evaluate(const Population &real_pop, const Population &synth_pop,
                      const std::vector<std::string> &conditioned_attrs,
                      const std::vector<std::string> &joint_attrs, NaMode mode) {
    const Schema &schema = real_pop.schema();
    if (schema.fingerprint() != synth_pop.schema().fingerprint())
        throw DataError("evaluate: schema mismatch");

    MetricReport report;
    for (std::size_t a = 0; a < schema.attribute_count(); ++a) {
        const std::string &name = schema.attribute(a).name;
        auto rh = CategoricalHistogram::from_population(real_pop, {name}, mode);
        auto sh = CategoricalHistogram::from_population(synth_pop, {name}, mode);
        AttributeScores scores;
        scores.tvc = tvc(rh, sh);
        scores.ca = category_adherence(real_pop, synth_pop, name, mode);
        std::int64_t na = 0;
        for (const auto &row : real_pop.rows())
            if (schema.is_missing_code(a, row[a])) ++na;
        scores.pct_na =
            real_pop.size() > 0 ? static_cast<double>(na) / static_cast<double>(real_pop.size()) : 0.0;
        report.per_attribute.emplace_back(name, scores);
    }

    if (!joint_attrs.empty()) {
        auto rj = CategoricalHistogram::from_population(real_pop, joint_attrs, mode);
        auto sj = CategoricalHistogram::from_population(synth_pop, joint_attrs, mode);
        // Bins actually used follow the NA mode; the reported n_bins is the
        // real-category combination count.
        std::uint64_t used_bins = 1, report_bins = 1;
        for (const auto &name : joint_attrs) {
            const std::size_t idx = schema.index_of(name);
            used_bins *= mode == NaMode::include ? schema.cardinality(idx)
                                                 : schema.real_cardinality(idx);
            report_bins *= schema.real_cardinality(idx);
        }
        report.srmse = srmse(rj, sj, used_bins);
        report.k = static_cast<int>(joint_attrs.size());
        report.n_bins = report_bins;
        report.extras["srmse_bins_used"] = static_cast<double>(used_bins);
        report.extras["joint_observed_real"] = static_cast<double>(rj.observed_bins());
        report.extras["joint_observed_synthetic"] = static_cast<double>(sj.observed_bins());
    }
    report.extras["conditioned_attrs"] = static_cast<double>(conditioned_attrs.size());
    return report;
}

double tvc_against_marginal(const MarginalTable &target, const Population &synth_pop,
                            const std::string &attr) {
    const Schema &schema = synth_pop.schema();
    const std::size_t idx = schema.index_of(attr);
    std::size_t pos = target.attrs().size();
    for (std::size_t k = 0; k < target.attrs().size(); ++k)
        if (target.attrs()[k] == attr) pos = k;
    if (pos == target.attrs().size())
        throw DataError("tvc_against_marginal: attribute '" + attr + "' not in target");
    if (target.total() == 0 || synth_pop.is_empty())
        throw DataError("tvc_against_marginal: zero-total input");

    std::vector<std::int64_t> target_counts(schema.cardinality(idx), 0);
    for (std::size_t flat = 0; flat < target.n_cells(); ++flat)
        target_counts[target.tuple_of(flat)[pos]] += target.count_at(flat);
    std::vector<std::int64_t> synth_counts(schema.cardinality(idx), 0);
    for (const auto &row : synth_pop.rows()) synth_counts[row[idx]] += 1;

    double sum = 0.0;
    for (std::size_t c = 0; c < target_counts.size(); ++c) {
        const double rf = static_cast<double>(target_counts[c]) / static_cast<double>(target.total());
        const double sf = static_cast<double>(synth_counts[c]) / static_cast<double>(synth_pop.size());
        sum += std::abs(rf - sf);
    }
    return 1.0 - 0.5 * sum;
}

} // namespace popsynth
