#pragma once

// Independent brute-force re-implementations of the evaluation statistics,
// written as direct loops over label tuples. Test-only; they deliberately
// share no code with the library implementations they check.

#include "popsynth/marginal.hpp"
#include "popsynth/population.hpp"

#include <cmath>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace oracle {

using popsynth::Population;

using TupleCounts = std::map<std::vector<std::string>, long long>;

inline TupleCounts tuple_counts(const Population &pop, const std::vector<std::string> &attrs) {
    std::vector<std::size_t> idx;
    for (const auto &a : attrs) idx.push_back(pop.schema().index_of(a));
    TupleCounts counts;
    for (std::size_t r = 0; r < pop.size(); ++r) {
        std::vector<std::string> key;
        for (std::size_t k : idx) key.push_back(pop.label(r, k));
        counts[key] += 1;
    }
    return counts;
}

inline double tvc(const Population &real, const Population &synth,
                  const std::vector<std::string> &attrs) {
    const auto rc = tuple_counts(real, attrs);
    const auto sc = tuple_counts(synth, attrs);
    long long rn = 0, sn = 0;
    for (const auto &[k, v] : rc) rn += v;
    for (const auto &[k, v] : sc) sn += v;
    if (rn == 0 || sn == 0) throw std::runtime_error("oracle tvc: empty input");
    std::set<std::vector<std::string>> keys;
    for (const auto &[k, v] : rc) keys.insert(k);
    for (const auto &[k, v] : sc) keys.insert(k);
    double delta = 0.0;
    for (const auto &k : keys) {
        const double rp = rc.count(k) ? static_cast<double>(rc.at(k)) / rn : 0.0;
        const double sp = sc.count(k) ? static_cast<double>(sc.at(k)) / sn : 0.0;
        delta += std::abs(rp - sp);
    }
    return 1.0 - 0.5 * delta;
}

inline double category_adherence(const Population &real, const Population &synth,
                                 const std::string &attr) {
    const std::size_t idx = synth.schema().index_of(attr);
    std::set<std::string> real_values;
    for (std::size_t r = 0; r < real.size(); ++r)
        real_values.insert(real.label(r, synth.schema().index_of(attr)));
    long long hit = 0;
    for (std::size_t r = 0; r < synth.size(); ++r)
        if (real_values.count(synth.label(r, idx))) ++hit;
    if (synth.size() == 0) throw std::runtime_error("oracle ca: empty synthetic");
    return static_cast<double>(hit) / static_cast<double>(synth.size());
}

inline double srmse(const Population &real, const Population &synth,
                    const std::vector<std::string> &attrs, unsigned long long n_bins) {
    const auto rc = tuple_counts(real, attrs);
    const auto sc = tuple_counts(synth, attrs);
    long long rn = 0, sn = 0;
    for (const auto &[k, v] : rc) rn += v;
    for (const auto &[k, v] : sc) sn += v;
    std::set<std::vector<std::string>> keys;
    for (const auto &[k, v] : rc) keys.insert(k);
    for (const auto &[k, v] : sc) keys.insert(k);
    double sq = 0.0;
    for (const auto &k : keys) {
        const double rp = rc.count(k) ? static_cast<double>(rc.at(k)) / rn : 0.0;
        const double sp = (sc.count(k) && sn > 0) ? static_cast<double>(sc.at(k)) / sn : 0.0;
        sq += (rp - sp) * (rp - sp);
    }
    const double nb = static_cast<double>(n_bins);
    return std::sqrt(sq / nb) / (1.0 / nb);
}

inline double r_squared(const std::vector<std::pair<double, double>> &pairs) {
    double mean = 0.0;
    for (const auto &[r, s] : pairs) mean += r;
    mean /= static_cast<double>(pairs.size());
    double res = 0.0, tot = 0.0;
    for (const auto &[r, s] : pairs) {
        res += (s - r) * (s - r);
        tot += (r - mean) * (r - mean);
    }
    return 1.0 - res / tot;
}

// RSSZ from first principles: aggregate the materialized population over each
// target's attributes and apply the weighting cell by cell.
inline double rssz(const Population &synthetic, const std::vector<popsynth::MarginalTable> &targets,
                   double (*chi2_critical)(int)) {
    double total = 0.0;
    for (const auto &target : targets) {
        const auto counts = tuple_counts(synthetic, target.attrs());
        const double c = chi2_critical(static_cast<int>(target.n_cells()) - 1);
        const auto n = static_cast<double>(target.total());
        for (std::size_t flat = 0; flat < target.n_cells(); ++flat) {
            const auto labels = target.tuple_labels(flat);
            const double ax = counts.count(labels) ? static_cast<double>(counts.at(labels)) : 0.0;
            const double e = static_cast<double>(target.count_at(flat));
            const double d = ax - e;
            double f;
            if (ax == 0.0 || ax == n) f = 1.0 / c;
            else f = 1.0 / (c * ax * (1.0 - ax / n));
            total += f * d * d;
        }
    }
    return total;
}

} // namespace oracle
