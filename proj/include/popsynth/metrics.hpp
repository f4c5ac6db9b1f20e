#pragma once

#include "popsynth/histogram.hpp"
#include "popsynth/marginal.hpp"
#include "popsynth/population.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace popsynth {

// Total variation distance between the normalized histograms, summed over
// every bin of the shared layout (unseen categories contribute 0).
double tvd(const CategoricalHistogram &real_hist, const CategoricalHistogram &synth_hist);

// Total Variation Complement: 1 - tvd. Higher is better, in [0, 1].
double tvc(const CategoricalHistogram &real_hist, const CategoricalHistogram &synth_hist);

// Category Adherence: share of synthetic values drawn from categories that
// occur in the real column.
double category_adherence(const Population &real_pop, const Population &synth_pop,
                          const std::string &attr, NaMode mode = NaMode::include);

// Standardized RMSE between the two histograms normalized to frequencies,
// over n_bins cells (empty cells included). n_bins must cover every
// observed tuple.
double srmse(const CategoricalHistogram &real_hist, const CategoricalHistogram &synth_hist,
             std::uint64_t n_bins);

// Coefficient of determination of synth vs real with the identity line y=x
// as the model. Unbounded below; requires non-degenerate real variance.
double r_squared(const std::vector<std::pair<double, double>> &pairs);

struct AttributeScores {
    double tvc = 0.0;
    double ca = 0.0;
    double pct_na = 0.0; // share of "NA" in the reference column
};

struct MetricReport {
    std::vector<std::pair<std::string, AttributeScores>> per_attribute; // schema order
    double srmse = 0.0;
    int k = 0;                // number of attributes in the joint
    std::uint64_t n_bins = 0; // total_combinations over the joint attributes
    std::map<std::string, double> extras;

    const AttributeScores &scores(const std::string &attr) const;
    void to_csv(std::ostream &out) const;
};

// Per-attribute TVC and CA for every schema attribute plus the SRMSE of the
// joint_attrs distribution. conditioned_attrs is carried into extras for
// reporting only.
MetricReport evaluate(const Population &real_pop, const Population &synth_pop,
                      const std::vector<std::string> &conditioned_attrs,
                      const std::vector<std::string> &joint_attrs, NaMode mode = NaMode::include);

// TVC of the attributes covered by a target table, measured against the
// table itself instead of a reference population.
double tvc_against_marginal(const MarginalTable &target, const Population &synth_pop,
                            const std::string &attr);

} // namespace popsynth
